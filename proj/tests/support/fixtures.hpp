#pragma once

// Random panels and random ASTs for property tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "alphamine/dsl.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"

namespace fixtures {

using alphamine::Expr;
using alphamine::Grid;
using alphamine::MarketPanel;

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

/// Random T x N panel. Prices are coarse-grained so ties occur; about
/// `missing` of the cells of every field are missing.
inline MarketPanel random_panel(std::mt19937_64& rng, std::size_t T, std::size_t N, double missing = 0.05) {
  std::map<std::string, Grid> fields;
  for (const char* name : {"open", "high", "low", "close", "volume"}) {
    Grid g(T, N);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        if (unit(rng) < missing) continue;
        const bool volume = std::string(name) == "volume";
        g(t, i) = volume ? 1000.0 * std::floor(unit(rng) * 8) : 10.0 + std::floor(unit(rng) * 40.0) / 4.0;
      }
    }
    fields.emplace(name, std::move(g));
  }
  std::vector<std::int64_t> ts(T);
  for (std::size_t t = 0; t < T; ++t) ts[t] = 1000 + 60 * static_cast<std::int64_t>(t);
  std::vector<std::string> assets;
  for (std::size_t i = 0; i < N; ++i) assets.push_back("S" + std::to_string(i));
  return MarketPanel::make(std::move(ts), std::move(assets), std::move(fields));
}

/// Random AST over the full operator inventory. Not necessarily valid; callers
/// filter with alphamine::find_violation when they need valid input.
class AstGenerator {
 public:
  AstGenerator(std::uint64_t seed, std::int64_t w_max) : rng_(seed), w_max_(w_max) {}

  Expr series(std::size_t depth) {
    static const std::vector<std::string> vars{"open", "high", "low", "close", "volume", "return"};
    if (depth <= 1 || below(rng_, 4) == 0) return Expr::variable(vars[below(rng_, vars.size())]);
    const auto ops = alphamine::operators();
    const auto& op = ops[below(rng_, ops.size())];
    std::vector<Expr> args;
    const std::size_t series_args = op.windowed ? op.arity - 1 : op.arity;
    for (std::size_t k = 0; k < series_args; ++k) {
      if (op.op_class == alphamine::OpClass::elementwise && op.arity == 2 && below(rng_, 5) == 0) {
        args.push_back(literal());
      } else {
        args.push_back(series(depth - 1));
      }
    }
    if (op.windowed) args.push_back(Expr::integer(1 + static_cast<std::int64_t>(below(rng_, static_cast<std::size_t>(w_max_)))));
    return Expr::call(std::string(op.name), std::move(args));
  }

  // Literals with awkward printed forms as well as plain ones.
  Expr literal() {
    switch (below(rng_, 5)) {
      case 0: return Expr::number(static_cast<double>(below(rng_, 10)));
      case 1: return Expr::number(-unit(rng_) * 100.0);
      case 2: return Expr::number(std::ldexp(unit(rng_) + 0.5, static_cast<int>(below(rng_, 80)) - 40));
      case 3: return Expr::number(0.1 * static_cast<double>(below(rng_, 30)));
      default: return Expr::number(unit(rng_));
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::int64_t w_max_;
};

/// Random expression valid under `scenario`, depth <= max_depth.
inline Expr random_valid(AstGenerator& gen, const alphamine::Scenario& scenario, std::size_t max_depth) {
  for (;;) {
    Expr e = gen.series(1 + below(gen.rng(), max_depth));
    if (!alphamine::find_violation(e, scenario)) return e;
  }
}

}  // namespace fixtures
