#include "alphamine/synth.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "alphamine/errors.hpp"
#include "alphamine/kernels.hpp"

namespace alphamine {

namespace {

// Portable draws; std distributions differ between standard libraries.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  // (0, 1]
  double uniform() { return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

double planted_value(const std::string& name, double volume, double high, double low, double close) {
  if (name == "volume") return std::log(volume);
  if (name == "range") return (high - low) / close;
  throw InputError("unknown planted factor '" + name + "'");
}

}  // namespace

std::string planted_expression(const std::string& name) {
  if (name == "volume") return "zscore(log(volume))";
  if (name == "range") return "zscore(div(sub(high,low),close))";
  throw InputError("unknown planted factor '" + name + "'");
}

MarketPanel make_synthetic_panel(const SynthConfig& config) {
  if (config.assets == 0 || config.periods < 2) throw InputError("synthetic panel needs >= 1 asset and >= 2 periods");
  for (const auto& p : config.planted) planted_expression(p.name);

  const std::size_t T = config.periods;
  const std::size_t N = config.assets;
  Grid open(T, N), high(T, N), low(T, N), close(T, N), volume(T, N);
  Draws draws(config.seed);
  std::vector<double> factor(N), z, y(N, 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < N; ++i) {
      const double prev = t == 0 ? 100.0 : close(t - 1, i);
      close(t, i) = t == 0 ? 100.0 : prev * (1.0 + y[i]);
      open(t, i) = prev;
      high(t, i) = close(t, i) * (1.0 + 0.05 * draws.uniform());
      low(t, i) = close(t, i) * (1.0 - 0.05 * draws.uniform());
      volume(t, i) = std::exp(10.0 + draws.normal());
    }
    std::vector<double> signal(N, 0.0);
    for (const auto& p : config.planted) {
      for (std::size_t i = 0; i < N; ++i) {
        factor[i] = planted_value(p.name, volume(t, i), high(t, i), low(t, i), close(t, i));
      }
      const double m = kernels::mean(factor);
      const double sd = kernels::population_std(factor);
      for (std::size_t i = 0; i < N; ++i) signal[i] += p.weight * (sd > 0.0 ? (factor[i] - m) / sd : 0.0);
    }
    for (std::size_t i = 0; i < N; ++i) y[i] = signal[i] + config.noise * draws.normal();
  }

  std::vector<std::int64_t> timestamps(T);
  for (std::size_t t = 0; t < T; ++t) {
    timestamps[t] = config.start_time + static_cast<std::int64_t>(t) * config.step_seconds;
  }
  std::vector<std::string> assets(N);
  for (std::size_t i = 0; i < N; ++i) {
    assets[i] = "A" + std::string(i < 10 ? "0" : "") + std::to_string(i);
  }
  return MarketPanel::make(std::move(timestamps), std::move(assets),
                           {{"open", std::move(open)},
                            {"high", std::move(high)},
                            {"low", std::move(low)},
                            {"close", std::move(close)},
                            {"volume", std::move(volume)}});
}

}  // namespace alphamine
