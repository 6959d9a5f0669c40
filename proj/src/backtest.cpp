#include "alphamine/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "alphamine/errors.hpp"
#include "alphamine/kernels.hpp"

namespace alphamine {

namespace {

// Pairs with both sides defined.
void paired(std::span<const double> z, std::span<const double> y, std::vector<double>& zs, std::vector<double>& ys) {
  zs.clear();
  ys.clear();
  for (std::size_t k = 0; k < z.size() && k < y.size(); ++k) {
    if (is_defined(z[k]) && is_defined(y[k])) {
      zs.push_back(z[k]);
      ys.push_back(y[k]);
    }
  }
}

std::optional<double> defined_or_none(double v) {
  if (!is_defined(v)) return std::nullopt;
  return v;
}

std::optional<double> primary_of(const BacktestReport& r, PrimaryMetric m) {
  switch (m) {
    case PrimaryMetric::diracc: return r.diracc;
    case PrimaryMetric::ic: return r.ic;
    case PrimaryMetric::rankic: return r.rankic;
  }
  return std::nullopt;
}

std::vector<double> column(const Grid& g, std::size_t i, std::size_t first) {
  std::vector<double> out;
  out.reserve(g.rows() - first);
  for (std::size_t t = first; t < g.rows(); ++t) out.push_back(g(t, i));
  return out;
}

BehaviorProfile make_behavior(const FactorValues& z, const ReturnTarget& y, const Scenario& scenario,
                              std::size_t first) {
  const Grid& v = z.values;
  BehaviorProfile b;
  b.width = v.cols();
  b.timestamps.assign(y.timestamps.begin() + static_cast<std::ptrdiff_t>(first), y.timestamps.end());
  b.vector.assign((v.rows() - first) * v.cols(), kMissing);
  if (scenario.universe_mode == UniverseMode::single_asset) {
    b.mode = BehaviorProfile::Mode::timing;
    std::copy(v.data().begin() + static_cast<std::ptrdiff_t>(first * v.cols()), v.data().end(), b.vector.begin());
    return b;
  }
  b.mode = BehaviorProfile::Mode::ranking;
  std::vector<double> values, ranks;
  std::vector<std::size_t> where;
  for (std::size_t t = first; t < v.rows(); ++t) {
    values.clear();
    where.clear();
    const auto row = v.row(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (is_defined(row[i])) {
        values.push_back(row[i]);
        where.push_back(i);
      }
    }
    if (values.size() < scenario.min_assets) continue;
    ranks.resize(values.size());
    kernels::average_ranks(values, ranks);
    const auto n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < where.size(); ++k) b.vector[(t - first) * b.width + where[k]] = ranks[k] / n;
  }
  return b;
}

}  // namespace

bool BehaviorProfile::operator==(const BehaviorProfile& other) const {
  if (mode != other.mode || width != other.width || timestamps != other.timestamps ||
      vector.size() != other.vector.size()) {
    return false;
  }
  for (std::size_t k = 0; k < vector.size(); ++k) {
    const bool a = is_defined(vector[k]);
    if (a != is_defined(other.vector[k])) return false;
    if (a && vector[k] != other.vector[k]) return false;
  }
  return true;
}

BacktestReport BacktestReport::not_executable(std::string why) {
  BacktestReport r;
  r.failure = std::move(why);
  return r;
}

std::optional<double> dir_acc(const Grid& z, const Grid& y, std::size_t first_row) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t t = first_row; t < z.rows() && t < y.rows(); ++t) {
    for (std::size_t i = 0; i < z.cols(); ++i) {
      const double a = z(t, i);
      const double b = y(t, i);
      if (!is_defined(a) || !is_defined(b)) continue;
      ++total;
      if ((a > 0.0) == (b > 0.0)) ++hits;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> ic_t(std::span<const double> z, std::span<const double> y, std::size_t min_count) {
  std::vector<double> zs, ys;
  paired(z, y, zs, ys);
  if (zs.size() < min_count) return std::nullopt;
  return defined_or_none(kernels::pearson(zs, ys));
}

std::optional<double> rank_ic_t(std::span<const double> z, std::span<const double> y, std::size_t min_count) {
  std::vector<double> zs, ys;
  paired(z, y, zs, ys);
  if (zs.size() < min_count) return std::nullopt;
  std::vector<double> rz(zs.size()), ry(ys.size());
  kernels::average_ranks(zs, rz);
  kernels::average_ranks(ys, ry);
  return defined_or_none(kernels::pearson(rz, ry));
}

std::optional<IcSummary> aggregate(std::span<const std::optional<double>> series) {
  std::vector<double> values;
  for (const auto& v : series) {
    if (v) values.push_back(*v);
  }
  if (values.empty()) return std::nullopt;
  IcSummary s;
  s.mean = kernels::mean(values);
  s.icir = s.mean / (kernels::population_std(values) + kIcirEpsilon);
  return s;
}

double reported_icir(double icir) { return std::clamp(icir, -kIcirReportClamp, kIcirReportClamp); }

BacktestReport regime_backtest(const FactorValues& z, const ReturnTarget& y, const Scenario& scenario) {
  if (y.horizon != scenario.horizon) {
    throw InputError("target horizon " + std::to_string(y.horizon) + " does not match scenario horizon " +
                     std::to_string(scenario.horizon));
  }
  const Grid& zv = z.values;
  const Grid& yv = y.values;
  if (zv.rows() != yv.rows() || zv.cols() != yv.cols() || y.timestamps.size() != zv.rows()) {
    throw InputError("factor values and target are not aligned");
  }

  BacktestReport r;
  r.executable = true;
  const std::size_t first = std::min(z.first_scored_row(), zv.rows());
  const std::size_t rows = zv.rows() - first;
  const std::size_t n = zv.cols();

  std::size_t both = 0;
  std::vector<std::size_t> scored_per_row(rows, 0);
  for (std::size_t t = first; t < zv.rows(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (zv.defined(t, i) && yv.defined(t, i)) {
        ++both;
        ++scored_per_row[t - first];
      }
    }
  }
  r.coverage = rows * n == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(rows * n);
  r.diracc = dir_acc(zv, yv, first);

  std::vector<std::optional<double>> rank_series;
  if (scenario.universe_mode == UniverseMode::cross_sectional) {
    for (std::size_t t = first; t < zv.rows(); ++t) {
      r.ic_series.push_back(ic_t(zv.row(t), yv.row(t), scenario.min_assets));
      rank_series.push_back(rank_ic_t(zv.row(t), yv.row(t), scenario.min_assets));
      if (rank_series.back()) ++r.n_periods;
    }
  } else {
    // One time-series correlation per asset; the series runs over assets.
    for (std::size_t i = 0; i < n; ++i) {
      const auto zc = column(zv, i, first);
      const auto yc = column(yv, i, first);
      r.ic_series.push_back(ic_t(zc, yc, scenario.min_assets));
      rank_series.push_back(rank_ic_t(zc, yc, scenario.min_assets));
    }
    r.n_periods = static_cast<std::size_t>(
        std::count_if(scored_per_row.begin(), scored_per_row.end(), [](std::size_t c) { return c > 0; }));
  }
  if (const auto s = aggregate(r.ic_series)) {
    r.ic = s->mean;
    r.icir = s->icir;
  }
  if (const auto s = aggregate(rank_series)) r.rankic = s->mean;

  r.behavior = make_behavior(z, y, scenario, first);
  r.primary_metric_value = primary_of(r, scenario.primary_metric);
  r.valid = r.executable && r.coverage >= scenario.min_coverage && r.n_periods >= scenario.min_periods &&
            r.primary_metric_value.has_value();
  return r;
}

BacktestReport regime_backtest(const FactorValues& z, const ReturnTarget& y, const MiningTask& task) {
  Scenario scenario = task.scenario;
  scenario.primary_metric = task.objective;
  return regime_backtest(z, y, scenario);
}

std::optional<double> behavior_correlation(const BehaviorProfile& a, const BehaviorProfile& b,
                                           std::size_t min_overlap) {
  if (a.mode != b.mode || a.width != b.width || a.width == 0) return std::nullopt;
  std::vector<double> xs, ys;
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < a.timestamps.size() && ib < b.timestamps.size()) {
    if (a.timestamps[ia] < b.timestamps[ib]) {
      ++ia;
    } else if (b.timestamps[ib] < a.timestamps[ia]) {
      ++ib;
    } else {
      for (std::size_t k = 0; k < a.width; ++k) {
        const double x = a.vector[ia * a.width + k];
        const double y = b.vector[ib * b.width + k];
        if (is_defined(x) && is_defined(y)) {
          xs.push_back(x);
          ys.push_back(y);
        }
      }
      ++ia;
      ++ib;
    }
  }
  if (xs.size() < min_overlap) return std::nullopt;
  return defined_or_none(kernels::pearson(xs, ys));
}

WindowedFactor evaluate_on_window(const FactorExpr& expr, const MarketPanel& panel, const ReturnTarget& target,
                                  const Scenario& scenario, const TimeWindow& window) {
  const CompiledFactor cf = realize(validate(expr, scenario), scenario);
  const MarketPanel sliced = slice(panel, window, cf.max_lookback);
  WindowedFactor out;
  out.values = evaluate(cf, sliced);
  out.target = align(target, sliced.timestamps());
  out.timestamps = sliced.timestamps();
  return out;
}

BacktestReport backtest_on_window(const FactorExpr& expr, const MarketPanel& panel, const ReturnTarget& target,
                                  const Scenario& scenario, const TimeWindow& window) {
  try {
    const WindowedFactor wf = evaluate_on_window(expr, panel, target, scenario, window);
    return regime_backtest(wf.values, wf.target, scenario);
  } catch (const Error& e) {
    return BacktestReport::not_executable(e.what());
  }
}

std::string to_string(BehaviorProfile::Mode mode) {
  return mode == BehaviorProfile::Mode::timing ? "timing" : "ranking";
}

namespace {

nlohmann::json nullable(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const BehaviorProfile& b) {
  nlohmann::json vec = nlohmann::json::array();
  for (double v : b.vector) vec.push_back(is_defined(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
  return {{"mode", to_string(b.mode)}, {"width", b.width}, {"timestamps", b.timestamps}, {"vector", std::move(vec)}};
}

BehaviorProfile behavior_from_json(const nlohmann::json& j) {
  try {
    BehaviorProfile b;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "timing") {
      b.mode = BehaviorProfile::Mode::timing;
    } else if (mode == "ranking") {
      b.mode = BehaviorProfile::Mode::ranking;
    } else {
      throw InputError("unknown behavior mode '" + mode + "'");
    }
    b.width = j.at("width").get<std::size_t>();
    b.timestamps = j.at("timestamps").get<std::vector<std::int64_t>>();
    for (const auto& v : j.at("vector")) b.vector.push_back(v.is_null() ? kMissing : v.get<double>());
    if (b.vector.size() != b.timestamps.size() * b.width) throw InputError("behavior vector has the wrong length");
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad behavior profile: ") + e.what());
  }
}

nlohmann::json to_json(const BacktestReport& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& v : r.ic_series) series.push_back(nullable(v));
  nlohmann::json j{{"diracc", nullable(r.diracc)},
                   {"ic", nullable(r.ic)},
                   {"rankic", nullable(r.rankic)},
                   {"icir", r.icir ? nlohmann::json(reported_icir(*r.icir)) : nlohmann::json(nullptr)},
                   {"ic_series", std::move(series)},
                   {"coverage", r.coverage},
                   {"n_periods", r.n_periods},
                   {"executable", r.executable},
                   {"valid", r.valid},
                   {"behavior", to_json(r.behavior)},
                   {"primary_metric_value", nullable(r.primary_metric_value)}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

}  // namespace alphamine
