#include "alphamine/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "alphamine/errors.hpp"
#include "alphamine/eval_engine.hpp"
#include "alphamine/kernels.hpp"

namespace alphamine {

void FusionConfig::check() const {
  if (top_k == 0) throw InputError("top_k must be >= 1");
  if (!(corr_threshold >= 0.0 && corr_threshold <= 1.0)) throw InputError("corr_threshold must lie in [0, 1]");
  if (validation_window.end < validation_window.start || test_window.end < test_window.start) {
    throw InputError("window end precedes start");
  }
  if (validation_window.start <= test_window.end && test_window.start <= validation_window.end) {
    throw InputError("validation and test windows overlap");
  }
}

std::vector<std::size_t> greedy_decorrelate(std::size_t n,
                                            const std::function<std::optional<double>(std::size_t, std::size_t)>& corr,
                                            double threshold, std::size_t top_k) {
  std::vector<std::size_t> admitted;
  for (std::size_t i = 0; i < n && admitted.size() < top_k; ++i) {
    const bool ok = std::all_of(admitted.begin(), admitted.end(),
                                [&](std::size_t j) { return std::abs(corr(i, j).value_or(0.0)) <= threshold; });
    if (ok) admitted.push_back(i);
  }
  return admitted;
}

std::vector<SelectedFactor> rescore(const Archive& archive, const TimeWindow& window, const MarketPanel& panel,
                                    const ReturnTarget& target, const Scenario& scenario) {
  const auto records = archive.records();
  std::vector<SelectedFactor> out(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    out[i].record = records[i];
    try {
      out[i].validation = backtest_on_window(parse(records[i].expression), panel, target, scenario, window);
    } catch (const InputError& e) {
      out[i].validation = BacktestReport::not_executable(e.what());
    }
  }
  return out;
}

std::vector<SelectedFactor> select_from(std::vector<SelectedFactor> rescored, const FusionConfig& config,
                                        const Scenario& scenario) {
  std::erase_if(rescored, [](const SelectedFactor& s) { return !s.validation.primary_metric_value; });
  std::stable_sort(rescored.begin(), rescored.end(), [](const SelectedFactor& a, const SelectedFactor& b) {
    return *a.validation.primary_metric_value > *b.validation.primary_metric_value;
  });
  const auto picked = greedy_decorrelate(
      rescored.size(),
      [&](std::size_t i, std::size_t j) {
        return behavior_correlation(rescored[i].validation.behavior, rescored[j].validation.behavior,
                                    scenario.min_overlap);
      },
      config.corr_threshold, config.top_k);
  std::vector<SelectedFactor> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(std::move(rescored[i]));
  return out;
}

std::vector<SelectedFactor> select(const Archive& archive, const FusionConfig& config, const MarketPanel& panel,
                                   const ReturnTarget& target, const Scenario& scenario) {
  return select_from(rescore(archive, config.validation_window, panel, target, scenario), config, scenario);
}

namespace {

struct Member {
  Digest hash;
  CompiledFactor cf;
};

// Pooled mean and population std of a member's defined values on a window.
std::pair<double, double> window_moments(const Member& m, const MarketPanel& panel, const TimeWindow& window) {
  const MarketPanel sliced = slice(panel, window, m.cf.max_lookback);
  const FactorValues fv = evaluate(m.cf, sliced);
  std::vector<double> values;
  for (std::size_t t = fv.first_scored_row(); t < fv.values.rows(); ++t) {
    for (double v : fv.values.row(t)) {
      if (is_defined(v)) values.push_back(v);
    }
  }
  return {kernels::mean(values), kernels::population_std(values)};
}

}  // namespace

FusedSignal fuse(std::span<const ArchiveRecord> members, const MarketPanel& panel, const TimeWindow& window,
                 const Scenario& scenario, const TimeWindow& standardize_window) {
  if (members.empty()) throw InputError("fusion needs at least one member");
  std::vector<Member> compiled;
  std::size_t lookback = 0;
  for (const auto& r : members) {
    try {
      compiled.push_back({r.exact_hash, realize(parse_valid(r.expression, scenario), scenario)});
    } catch (const InputError& e) {
      throw InputError("member " + r.exact_hash.hex() + " failed to compile: " + e.what());
    }
    lookback = std::max(lookback, compiled.back().cf.max_lookback);
  }

  const MarketPanel sliced = slice(panel, window, lookback);
  FusedSignal signal;
  signal.timestamps = sliced.timestamps();
  signal.first_row = sliced.warm_up();
  const std::size_t rows = sliced.periods();
  const std::size_t cols = sliced.asset_count();
  Grid sum(rows, cols, 0.0);
  std::vector<std::size_t> count(rows * cols, 0);

  for (const auto& m : compiled) {
    signal.members.push_back(m.hash);
    Grid z;
    std::size_t first = 0;
    try {
      FactorValues fv = evaluate(m.cf, sliced);
      first = fv.first_scored_row();
      if (scenario.universe_mode == UniverseMode::cross_sectional) {
        z = kernels::cs_zscore(fv.values);
      } else {
        const auto [mu, sd] = window_moments(m, panel, standardize_window);
        z = Grid(rows, cols);
        if (is_defined(sd) && sd > 0.0) {
          for (std::size_t c = 0; c < z.size(); ++c) {
            z.data()[c] = finite_or_missing((fv.values.data()[c] - mu) / sd);
          }
        }
      }
    } catch (const Error& e) {
      throw InputError("member " + m.hash.hex() + " failed to evaluate: " + e.what());
    }
    for (std::size_t t = first; t < rows; ++t) {
      for (std::size_t i = 0; i < cols; ++i) {
        if (z.defined(t, i)) {
          sum(t, i) += z(t, i);
          ++count[t * cols + i];
        }
      }
    }
  }

  signal.values = Grid(rows, cols);
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] > 0) signal.values.data()[c] = sum.data()[c] / static_cast<double>(count[c]);
  }
  return signal;
}

FusedSignal fuse(std::span<const SelectedFactor> members, const MarketPanel& panel, const TimeWindow& window,
                 const Scenario& scenario, const TimeWindow& standardize_window) {
  std::vector<ArchiveRecord> records;
  records.reserve(members.size());
  for (const auto& m : members) records.push_back(m.record);
  return fuse(std::span<const ArchiveRecord>(records), panel, window, scenario, standardize_window);
}

BacktestReport evaluate_fused(const FusedSignal& signal, const ReturnTarget& target, const Scenario& scenario) {
  FactorValues fv;
  fv.values = signal.values;
  fv.warm_up = signal.first_row;
  fv.prefix_rows = signal.first_row;
  return regime_backtest(fv, align(target, signal.timestamps), scenario);
}

namespace {

SweepPoint sweep_point(double key, const std::vector<SelectedFactor>& rescored, const FusionConfig& config,
                       const MarketPanel& panel, const ReturnTarget& target, const Scenario& scenario) {
  SweepPoint p;
  p.k_or_threshold = key;
  const auto selected = select_from(rescored, config, scenario);
  p.members = selected.size();
  if (selected.empty()) {
    p.report = BacktestReport::not_executable("no factor selected");
    return p;
  }
  const FusedSignal signal = fuse(std::span<const SelectedFactor>(selected), panel, config.test_window, scenario,
                                  config.validation_window);
  p.report = evaluate_fused(signal, target, scenario);
  return p;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<SweepPoint> sweep_top_k(const std::vector<SelectedFactor>& rescored, const FusionConfig& config,
                                    std::span<const std::size_t> ks, const MarketPanel& panel,
                                    const ReturnTarget& target, const Scenario& scenario) {
  std::vector<SweepPoint> out;
  for (std::size_t k : ks) {
    FusionConfig c = config;
    c.top_k = k;
    out.push_back(sweep_point(static_cast<double>(k), rescored, c, panel, target, scenario));
  }
  return out;
}

std::vector<SweepPoint> sweep_threshold(const std::vector<SelectedFactor>& rescored, const FusionConfig& config,
                                        std::span<const double> thresholds, const MarketPanel& panel,
                                        const ReturnTarget& target, const Scenario& scenario) {
  std::vector<SweepPoint> out;
  for (double th : thresholds) {
    FusionConfig c = config;
    c.corr_threshold = th;
    out.push_back(sweep_point(th, rescored, c, panel, target, scenario));
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "k_or_threshold,rankic,ic,icir,diracc\n";
  for (const auto& p : points) {
    std::optional<double> icir;
    if (p.report.icir) icir = reported_icir(*p.report.icir);
    out << cell(p.k_or_threshold) << ',' << cell(p.report.rankic) << ',' << cell(p.report.ic) << ',' << cell(icir)
        << ',' << cell(p.report.diracc) << '\n';
  }
}

nlohmann::json to_json(const FusedSignal& signal, const BacktestReport& report) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : signal.members) members.push_back(m.hex());
  const std::size_t first = std::min(signal.first_row, signal.timestamps.size());
  nlohmann::json j{{"members", std::move(members)},
                   {"periods", signal.timestamps.size() - first},
                   {"report", to_json(report)}};
  if (first < signal.timestamps.size()) {
    j["start"] = signal.timestamps[first];
    j["end"] = signal.timestamps.back();
  }
  return j;
}

}  // namespace alphamine
