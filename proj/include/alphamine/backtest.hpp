#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphamine/dsl.hpp"
#include "alphamine/eval_engine.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"
#include "alphamine/task.hpp"

namespace alphamine {

/// What a factor "does" on a window, used to compare factors with each other.
/// timing: the signal itself; ranking: per-period cross-sectional ranks.
struct BehaviorProfile {
  enum class Mode { timing, ranking };

  Mode mode = Mode::ranking;
  std::size_t width = 0;                // entries per period
  std::vector<std::int64_t> timestamps; // one per period
  std::vector<double> vector;           // periods x width, NaN = missing

  bool operator==(const BehaviorProfile& other) const;
};

struct BacktestReport {
  std::optional<double> diracc;
  std::optional<double> ic;
  std::optional<double> rankic;
  std::optional<double> icir;
  std::vector<std::optional<double>> ic_series;
  double coverage = 0.0;
  std::size_t n_periods = 0;
  bool executable = false;
  bool valid = false;
  BehaviorProfile behavior;
  std::optional<double> primary_metric_value;
  std::string failure;  // why the candidate could not be executed

  static BacktestReport not_executable(std::string why);
};

inline constexpr double kIcirEpsilon = 1e-8;
inline constexpr double kIcirReportClamp = 1e7;

// Fraction of samples where sgn(z) == sgn(y), sgn(x) = x > 0 ? +1 : -1,
// pooled over rows >= first_row with both sides defined.
std::optional<double> dir_acc(const Grid& z, const Grid& y, std::size_t first_row = 0);

// Pearson over entries with both sides defined; undefined below `min_count`
// pairs or when either side is constant.
std::optional<double> ic_t(std::span<const double> z, std::span<const double> y, std::size_t min_count = 3);
// ic_t on average ranks of the paired entries.
std::optional<double> rank_ic_t(std::span<const double> z, std::span<const double> y, std::size_t min_count = 3);

struct IcSummary {
  double mean = 0.0;
  double icir = 0.0;  // mean / (population std + epsilon), unclamped
};

std::optional<IcSummary> aggregate(std::span<const std::optional<double>> series);
double reported_icir(double icir);

/// Scores factor values against the aligned target. `z` and `y` must cover the
/// same rows; rows before z.first_scored_row() are ignored.
BacktestReport regime_backtest(const FactorValues& z, const ReturnTarget& y, const Scenario& scenario);
BacktestReport regime_backtest(const FactorValues& z, const ReturnTarget& y, const MiningTask& task);

// Pairwise-complete Pearson between two profiles aligned on timestamps.
// nullopt when modes/widths differ, overlap < min_overlap, or either side is constant.
std::optional<double> behavior_correlation(const BehaviorProfile& a, const BehaviorProfile& b,
                                           std::size_t min_overlap = 30);

/// Factor values of `expr` on `window`, computed on a slice that carries
/// enough warm-up history for the expression's lookback, together with the
/// matching target rows.
struct WindowedFactor {
  FactorValues values;
  ReturnTarget target;
  std::vector<std::int64_t> timestamps;
};

WindowedFactor evaluate_on_window(const FactorExpr& expr, const MarketPanel& panel,
                                  const ReturnTarget& target, const Scenario& scenario,
                                  const TimeWindow& window);

// evaluate_on_window + regime_backtest. Evaluation failures become a
// non-executable report instead of an exception.
BacktestReport backtest_on_window(const FactorExpr& expr, const MarketPanel& panel,
                                  const ReturnTarget& target, const Scenario& scenario,
                                  const TimeWindow& window);

nlohmann::json to_json(const BehaviorProfile& b);
BehaviorProfile behavior_from_json(const nlohmann::json& j);
// Flat object; ICIR clamped for display.
nlohmann::json to_json(const BacktestReport& r);

std::string to_string(BehaviorProfile::Mode mode);

}  // namespace alphamine
