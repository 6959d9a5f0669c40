#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "alphamine/archive.hpp"
#include "alphamine/backtest.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

struct FusionConfig {
  std::size_t top_k = 10;
  double corr_threshold = 0.7;
  TimeWindow validation_window;
  TimeWindow test_window;

  void check() const;
};

struct SelectedFactor {
  ArchiveRecord record;
  BacktestReport validation;
};

/// Indices (into the ranked order 0..n-1) admitted by the greedy filter:
/// walk in order, admit i iff |corr(i, j)| <= threshold for every admitted j,
/// stop at top_k. Undefined correlations count as 0.
std::vector<std::size_t> greedy_decorrelate(std::size_t n,
                                            const std::function<std::optional<double>(std::size_t, std::size_t)>& corr,
                                            double threshold, std::size_t top_k);

/// Re-score every record on the validation window, rank by the validation
/// primary metric, then greedy_decorrelate on validation behavior profiles.
std::vector<SelectedFactor> select(const Archive& archive, const FusionConfig& config, const MarketPanel& panel,
                                   const ReturnTarget& target, const Scenario& scenario);

// Same, from already re-scored candidates (ranked internally).
std::vector<SelectedFactor> select_from(std::vector<SelectedFactor> rescored, const FusionConfig& config,
                                        const Scenario& scenario);
std::vector<SelectedFactor> rescore(const Archive& archive, const TimeWindow& window, const MarketPanel& panel,
                                    const ReturnTarget& target, const Scenario& scenario);

struct FusedSignal {
  std::vector<Digest> members;
  std::vector<std::int64_t> timestamps;
  Grid values;
  std::size_t first_row = 0;  // rows before this are warm-up
};

/// Equal-weight mean of standardized member values on `window`.
/// Cross-sectional: per-period z-score. Timing: z-score with the member's
/// mean/std on `standardize_window`.
FusedSignal fuse(std::span<const ArchiveRecord> members, const MarketPanel& panel, const TimeWindow& window,
                 const Scenario& scenario, const TimeWindow& standardize_window);
FusedSignal fuse(std::span<const SelectedFactor> members, const MarketPanel& panel, const TimeWindow& window,
                 const Scenario& scenario, const TimeWindow& standardize_window);

BacktestReport evaluate_fused(const FusedSignal& signal, const ReturnTarget& target, const Scenario& scenario);

struct SweepPoint {
  double k_or_threshold = 0.0;
  std::size_t members = 0;
  BacktestReport report;
};

std::vector<SweepPoint> sweep_top_k(const std::vector<SelectedFactor>& rescored, const FusionConfig& config,
                                    std::span<const std::size_t> ks, const MarketPanel& panel,
                                    const ReturnTarget& target, const Scenario& scenario);
std::vector<SweepPoint> sweep_threshold(const std::vector<SelectedFactor>& rescored, const FusionConfig& config,
                                        std::span<const double> thresholds, const MarketPanel& panel,
                                        const ReturnTarget& target, const Scenario& scenario);

// Header: k_or_threshold,rankic,ic,icir,diracc
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

nlohmann::json to_json(const FusedSignal& signal, const BacktestReport& report);

}  // namespace alphamine
