#pragma once

#include <optional>

#include "alphamine/archive.hpp"
#include "alphamine/backtest.hpp"
#include "alphamine/dsl.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

struct RewardBreakdown {
  double r_pred = 0.0;
  double r_exact = 0.0;
  double r_fam = 0.0;
  double r_comp = 0.0;
  double total = 0.0;

  struct Flags {
    bool exact = false;     // canonical form already archived
    bool new_family = false;
    bool overused_family = false;
    bool low_correlation = false;
    bool shaped = false;    // false for invalid candidates
  } flags;
  double c_max = 0.0;
};

// Primary metric when the report is valid, r_invalid otherwise.
double predictive_reward(const BacktestReport& report, const RewardParams& params);

double exact_repeat_penalty(const Signature& sig, const Archive& archive, const RewardParams& params);

// +lambda_new for a quality factor from an unseen family; -lambda_fam for a
// family with >= k_fam members whose best member is below the quality threshold.
double family_reward(const Signature& sig, const BacktestReport& report, const Archive& archive,
                     const Scenario& scenario);

// Largest behavior correlation with the elite set; 0 when nothing overlaps.
double max_elite_correlation(const BehaviorProfile& behavior, const Archive& archive, const Scenario& scenario);

double complementarity_reward(const BehaviorProfile& behavior, const Archive& archive, const Scenario& scenario);
double complementarity_from_cmax(double c_max, const RewardParams& params);

/// Clipped sum of the four components. Invalid candidates (or ones without a
/// signature) get r_invalid and no shaping.
RewardBreakdown dico_reward(const std::optional<Signature>& sig, const BacktestReport& report,
                            const Archive& archive, const Scenario& scenario);

}  // namespace alphamine
