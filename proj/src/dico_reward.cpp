#include "alphamine/dico_reward.hpp"

#include <algorithm>

namespace alphamine {

double predictive_reward(const BacktestReport& report, const RewardParams& params) {
  if (report.valid && report.primary_metric_value) return *report.primary_metric_value;
  return params.r_invalid;
}

double exact_repeat_penalty(const Signature& sig, const Archive& archive, const RewardParams& params) {
  return archive.contains_exact(sig.exact_hash) ? -params.lambda_exact : 0.0;
}

namespace {

struct FamilyIndicators {
  bool fresh = false;
  bool overused = false;
};

FamilyIndicators family_indicators(const Signature& sig, const BacktestReport& report, const Archive& archive,
                                   const Scenario& scenario) {
  const auto stats = archive.family(sig.family_hash);
  FamilyIndicators f;
  if (!stats) {
    f.fresh = report.primary_metric_value && *report.primary_metric_value >= scenario.tau_new();
  } else {
    f.overused = stats->count >= scenario.reward.k_fam && stats->best_primary_metric < scenario.quality_threshold;
  }
  return f;
}

}  // namespace

double family_reward(const Signature& sig, const BacktestReport& report, const Archive& archive,
                     const Scenario& scenario) {
  const auto f = family_indicators(sig, report, archive, scenario);
  if (f.fresh) return scenario.reward.lambda_new;
  if (f.overused) return -scenario.reward.lambda_fam;
  return 0.0;
}

double max_elite_correlation(const BehaviorProfile& behavior, const Archive& archive, const Scenario& scenario) {
  const auto elite = archive.elite(scenario.elite_size);
  if (elite.empty()) return 0.0;
  double c_max = -1.0;
  for (const auto& record : elite) {
    c_max = std::max(c_max, behavior_correlation(behavior, record.behavior, scenario.min_overlap).value_or(0.0));
  }
  return c_max;
}

double complementarity_from_cmax(double c_max, const RewardParams& params) {
  const double bonus = c_max <= params.tau_low ? params.lambda_low : 0.0;
  return bonus - params.lambda_corr * std::max(c_max - params.tau_corr, 0.0);
}

double complementarity_reward(const BehaviorProfile& behavior, const Archive& archive, const Scenario& scenario) {
  return complementarity_from_cmax(max_elite_correlation(behavior, archive, scenario), scenario.reward);
}

RewardBreakdown dico_reward(const std::optional<Signature>& sig, const BacktestReport& report,
                            const Archive& archive, const Scenario& scenario) {
  const RewardParams& p = scenario.reward;
  RewardBreakdown b;
  b.r_pred = predictive_reward(report, p);
  if (sig && report.valid) {
    b.flags.shaped = true;
    b.flags.exact = archive.contains_exact(sig->exact_hash);
    b.r_exact = b.flags.exact ? -p.lambda_exact : 0.0;
    const auto f = family_indicators(*sig, report, archive, scenario);
    b.flags.new_family = f.fresh;
    b.flags.overused_family = f.overused;
    b.r_fam = f.fresh ? p.lambda_new : (f.overused ? -p.lambda_fam : 0.0);
    b.c_max = max_elite_correlation(report.behavior, archive, scenario);
    b.r_comp = complementarity_from_cmax(b.c_max, p);
    b.flags.low_correlation = b.c_max <= p.tau_low;
  }
  b.total = std::clamp(b.r_pred + b.r_exact + b.r_fam + b.r_comp, p.r_min, p.r_max);
  return b;
}

}  // namespace alphamine
