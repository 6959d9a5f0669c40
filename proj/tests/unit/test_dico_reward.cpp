#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alphamine/dico_reward.hpp"
#include "support/reports.hpp"

using namespace alphamine;

namespace {

Scenario permissive() {
  Scenario s = default_scenario();
  s.quality_threshold = 0.0;
  return s;
}

}  // namespace

TEST_CASE("predictive reward") {
  const RewardParams p;
  CHECK(predictive_reward(fixtures::valid_report(0.05), p) == 0.05);
  CHECK(predictive_reward(BacktestReport::not_executable("parse"), p) == -1.0);
  auto low = fixtures::valid_report(0.05);
  low.valid = false;
  low.coverage = 0.2;
  CHECK(predictive_reward(low, p) == -1.0);
}

TEST_CASE("exact repeat penalty") {
  Archive a;
  const auto e = parse("ts_mean(close,5)");
  CHECK(exact_repeat_penalty(signature(e), a, RewardParams{}) == 0.0);
  a.try_insert(e, fixtures::valid_report(0.05), default_scenario());
  CHECK(exact_repeat_penalty(signature(e), a, RewardParams{}) == -0.05);
}

TEST_CASE("family reward") {
  Scenario s = default_scenario();
  s.reward.tau_new = 0.03;
  Archive a;
  CHECK(family_reward(signature(parse("ts_mean(close,5)")), fixtures::valid_report(0.06), a, s) == 0.02);

  Archive crowded;
  for (int w = 1; w <= 6; ++w) {
    crowded.try_insert(parse("ts_std(close," + std::to_string(w) + ")"), fixtures::valid_report(0.01), permissive());
  }
  CHECK(family_reward(signature(parse("ts_std(close,9)")), fixtures::valid_report(0.01), crowded, s) == -0.02);

  Archive pair;
  pair.try_insert(parse("ts_min(close,2)"), fixtures::valid_report(0.001), permissive());
  pair.try_insert(parse("ts_min(close,3)"), fixtures::valid_report(0.5), permissive());
  CHECK(family_reward(signature(parse("ts_min(close,9)")), fixtures::valid_report(0.001), pair, s) == 0.0);
  CHECK(family_reward(signature(parse("ts_min(close,9)")), fixtures::valid_report(0.5), pair, s) == 0.0);
}

TEST_CASE("complementarity") {
  const RewardParams p;
  CHECK(complementarity_from_cmax(1.0, p) == doctest::Approx(-0.02).epsilon(1e-15));
  CHECK(complementarity_from_cmax(0.9, p) == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(complementarity_from_cmax(0.0, p) == 0.02);
  CHECK(complementarity_from_cmax(0.5, p) == 0.0);

  const auto s = default_scenario();
  Archive empty;
  const auto b = fixtures::ramp_behavior(40, 3, 0.0);
  CHECK(max_elite_correlation(b, empty, s) == 0.0);
  CHECK(complementarity_reward(b, empty, s) == 0.02);

  Archive a;
  a.try_insert(parse("close"), fixtures::valid_report(0.05, b), s);
  CHECK(max_elite_correlation(b, a, s) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(complementarity_reward(b, a, s) == doctest::Approx(-0.02).epsilon(1e-14));
}

TEST_CASE("total") {
  const auto s = default_scenario();
  Archive empty;
  const auto e = parse("ts_mean(close,5)");
  const auto fresh = dico_reward(signature(e), fixtures::valid_report(0.05), empty, s);
  CHECK(fresh.total == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(fresh.flags.new_family);
  CHECK(fresh.flags.low_correlation);

  const auto invalid = dico_reward(std::nullopt, BacktestReport::not_executable("parse"), empty, s);
  CHECK(invalid.total == -1.0);
  CHECK_FALSE(invalid.flags.shaped);

  Scenario generous = s;
  generous.reward.lambda_new = 0.05;
  generous.reward.lambda_low = 0.05;
  const auto high = dico_reward(signature(e), fixtures::valid_report(1.95), empty, generous);
  CHECK(high.r_fam + high.r_comp == doctest::Approx(0.1));
  CHECK(high.total == 2.0);
}

TEST_CASE("resubmitting an archived candidate costs lambda_exact") {
  Scenario s = default_scenario();
  s.reward.lambda_new = 0.0;
  s.reward.lambda_low = 0.0;
  s.reward.lambda_corr = 0.0;
  Archive a;
  const auto e = parse("ts_mean(close,5)");
  const auto report = fixtures::valid_report(0.25);
  const auto first = dico_reward(signature(e), report, a, s);
  a.try_insert(e, report, s);
  const auto second = dico_reward(signature(e), report, a, s);
  CHECK(first.r_exact == 0.0);
  CHECK(second.r_exact == -s.reward.lambda_exact);
  CHECK(first.total - second.total == doctest::Approx(s.reward.lambda_exact).epsilon(1e-15));
}
