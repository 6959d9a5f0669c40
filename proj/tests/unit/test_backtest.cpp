#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "alphamine/backtest.hpp"
#include "alphamine/synth.hpp"

using namespace alphamine;

namespace {

Grid grid_of(std::size_t rows, std::size_t cols, const std::vector<double>& v) {
  Grid g(rows, cols);
  for (std::size_t k = 0; k < v.size(); ++k) g.data()[k] = v[k];
  return g;
}

ReturnTarget target_of(const Grid& y) {
  ReturnTarget t;
  t.horizon = 1;
  t.values = y;
  for (std::size_t r = 0; r < y.rows(); ++r) t.timestamps.push_back(100 + static_cast<std::int64_t>(r));
  return t;
}

Scenario loose(UniverseMode mode = UniverseMode::cross_sectional) {
  Scenario s = default_scenario(mode);
  s.min_periods = 5;
  s.min_overlap = 5;
  return s;
}

}  // namespace

TEST_CASE("dir_acc") {
  CHECK(*dir_acc(grid_of(3, 1, {1, -1, 2}), grid_of(3, 1, {0.5, -0.2, -0.1})) == doctest::Approx(2.0 / 3.0));
  CHECK(*dir_acc(grid_of(1, 3, {1, -2, 3}), grid_of(1, 3, {1, -2, 3})) == 1.0);
  CHECK_FALSE(dir_acc(Grid(2, 2), grid_of(2, 2, {1, 2, 3, 4})));
  // sgn(0) counts as -1.
  CHECK(*dir_acc(grid_of(1, 2, {0, 0}), grid_of(1, 2, {-1, 1})) == 0.5);
}

TEST_CASE("ic_t") {
  const std::vector<double> z{1, 2, 3};
  CHECK(*ic_t(z, std::vector<double>{2, 4, 6}) == 1.0);
  CHECK(*ic_t(z, std::vector<double>{3, 2, 1}) == -1.0);
  CHECK(*ic_t(z, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(ic_t(z, std::vector<double>{1, 1, 1}));
  CHECK_FALSE(ic_t(std::vector<double>{1, 2, kMissing}, std::vector<double>{1, 2, 3}));
  CHECK(*ic_t(std::vector<double>{1, 2, kMissing}, std::vector<double>{1, 2, 3}, 2) == 1.0);
}

TEST_CASE("rank_ic_t") {
  CHECK(*rank_ic_t(std::vector<double>{10, 20, 30}, std::vector<double>{1, 100, 2}) ==
        doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> z{0.3, -1.2, 2.5, 0.7};
  std::vector<double> y;
  for (double v : z) y.push_back(std::exp(v));
  CHECK(*rank_ic_t(z, y) == 1.0);
  CHECK(*rank_ic_t(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 3}) ==
        doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("aggregate") {
  const std::vector<std::optional<double>> a{0.2, 0.0};
  const auto s = aggregate(a).value();
  CHECK(s.mean == doctest::Approx(0.1));
  CHECK(s.icir == doctest::Approx(0.1 / (0.1 + 1e-8)).epsilon(1e-12));
  const std::vector<std::optional<double>> flat{0.1, 0.1, 0.1};
  CHECK(reported_icir(aggregate(flat)->icir) == doctest::Approx(kIcirReportClamp));
  const std::vector<std::optional<double>> one{0.3};
  CHECK(reported_icir(aggregate(one)->icir) == kIcirReportClamp);
  const std::vector<std::optional<double>> none{std::nullopt};
  CHECK_FALSE(aggregate(none));
}

TEST_CASE("identity target scores perfectly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Grid y(10, 3);
  for (double& v : y.data()) v = n(rng);
  const auto r = regime_backtest(FactorValues{y, 0, 0}, target_of(y), loose());
  CHECK(r.valid);
  CHECK(*r.rankic == 1.0);
  CHECK(*r.ic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.n_periods == 10);
  CHECK(r.coverage == 1.0);
  CHECK(r.behavior.mode == BehaviorProfile::Mode::ranking);
  CHECK(r.behavior.width == 3);
  CHECK(r.behavior.vector.size() == 30);
}

TEST_CASE("constant cross-section is undefined everywhere") {
  Grid z(10, 3, 1.0);
  Grid y(10, 3);
  for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = static_cast<double>(k % 7);
  const auto r = regime_backtest(FactorValues{z, 0, 0}, target_of(y), loose());
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.rankic);
  CHECK(r.n_periods == 0);
}

TEST_CASE("coverage and period gates") {
  Grid y(10, 3);
  for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = std::sin(static_cast<double>(k));
  Grid z = y;
  for (std::size_t t = 0; t < 6; ++t) z(t, 0) = kMissing;
  Scenario s = loose();
  s.min_coverage = 0.9;
  const auto r = regime_backtest(FactorValues{z, 0, 0}, target_of(y), s);
  CHECK(r.coverage == doctest::Approx(24.0 / 30.0));
  CHECK_FALSE(r.valid);
  // Rows 0..5 have two assets, below min_assets.
  s.min_coverage = 0.5;
  CHECK(regime_backtest(FactorValues{z, 0, 0}, target_of(y), s).n_periods == 4);
  s.min_periods = 5;
  CHECK_FALSE(regime_backtest(FactorValues{z, 0, 0}, target_of(y), s).valid);
  s.min_periods = 4;
  CHECK(regime_backtest(FactorValues{z, 0, 0}, target_of(y), s).valid);
}

TEST_CASE("warm-up rows are not scored") {
  Grid y(10, 3);
  for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = std::cos(static_cast<double>(k * k));
  Grid z = y;
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 3; ++i) z(t, i) = kMissing;
  const auto r = regime_backtest(FactorValues{z, 3, 0}, target_of(y), loose());
  CHECK(r.coverage == 1.0);
  CHECK(r.n_periods == 7);
  CHECK(r.behavior.timestamps.front() == 103);
}

TEST_CASE("horizon must match the scenario") {
  Grid y(10, 3, 1.0);
  auto t = target_of(y);
  t.horizon = 2;
  CHECK_THROWS_AS(regime_backtest(FactorValues{y, 0, 0}, t, loose()), InputError);
}

TEST_CASE("single-asset mode uses time-series correlations") {
  Grid y(40, 1);
  for (std::size_t t = 0; t < 40; ++t) y(t, 0) = std::sin(0.7 * static_cast<double>(t));
  Grid z(40, 1);
  for (std::size_t t = 0; t < 40; ++t) z(t, 0) = 2.0 * y(t, 0) + 1.0;
  auto s = loose(UniverseMode::single_asset);
  s.primary_metric = PrimaryMetric::diracc;
  s.quality_threshold = 0.5;
  const auto r = regime_backtest(FactorValues{z, 0, 0}, target_of(y), s);
  CHECK(r.executable);
  CHECK(*r.ic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.behavior.mode == BehaviorProfile::Mode::timing);
  CHECK(r.primary_metric_value == r.diracc);
}

TEST_CASE("behavior correlation") {
  BehaviorProfile a;
  a.mode = BehaviorProfile::Mode::timing;
  a.width = 1;
  for (int t = 0; t < 40; ++t) {
    a.timestamps.push_back(t);
    a.vector.push_back(std::sin(static_cast<double>(t)));
  }
  BehaviorProfile b = a;
  for (double& v : b.vector) v = -3.0 * v;
  CHECK(*behavior_correlation(a, a) == doctest::Approx(1.0));
  CHECK(*behavior_correlation(a, b) == doctest::Approx(-1.0));
  BehaviorProfile shifted = a;
  for (auto& t : shifted.timestamps) t += 20;
  CHECK_FALSE(behavior_correlation(a, shifted));
  CHECK(behavior_correlation(a, shifted, 20));
  BehaviorProfile other = a;
  other.mode = BehaviorProfile::Mode::ranking;
  CHECK_FALSE(behavior_correlation(a, other));
}

TEST_CASE("planted factor is recovered on the synthetic panel") {
  const auto panel = make_synthetic_panel(SynthConfig{});
  const auto y = future_returns(panel, 1);
  const auto z = evaluate_expr(parse(planted_expression("volume")), panel, default_scenario());
  const auto r = regime_backtest(z, y, default_scenario());
  CHECK(r.valid);
  CHECK(*r.rankic > 0.3);
}

TEST_CASE("report json") {
  const auto panel = make_synthetic_panel(SynthConfig{});
  const auto y = future_returns(panel, 1);
  const auto r = backtest_on_window(parse("ts_mean(close,5)"), panel, y, default_scenario(),
                                    {panel.timestamps()[100], panel.timestamps()[300]});
  const auto j = to_json(r);
  CHECK(j.at("valid").get<bool>() == r.valid);
  CHECK(behavior_from_json(to_json(r.behavior)) == r.behavior);
  const auto bad = backtest_on_window(parse("volume"), MarketPanel::make({1, 2}, {"A"}, {{"close", Grid(2, 1, 1.0)}}),
                                      ReturnTarget{1, {1, 2}, Grid(2, 1, 0.0)}, default_scenario(), {1, 2});
  CHECK_FALSE(bad.executable);
  CHECK_FALSE(bad.failure.empty());
}
