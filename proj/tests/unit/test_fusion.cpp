#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "alphamine/fusion.hpp"
#include "alphamine/synth.hpp"
#include "support/reports.hpp"

using namespace alphamine;

namespace {

struct Data {
  MarketPanel panel;
  ReturnTarget target;
  TimeWindow validation;
  TimeWindow test;
  explicit Data(std::vector<SynthConfig::Planted> planted = {{"volume", 0.1}}) {
    SynthConfig cfg;
    cfg.planted = std::move(planted);
    panel = make_synthetic_panel(cfg);
    target = future_returns(panel, 1);
    const auto& ts = panel.timestamps();
    validation = {ts[30], ts[249]};
    test = {ts[250], ts[498]};
  }
};

}  // namespace

TEST_CASE("greedy decorrelation hand trace") {
  const double c[3][3] = {{1, 0.9, 0.1}, {0.9, 1, 0.5}, {0.1, 0.5, 1}};
  auto corr = [&](std::size_t i, std::size_t j) -> std::optional<double> { return c[i][j]; };
  CHECK(greedy_decorrelate(3, corr, 0.7, 10) == std::vector<std::size_t>{0, 2});
  CHECK(greedy_decorrelate(3, corr, 1.0, 2) == std::vector<std::size_t>{0, 1});
  CHECK(greedy_decorrelate(3, corr, 0.7, 1) == std::vector<std::size_t>{0});
  auto undefined = [](std::size_t, std::size_t) -> std::optional<double> { return std::nullopt; };
  CHECK(greedy_decorrelate(3, undefined, 0.0, 10) == std::vector<std::size_t>{0, 1, 2});
  auto negative = [](std::size_t, std::size_t) -> std::optional<double> { return -0.95; };
  CHECK(greedy_decorrelate(3, negative, 0.7, 10) == std::vector<std::size_t>{0});
}

TEST_CASE("select_from ranks by validation metric") {
  const auto s = default_scenario();
  std::vector<SelectedFactor> rescored;
  const double q[3] = {0.2, 0.5, 0.3};
  for (int k = 0; k < 3; ++k) {
    SelectedFactor f;
    f.record.expression = "f" + std::to_string(k);
    f.validation = fixtures::valid_report(q[k], fixtures::ramp_behavior(40, 3, 2.0 * k));
    rescored.push_back(f);
  }
  FusionConfig cfg;
  cfg.top_k = 2;
  cfg.corr_threshold = 1.0;
  const auto picked = select_from(rescored, cfg, s);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].record.expression == "f1");
  CHECK(picked[1].record.expression == "f2");

  rescored[0].validation.primary_metric_value.reset();
  cfg.top_k = 10;
  CHECK(select_from(rescored, cfg, s).size() == 2);
  CHECK(select_from({rescored[1]}, cfg, s).size() == 1);
}

TEST_CASE("config checks") {
  FusionConfig cfg;
  cfg.validation_window = {0, 10};
  cfg.test_window = {11, 20};
  CHECK_NOTHROW(cfg.check());
  cfg.test_window = {5, 20};
  CHECK_THROWS_AS(cfg.check(), InputError);
  cfg.test_window = {11, 20};
  cfg.corr_threshold = 1.5;
  CHECK_THROWS_AS(cfg.check(), InputError);
  cfg.corr_threshold = 0.5;
  cfg.top_k = 0;
  CHECK_THROWS_AS(cfg.check(), InputError);
}

TEST_CASE("single member fuses to its standardized values") {
  Data d;
  const auto s = default_scenario();
  Archive archive;
  const auto e = parse("log(volume)");
  archive.try_insert(e, backtest_on_window(e, d.panel, d.target, s, d.validation), s);
  const auto records = archive.records();
  const auto fused = fuse(std::span<const ArchiveRecord>(records), d.panel, d.test, s, d.validation);
  const auto direct = evaluate_on_window(parse("zscore(log(volume))"), d.panel, d.target, s, d.test);
  REQUIRE(fused.values.rows() == direct.values.values.rows());
  for (std::size_t t = fused.first_row; t < fused.values.rows(); ++t) {
    for (std::size_t i = 0; i < fused.values.cols(); ++i) {
      CHECK(fused.values(t, i) == doctest::Approx(direct.values.values(t, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("two identical members fuse to either one") {
  Data d;
  const auto s = default_scenario();
  Archive archive;
  for (const char* text : {"log(volume)", "mul(log(volume),2)"}) {
    const auto e = parse(text);
    REQUIRE(archive.try_insert(e, backtest_on_window(e, d.panel, d.target, s, d.validation), s).inserted);
  }
  const auto records = archive.records();
  const auto both = fuse(std::span<const ArchiveRecord>(records), d.panel, d.test, s, d.validation);
  const auto one = fuse(std::span<const ArchiveRecord>(records.data(), 1), d.panel, d.test, s, d.validation);
  for (std::size_t k = 0; k < both.values.size(); ++k) {
    const double a = both.values.data()[k], b = one.values.data()[k];
    CHECK(std::isnan(a) == std::isnan(b));
    if (!std::isnan(a)) CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("fused target identity and antisymmetry") {
  Data d;
  const auto s = default_scenario();
  const auto& ts = d.panel.timestamps();
  FusedSignal f;
  f.timestamps.assign(ts.begin() + 250, ts.begin() + 499);
  const auto aligned = align(d.target, f.timestamps);
  f.values = aligned.values;
  CHECK(*evaluate_fused(f, d.target, s).rankic == doctest::Approx(1.0));
  for (double& v : f.values.data()) v = -v;
  CHECK(*evaluate_fused(f, d.target, s).rankic == doctest::Approx(-1.0));
}

TEST_CASE("complementary planted factors fuse at least as well") {
  Data d({{"volume", 0.1}, {"range", 0.1}});
  const auto s = default_scenario();
  Archive archive;
  for (const char* text : {"zscore(log(volume))", "zscore(div(sub(high,low),close))", "log(volume)",
                           "ts_mean(return,5)"}) {
    const auto e = parse(text);
    archive.try_insert(e, backtest_on_window(e, d.panel, d.target, s, d.validation), s);
  }
  FusionConfig cfg;
  cfg.top_k = 2;
  cfg.corr_threshold = 0.7;
  cfg.validation_window = d.validation;
  cfg.test_window = d.test;
  const auto picked = select(archive, cfg, d.panel, d.target, s);
  REQUIRE(picked.size() == 2);
  double best = -1;
  for (const auto& p : picked) {
    best = std::max(best, *backtest_on_window(parse(p.record.expression), d.panel, d.target, s, d.test).rankic);
  }
  const auto fused = evaluate_fused(fuse(std::span<const SelectedFactor>(picked), d.panel, d.test, s, d.validation),
                                    d.target, s);
  CHECK(*fused.rankic >= best - 0.01);

  const auto rescored = rescore(archive, d.validation, d.panel, d.target, s);
  const std::vector<std::size_t> ks{1, 2, 3, 10};
  const auto points = sweep_top_k(rescored, cfg, ks, d.panel, d.target, s);
  REQUIRE(points.size() == 4);
  FusionConfig wide = cfg;
  wide.top_k = 10;
  CHECK(points[3].members == select_from(rescored, wide, s).size());
  CHECK(points[0].members == 1);
  std::ostringstream out;
  write_sweep_csv(out, points);
  const std::string csv = out.str();
  CHECK(csv.rfind("k_or_threshold,rankic,ic,icir,diracc\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
