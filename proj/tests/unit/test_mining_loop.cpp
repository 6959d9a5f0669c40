#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "alphamine/mining_loop.hpp"
#include "alphamine/seeding.hpp"
#include "alphamine/synth.hpp"

using namespace alphamine;

namespace {

// Replays a fixed list of texts.
class FixedGenerator final : public CandidateGenerator {
 public:
  explicit FixedGenerator(std::vector<std::string> texts) : texts_(std::move(texts)) {}
  std::vector<std::string> generate(const MiningTask&, std::size_t, std::uint64_t) override { return texts_; }
  std::vector<std::string> propose_seeds(const Scenario&, std::size_t, std::uint64_t) override { return texts_; }
  std::string describe() const override { return "fixed"; }

 private:
  std::vector<std::string> texts_;
};

class BrokenGenerator final : public CandidateGenerator {
 public:
  std::vector<std::string> generate(const MiningTask&, std::size_t, std::uint64_t) override {
    throw GeneratorError("generator broken unreachable");
  }
  std::vector<std::string> propose_seeds(const Scenario&, std::size_t, std::uint64_t) override { return {}; }
  std::string describe() const override { return "broken"; }
};

struct Setup {
  MarketPanel panel = make_synthetic_panel(SynthConfig{});
  ReturnTarget target = future_returns(panel, 1);
  std::vector<MiningTask> tasks;
  Setup() {
    const auto& ts = panel.timestamps();
    tasks = build_task_bank({parse("ts_mean(close,5)"), parse("log(volume)")}, default_scenario(),
                            {{ts[40], ts[240]}});
  }
};

}  // namespace

TEST_CASE("grpo advantages") {
  const std::vector<double> r{1, 2, 3};
  const auto a = grpo_advantages(r);
  CHECK(a[0] == doctest::Approx(-1.224744871).epsilon(1e-9));
  CHECK(a[1] == 0.0);
  CHECK(a[2] == doctest::Approx(1.224744871).epsilon(1e-9));
  CHECK(grpo_advantages(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(grpo_advantages(std::vector<double>{7}) == std::vector<double>{0});
  CHECK(grpo_advantages(std::vector<double>{}).empty());

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int g = 0; g < 200; ++g) {
    std::vector<double> rewards(2 + g % 15);
    for (double& x : rewards) x = u(rng);
    const auto adv = grpo_advantages(rewards);
    double m = 0, v = 0;
    for (double x : adv) m += x;
    m /= static_cast<double>(adv.size());
    for (double x : adv) v += (x - m) * (x - m);
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v / static_cast<double>(adv.size())) - 1.0) < 1e-6);
  }
}

TEST_CASE("round with an unparseable candidate") {
  Setup s;
  Archive archive;
  FixedGenerator gen({"rank(volume)", "ts_mean(close", "ts_std(close,5)", "zscore(log(volume))"});
  const auto records = run_round(s.tasks[0], gen, s.panel, s.target, archive, 4, 1);
  REQUIRE(records.size() == 4);
  CHECK_FALSE(records[1].valid);
  CHECK(records[1].reward == -1.0);
  double sum = 0;
  for (const auto& r : records) sum += r.advantage;
  CHECK(std::abs(sum) < 1e-9);
  CHECK(records[3].expression == "zscore(log(volume))");
  CHECK(records[0].group_index == 0);
  CHECK(records[3].group_index == 3);
  CHECK(archive.size() >= 1);
}

TEST_CASE("identical candidates in one group") {
  Setup s;
  Archive archive;
  FixedGenerator gen(std::vector<std::string>(4, "zscore(log(volume))"));
  const auto records = run_round(s.tasks[0], gen, s.panel, s.target, archive, 4, 1);
  for (const auto& r : records) {
    CHECK(r.reward == records[0].reward);
    CHECK(r.advantage == 0.0);
  }
  CHECK(archive.size() == 1);
}

TEST_CASE("short generator output is padded") {
  Setup s;
  Archive archive;
  FixedGenerator gen({"rank(volume)"});
  const auto records = run_round(s.tasks[0], gen, s.panel, s.target, archive, 3, 1);
  REQUIRE(records.size() == 3);
  CHECK_FALSE(records[2].valid);
}

TEST_CASE("generator failure leaves the archive untouched") {
  Setup s;
  Archive archive;
  BrokenGenerator gen;
  CHECK_THROWS_AS(run_round(s.tasks[0], gen, s.panel, s.target, archive, 4, 1), GeneratorError);
  CHECK(archive.empty());
}

TEST_CASE("rounds are deterministic") {
  Setup s;
  Archive a, b;
  BuiltinGenerator ga, gb;
  CHECK(run_round(s.tasks[0], ga, s.panel, s.target, a, 8, 42) ==
        run_round(s.tasks[0], gb, s.panel, s.target, b, 8, 42));
  CHECK(a.records() == b.records());
}

TEST_CASE("campaign schedule") {
  Setup s;
  Archive archive;
  BuiltinGenerator gen;
  MemoryRecordSink sink;
  CampaignConfig cfg;
  cfg.rounds = 3;
  cfg.group_size = 4;
  const auto summary = run_campaign(s.tasks, gen, s.panel, s.target, archive, cfg, sink);
  const std::vector<std::string> expected{s.tasks[0].task_id, s.tasks[1].task_id, s.tasks[0].task_id,
                                          s.tasks[1].task_id, s.tasks[0].task_id, s.tasks[1].task_id};
  CHECK(summary.execution_order == expected);
  CHECK(summary.rounds.size() == 3);
  CHECK(sink.records.size() == 24);
  CHECK(summary.rounds.back().archive_size == archive.size());

  std::ostringstream csv;
  summary.write_csv(csv);
  CHECK(csv.str().rfind("round,candidates,mean_reward,top_decile_reward,valid_fraction,archive_size,"
                        "distinct_families\n",
                        0) == 0);
}

TEST_CASE("zero rounds is a no-op") {
  Setup s;
  Archive archive;
  BuiltinGenerator gen;
  MemoryRecordSink sink;
  CampaignConfig cfg;
  cfg.rounds = 0;
  const auto summary = run_campaign(s.tasks, gen, s.panel, s.target, archive, cfg, sink);
  CHECK(summary.rounds.empty());
  CHECK(sink.records.empty());
  CHECK(archive.empty());
}
