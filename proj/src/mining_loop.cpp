#include "alphamine/mining_loop.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>

#include "alphamine/backtest.hpp"
#include "alphamine/dico_reward.hpp"
#include "alphamine/errors.hpp"
#include "alphamine/kernels.hpp"

namespace alphamine {

std::vector<double> grpo_advantages(std::span<const double> rewards) {
  std::vector<double> out(rewards.size(), 0.0);
  if (rewards.size() < 2) return out;
  const double m = kernels::mean(rewards);
  const double sd = kernels::population_std(rewards);
  if (!(sd > kAdvantageEpsilon)) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - m) / sd;
  return out;
}

namespace {

struct Evaluated {
  std::optional<FactorExpr> expr;
  std::optional<Signature> sig;
  BacktestReport report;
};

Evaluated evaluate_candidate(const std::string& text, const MiningTask& task, const Scenario& scenario,
                             const MarketPanel& panel, const ReturnTarget& target) {
  Evaluated ev;
  try {
    ev.expr = parse_valid(text, scenario);
  } catch (const InputError& e) {
    ev.report = BacktestReport::not_executable(e.what());
    return ev;
  }
  ev.sig = signature(*ev.expr);
  ev.report = backtest_on_window(*ev.expr, panel, target, scenario, task.window);
  return ev;
}

}  // namespace

std::vector<TrainingRecord> run_round(const MiningTask& task, CandidateGenerator& generator, const MarketPanel& panel,
                                      const ReturnTarget& target, Archive& archive, std::size_t group_size,
                                      std::uint64_t rng_seed, std::int64_t round) {
  std::vector<std::string> texts = generator.generate(task, group_size, rng_seed);
  texts.resize(group_size);

  Scenario scenario = task.scenario;
  scenario.primary_metric = task.objective;

  const std::size_t k = texts.size();
  std::vector<Evaluated> evaluated(k);
  std::vector<RewardBreakdown> rewards(k);
  // Rewards read the archive as it stands before any insertion of this group.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(k); ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    evaluated[i] = evaluate_candidate(texts[i], task, scenario, panel, target);
    rewards[i] = dico_reward(evaluated[i].sig, evaluated[i].report, archive, scenario);
  }

  std::vector<double> totals(k);
  for (std::size_t i = 0; i < k; ++i) totals[i] = rewards[i].total;
  const std::vector<double> advantages = grpo_advantages(totals);

  std::vector<TrainingRecord> records(k);
  for (std::size_t i = 0; i < k; ++i) {
    records[i] = TrainingRecord{task.task_id, round,         i, texts[i], totals[i], advantages[i],
                                evaluated[i].report.valid};
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (evaluated[i].expr && evaluated[i].report.valid) {
      archive.try_insert(*evaluated[i].expr, evaluated[i].report, scenario, task.task_id, round);
    }
  }
  generator.observe(task, records);
  return records;
}

JsonlRecordSink::JsonlRecordSink(const std::filesystem::path& path) : file_(path, std::ios::trunc), out_(&file_) {
  if (!file_) throw IoError("cannot open record sink '" + path.string() + "'");
}

JsonlRecordSink::JsonlRecordSink(std::ostream& out) : out_(&out) {}

void JsonlRecordSink::write(const TrainingRecord& record) {
  *out_ << to_json(record).dump() << '\n';
  out_->flush();
  if (!*out_) throw IoError("failed to write training record");
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void CampaignSummary::write_csv(std::ostream& out) const {
  out << "round,candidates,mean_reward,top_decile_reward,valid_fraction,archive_size,distinct_families\n";
  for (const auto& r : rounds) {
    out << r.round << ',' << r.candidates << ',' << shortest(r.mean_reward) << ',' << shortest(r.top_decile_reward)
        << ',' << shortest(r.valid_fraction) << ',' << r.archive_size << ',' << r.distinct_families << '\n';
  }
}

CampaignSummary run_campaign(std::span<const MiningTask> tasks, CandidateGenerator& generator,
                             const MarketPanel& panel, const ReturnTarget& target, Archive& archive,
                             const CampaignConfig& config, RecordSink& sink) {
  CampaignSummary summary;
  if (config.rounds == 0) return summary;
  if (tasks.empty()) throw InputError("campaign needs at least one task");
  if (config.group_size == 0) throw InputError("group size must be >= 1");

  std::uint64_t step = 0;
  for (std::size_t r = 0; r < config.rounds; ++r) {
    std::vector<double> rewards;
    std::size_t valid = 0;
    for (const auto& task : tasks) {
      const auto records = run_round(task, generator, panel, target, archive, config.group_size,
                                     mix_seed(config.rng_seed, step++), static_cast<std::int64_t>(r));
      summary.execution_order.push_back(task.task_id);
      for (const auto& rec : records) {
        sink.write(rec);
        rewards.push_back(rec.reward);
        valid += rec.valid ? 1 : 0;
      }
    }
    RoundSummary rs;
    rs.round = static_cast<std::int64_t>(r);
    rs.candidates = rewards.size();
    rs.mean_reward = kernels::mean(rewards);
    rs.valid_fraction = static_cast<double>(valid) / static_cast<double>(rewards.size());
    std::sort(rewards.begin(), rewards.end(), std::greater<>());
    const std::size_t top = std::max<std::size_t>(1, (rewards.size() + 9) / 10);
    rs.top_decile_reward = kernels::mean(std::span<const double>(rewards.data(), top));
    rs.archive_size = archive.size();
    rs.distinct_families = archive.distinct_families();
    summary.rounds.push_back(rs);
  }
  return summary;
}

}  // namespace alphamine
