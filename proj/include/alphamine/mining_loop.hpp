#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "alphamine/archive.hpp"
#include "alphamine/generator.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/task.hpp"

namespace alphamine {

inline constexpr double kAdvantageEpsilon = 1e-9;

// (r - mean) / population std within the group; zeros when std <= 1e-9.
std::vector<double> grpo_advantages(std::span<const double> rewards);

/// Sample K candidates, evaluate and reward each against the archive as it
/// was before the round, compute group advantages, then insert the keepers.
/// Records come back in generation order. A generator failure aborts the
/// round before the archive is touched.
std::vector<TrainingRecord> run_round(const MiningTask& task, CandidateGenerator& generator,
                                      const MarketPanel& panel, const ReturnTarget& target, Archive& archive,
                                      std::size_t group_size, std::uint64_t rng_seed, std::int64_t round = 0);

class RecordSink {
 public:
  virtual ~RecordSink() = default;
  // Throws IoError on failure.
  virtual void write(const TrainingRecord& record) = 0;
};

class JsonlRecordSink final : public RecordSink {
 public:
  explicit JsonlRecordSink(const std::filesystem::path& path);
  explicit JsonlRecordSink(std::ostream& out);
  void write(const TrainingRecord& record) override;

 private:
  std::ofstream file_;
  std::ostream* out_;
};

class MemoryRecordSink final : public RecordSink {
 public:
  void write(const TrainingRecord& record) override { records.push_back(record); }
  std::vector<TrainingRecord> records;
};

struct RoundSummary {
  std::int64_t round = 0;
  std::size_t candidates = 0;
  double mean_reward = 0.0;
  double top_decile_reward = 0.0;  // mean of the best 10% of the round's rewards
  double valid_fraction = 0.0;
  std::size_t archive_size = 0;
  std::size_t distinct_families = 0;
};

struct CampaignSummary {
  std::vector<RoundSummary> rounds;
  std::vector<std::string> execution_order;  // task ids

  void write_csv(std::ostream& out) const;
};

struct CampaignConfig {
  std::size_t rounds = 1;
  std::size_t group_size = 8;
  std::uint64_t rng_seed = 0;
};

/// `rounds` round-robin passes over `tasks`.
CampaignSummary run_campaign(std::span<const MiningTask> tasks, CandidateGenerator& generator,
                             const MarketPanel& panel, const ReturnTarget& target, Archive& archive,
                             const CampaignConfig& config, RecordSink& sink);

}  // namespace alphamine
