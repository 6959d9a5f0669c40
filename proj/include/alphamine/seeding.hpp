#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alphamine/dsl.hpp"
#include "alphamine/generator.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"
#include "alphamine/task.hpp"

namespace alphamine {

struct SeedCandidate {
  enum class Source { file, generator };

  std::string text;
  Source source = Source::file;
  std::optional<double> score;
};

// One expression per line; blank lines and '#' comments skipped.
std::vector<SeedCandidate> read_seed_file(const std::filesystem::path& path);

struct ScoredSeed {
  FactorExpr expr;  // canonical
  Signature signature;
  double score = 0.0;
};

struct SeedPoolCounts {
  std::size_t raw = 0;
  std::size_t valid = 0;
  std::size_t scored = 0;
  std::size_t selected = 0;
};

class EmptySeedPoolError : public InputError {
 public:
  explicit EmptySeedPoolError(const SeedPoolCounts& counts);
  const SeedPoolCounts& counts() const noexcept { return counts_; }

 private:
  SeedPoolCounts counts_;
};

struct SeedPool {
  std::vector<ScoredSeed> seeds;
  SeedPoolCounts counts;
};

/// Greedy pass over candidates sorted by score (stable, descending): keep
/// those with score >= tau_q and an unseen exact hash, up to k.
std::vector<ScoredSeed> select_seeds(std::vector<ScoredSeed> scored, double tau_q, std::size_t k);

/// Validate, score on `scoring_window`, then select_seeds(). Throws
/// EmptySeedPoolError when nothing survives.
SeedPool build_seed_pool(const std::vector<SeedCandidate>& raw, const Scenario& scenario,
                         const MarketPanel& panel, const ReturnTarget& target,
                         const TimeWindow& scoring_window, std::size_t k = 16);

/// Cartesian product pool x windows, pool-major.
std::vector<MiningTask> build_task_bank(const std::vector<FactorExpr>& pool, const Scenario& scenario,
                                        const std::vector<TimeWindow>& windows);

std::string task_id_for(const Signature& sig, const TimeWindow& window);

struct RawSeedBatch {
  std::vector<SeedCandidate> candidates;
  struct Reject {
    std::string text;
    std::string reason;
  };
  std::vector<Reject> rejects;
};

// Up to m parseable candidates from the generator; unparseable ones are
// recorded as rejects. GeneratorError propagates.
RawSeedBatch generate_raw_seeds(CandidateGenerator& generator, const Scenario& scenario, std::size_t m,
                                std::uint64_t rng_seed);

}  // namespace alphamine
