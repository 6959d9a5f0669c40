#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphamine/dsl.hpp"
#include "alphamine/scenario.hpp"
#include "alphamine/task.hpp"

namespace alphamine {

struct TrainingRecord {
  std::string task_id;
  std::int64_t round = 0;
  std::size_t group_index = 0;
  std::string expression;
  double reward = 0.0;
  double advantage = 0.0;
  bool valid = false;

  bool operator==(const TrainingRecord&) const = default;
};

nlohmann::json to_json(const TrainingRecord& r);
TrainingRecord training_record_from_json(const nlohmann::json& j);

/// Source of candidate expressions (the policy being trained lives behind it).
class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;

  // K candidate texts for the task. Throws GeneratorError when unreachable.
  virtual std::vector<std::string> generate(const MiningTask& task, std::size_t group_size,
                                            std::uint64_t rng_seed) = 0;

  // Raw seed proposals for a scenario, before any filtering.
  virtual std::vector<std::string> propose_seeds(const Scenario& scenario, std::size_t count,
                                                 std::uint64_t rng_seed) = 0;

  // Feedback after a group has been rewarded.
  virtual void observe(const MiningTask& /*task*/, std::span<const TrainingRecord> /*records*/) {}

  virtual std::string describe() const = 0;
};

// Small deterministic helpers (std distributions are implementation-defined).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// `group_size` texts, each produced by 1-2 random edits of `base` (window
/// perturbation, same-class operator swap, subtree wrap, variable swap).
/// Every output validates under the scenario; edits that fail validation fall
/// back to re-emitting `base`.
std::vector<std::string> builtin_mutate(const FactorExpr& base, const Scenario& scenario,
                                        std::size_t group_size, std::uint64_t rng_seed);
std::vector<std::string> builtin_mutate(const MiningTask& task, std::size_t group_size, std::uint64_t rng_seed);

// Random valid expression of depth <= max_depth.
FactorExpr random_expression(const Scenario& scenario, std::mt19937_64& rng, std::size_t max_depth = 4);

/// LLM-free stand-in for the policy. Mutates a per-task incumbent (initially
/// the task seed) and, on observe(), adopts the best valid candidate of the
/// group when it beats the incumbent's reward.
class BuiltinGenerator final : public CandidateGenerator {
 public:
  std::vector<std::string> generate(const MiningTask& task, std::size_t group_size,
                                    std::uint64_t rng_seed) override;
  std::vector<std::string> propose_seeds(const Scenario& scenario, std::size_t count,
                                         std::uint64_t rng_seed) override;
  void observe(const MiningTask& task, std::span<const TrainingRecord> records) override;
  std::string describe() const override { return "builtin"; }

 private:
  struct Incumbent {
    FactorExpr expr;
    double reward;
  };
  std::map<std::string, Incumbent> incumbents_;
};

/// Child process speaking line-delimited JSON on stdin/stdout.
///   -> {"type":"generate","task_id":..,"scenario":{..},"seed":"..","window":{..},"group_size":K,"rng_seed":n}
///   <- {"type":"candidates","task_id":..,"expressions":[..]}
///   -> {"type":"refine","raw_scenario":".."}
///   <- {"type":"scenario",...}
class ProcessGenerator final : public CandidateGenerator {
 public:
  explicit ProcessGenerator(std::string command,
                            std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ProcessGenerator() override;
  ProcessGenerator(const ProcessGenerator&) = delete;
  ProcessGenerator& operator=(const ProcessGenerator&) = delete;

  std::vector<std::string> generate(const MiningTask& task, std::size_t group_size,
                                    std::uint64_t rng_seed) override;
  std::vector<std::string> propose_seeds(const Scenario& scenario, std::size_t count,
                                         std::uint64_t rng_seed) override;
  // Delegated scenario refinement; the reply's "scenario" object is parsed.
  Scenario refine(const std::string& raw_scenario);
  std::string describe() const override { return "child-process '" + command_ + "'"; }

 private:
  nlohmann::json request(const nlohmann::json& message);
  void start();
  void stop() noexcept;

  std::string command_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

}  // namespace alphamine
