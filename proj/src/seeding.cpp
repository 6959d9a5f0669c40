#include "alphamine/seeding.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "alphamine/backtest.hpp"
#include "alphamine/errors.hpp"

namespace alphamine {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string describe_counts(const SeedPoolCounts& c) {
  return "empty seed pool: raw=" + std::to_string(c.raw) + " valid=" + std::to_string(c.valid) +
         " scored=" + std::to_string(c.scored) + " selected=" + std::to_string(c.selected);
}

}  // namespace

EmptySeedPoolError::EmptySeedPoolError(const SeedPoolCounts& counts)
    : InputError(describe_counts(counts)), counts_(counts) {}

std::vector<SeedCandidate> read_seed_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open seed file '" + path.string() + "'");
  std::vector<SeedCandidate> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(std::move(line));
    if (!line.empty()) out.push_back({line, SeedCandidate::Source::file, std::nullopt});
  }
  return out;
}

std::vector<ScoredSeed> select_seeds(std::vector<ScoredSeed> scored, double tau_q, std::size_t k) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredSeed& a, const ScoredSeed& b) { return a.score > b.score; });
  std::vector<ScoredSeed> out;
  std::set<Digest> seen;
  for (auto& s : scored) {
    if (out.size() >= k || s.score < tau_q) break;
    if (!seen.insert(s.signature.exact_hash).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

SeedPool build_seed_pool(const std::vector<SeedCandidate>& raw, const Scenario& scenario, const MarketPanel& panel,
                         const ReturnTarget& target, const TimeWindow& scoring_window, std::size_t k) {
  if (k == 0) throw InputError("seed pool size must be >= 1");
  SeedPool pool;
  pool.counts.raw = raw.size();

  std::vector<FactorExpr> valid;
  for (const auto& c : raw) {
    try {
      valid.push_back(canonicalize(parse_valid(c.text, scenario)));
    } catch (const InputError&) {
    }
  }
  pool.counts.valid = valid.size();

  std::vector<std::optional<double>> scores(valid.size());
  const auto n = static_cast<std::ptrdiff_t>(valid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto report = backtest_on_window(valid[static_cast<std::size_t>(idx)], panel, target, scenario, scoring_window);
    if (report.valid) scores[static_cast<std::size_t>(idx)] = report.primary_metric_value;
  }

  std::vector<ScoredSeed> scored;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (scores[i]) scored.push_back({valid[i], signature(valid[i]), *scores[i]});
  }
  pool.counts.scored = scored.size();
  pool.seeds = select_seeds(std::move(scored), scenario.quality_threshold, k);
  pool.counts.selected = pool.seeds.size();
  if (pool.seeds.empty()) throw EmptySeedPoolError(pool.counts);
  return pool;
}

std::string task_id_for(const Signature& sig, const TimeWindow& window) {
  return Digest::of(sig.exact_hash.hex() + "@" + format_window(window)).hex().substr(0, 16);
}

std::vector<MiningTask> build_task_bank(const std::vector<FactorExpr>& pool, const Scenario& scenario,
                                        const std::vector<TimeWindow>& windows) {
  if (pool.empty()) throw InputError("task bank needs a non-empty seed pool");
  if (windows.empty()) throw InputError("task bank needs at least one window");
  for (std::size_t a = 0; a < windows.size(); ++a) {
    for (std::size_t b = a + 1; b < windows.size(); ++b) {
      if (windows[a] == windows[b]) throw InputError("duplicate window " + format_window(windows[a]));
    }
  }
  std::vector<MiningTask> tasks;
  tasks.reserve(pool.size() * windows.size());
  for (const auto& seed : pool) {
    validate(seed, scenario);
    const Signature sig = signature(seed);
    for (const auto& w : windows) {
      tasks.push_back({task_id_for(sig, w), seed, scenario, w, scenario.primary_metric});
    }
  }
  return tasks;
}

RawSeedBatch generate_raw_seeds(CandidateGenerator& generator, const Scenario& scenario, std::size_t m,
                                std::uint64_t rng_seed) {
  RawSeedBatch batch;
  for (auto& text : generator.propose_seeds(scenario, m, rng_seed)) {
    try {
      parse(text);
      batch.candidates.push_back({std::move(text), SeedCandidate::Source::generator, std::nullopt});
    } catch (const ParseError& e) {
      batch.rejects.push_back({std::move(text), e.what()});
    }
  }
  return batch;
}

}  // namespace alphamine
