#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

namespace alphamine {

enum class UniverseMode { single_asset, cross_sectional };
enum class PrimaryMetric { diracc, ic, rankic };

std::string to_string(UniverseMode mode);
std::string to_string(PrimaryMetric metric);
UniverseMode parse_universe_mode(const std::string& text);
PrimaryMetric parse_primary_metric(const std::string& text);

/// Shaping weights and clip range of the diversity-complementarity reward.
struct RewardParams {
  double lambda_exact = 0.05;
  double lambda_new = 0.02;
  double lambda_fam = 0.02;
  double lambda_low = 0.02;
  double lambda_corr = 0.1;
  double tau_corr = 0.8;
  double tau_low = 0.3;
  std::size_t k_fam = 5;
  std::optional<double> tau_new;  // unset: the scenario's quality threshold
  double r_min = -1.0;
  double r_max = 2.0;
  double r_invalid = -1.0;
};

/// Structured description of one mining setting: universe, objective, the
/// admissible slice of the factor language, and evaluation thresholds.
struct Scenario {
  std::string name = "default";
  UniverseMode universe_mode = UniverseMode::cross_sectional;
  PrimaryMetric primary_metric = PrimaryMetric::rankic;
  int horizon = 1;
  std::set<std::string> allowed_variables;
  std::set<std::string> allowed_operators;
  std::size_t d_max = 8;
  std::size_t w_max = 30;
  double min_coverage = 0.5;
  double quality_threshold = 0.02;
  std::size_t min_periods = 20;  // periods needed for a valid report
  std::size_t min_assets = 3;    // assets needed for a cross-sectional IC_t
  std::size_t min_overlap = 30;  // entries needed to correlate two behavior profiles
  std::size_t elite_size = 32;
  RewardParams reward;

  double tau_new() const { return reward.tau_new.value_or(quality_threshold); }

  // Throws InputError when an invariant does not hold.
  void check() const;
};

// Every variable and operator permitted, cross-sectional RankIC objective.
Scenario default_scenario(UniverseMode mode = UniverseMode::cross_sectional);

void to_json(nlohmann::json& j, const RewardParams& p);
void from_json(const nlohmann::json& j, RewardParams& p);
void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

// Missing fields take the defaults above; the result is check()ed.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace alphamine
