#include "alphamine/scenario.hpp"

#include <algorithm>
#include <fstream>

#include "alphamine/dsl.hpp"
#include "alphamine/errors.hpp"

namespace alphamine {

using nlohmann::json;

std::string to_string(UniverseMode mode) {
  return mode == UniverseMode::single_asset ? "single_asset" : "cross_sectional";
}

std::string to_string(PrimaryMetric metric) {
  switch (metric) {
    case PrimaryMetric::diracc: return "diracc";
    case PrimaryMetric::ic: return "ic";
    case PrimaryMetric::rankic: return "rankic";
  }
  return "rankic";
}

UniverseMode parse_universe_mode(const std::string& text) {
  if (text == "single_asset") return UniverseMode::single_asset;
  if (text == "cross_sectional") return UniverseMode::cross_sectional;
  throw InputError("unknown universe_mode '" + text + "'");
}

PrimaryMetric parse_primary_metric(const std::string& text) {
  if (text == "diracc") return PrimaryMetric::diracc;
  if (text == "ic") return PrimaryMetric::ic;
  if (text == "rankic") return PrimaryMetric::rankic;
  throw InputError("unknown primary_metric '" + text + "'");
}

void Scenario::check() const {
  if (allowed_variables.empty()) throw InputError("scenario '" + name + "': allowed_variables is empty");
  if (allowed_operators.empty()) throw InputError("scenario '" + name + "': allowed_operators is empty");
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) throw InputError("min_coverage must lie in [0, 1]");
  if (horizon < 1) throw InputError("horizon must be positive");
  if (d_max < 1 || w_max < 1) throw InputError("d_max and w_max must be positive");
  if (!(reward.r_min < reward.r_max)) throw InputError("reward.r_min must be below reward.r_max");
  if (reward.r_invalid < reward.r_min || reward.r_invalid > reward.r_max) {
    throw InputError("reward.r_invalid must lie in [r_min, r_max]");
  }
  if (reward.tau_corr < 0.0 || reward.tau_corr > 1.0 || reward.tau_low < 0.0 || reward.tau_low > 1.0) {
    throw InputError("reward.tau_corr and reward.tau_low must lie in [0, 1]");
  }
  if (reward.k_fam < 1) throw InputError("reward.k_fam must be positive");
  for (double l : {reward.lambda_exact, reward.lambda_new, reward.lambda_fam, reward.lambda_low, reward.lambda_corr}) {
    if (l < 0.0) throw InputError("reward weights must be non-negative");
  }
  for (const auto& v : allowed_variables) {
    const auto& known = known_variables();
    if (std::find(known.begin(), known.end(), v) == known.end()) throw InputError("unknown variable '" + v + "'");
  }
  for (const auto& op : allowed_operators) {
    if (find_operator(op) == nullptr) throw InputError("unknown operator '" + op + "'");
  }
}

Scenario default_scenario(UniverseMode mode) {
  Scenario s;
  s.universe_mode = mode;
  s.name = mode == UniverseMode::single_asset ? "single_asset_default" : "cross_sectional_default";
  s.primary_metric = mode == UniverseMode::single_asset ? PrimaryMetric::diracc : PrimaryMetric::rankic;
  for (const auto& v : known_variables()) s.allowed_variables.insert(v);
  for (const auto& op : operators()) {
    if (mode == UniverseMode::single_asset && op.op_class == OpClass::cross_sectional) continue;
    s.allowed_operators.emplace(op.name);
  }
  if (mode == UniverseMode::single_asset) s.quality_threshold = 0.5;
  return s;
}

void to_json(json& j, const RewardParams& p) {
  j = json{{"lambda_exact", p.lambda_exact}, {"lambda_new", p.lambda_new}, {"lambda_fam", p.lambda_fam},
           {"lambda_low", p.lambda_low},     {"lambda_corr", p.lambda_corr}, {"tau_corr", p.tau_corr},
           {"tau_low", p.tau_low},           {"k_fam", p.k_fam},            {"r_min", p.r_min},
           {"r_max", p.r_max},               {"r_invalid", p.r_invalid}};
  if (p.tau_new) j["tau_new"] = *p.tau_new;
}

void from_json(const json& j, RewardParams& p) {
  p.lambda_exact = j.value("lambda_exact", p.lambda_exact);
  p.lambda_new = j.value("lambda_new", p.lambda_new);
  p.lambda_fam = j.value("lambda_fam", p.lambda_fam);
  p.lambda_low = j.value("lambda_low", p.lambda_low);
  p.lambda_corr = j.value("lambda_corr", p.lambda_corr);
  p.tau_corr = j.value("tau_corr", p.tau_corr);
  p.tau_low = j.value("tau_low", p.tau_low);
  p.k_fam = j.value("k_fam", p.k_fam);
  if (j.contains("tau_new") && !j["tau_new"].is_null()) p.tau_new = j["tau_new"].get<double>();
  p.r_min = j.value("r_min", p.r_min);
  p.r_max = j.value("r_max", p.r_max);
  p.r_invalid = j.value("r_invalid", p.r_invalid);
}

void to_json(json& j, const Scenario& s) {
  j = json{{"name", s.name},
           {"universe_mode", to_string(s.universe_mode)},
           {"primary_metric", to_string(s.primary_metric)},
           {"horizon", s.horizon},
           {"allowed_variables", s.allowed_variables},
           {"allowed_operators", s.allowed_operators},
           {"d_max", s.d_max},
           {"w_max", s.w_max},
           {"min_coverage", s.min_coverage},
           {"quality_threshold", s.quality_threshold},
           {"min_periods", s.min_periods},
           {"min_assets", s.min_assets},
           {"min_overlap", s.min_overlap},
           {"elite_size", s.elite_size},
           {"reward", s.reward}};
}

void from_json(const json& j, Scenario& s) {
  const UniverseMode mode =
      j.contains("universe_mode") ? parse_universe_mode(j.at("universe_mode").get<std::string>()) : s.universe_mode;
  s = default_scenario(mode);
  s.name = j.value("name", s.name);
  if (j.contains("primary_metric")) s.primary_metric = parse_primary_metric(j.at("primary_metric").get<std::string>());
  s.horizon = j.value("horizon", s.horizon);
  if (j.contains("allowed_variables")) s.allowed_variables = j.at("allowed_variables").get<std::set<std::string>>();
  if (j.contains("allowed_operators")) s.allowed_operators = j.at("allowed_operators").get<std::set<std::string>>();
  s.d_max = j.value("d_max", s.d_max);
  s.w_max = j.value("w_max", s.w_max);
  s.min_coverage = j.value("min_coverage", s.min_coverage);
  s.quality_threshold = j.value("quality_threshold", s.quality_threshold);
  s.min_periods = j.value("min_periods", s.min_periods);
  s.min_assets = j.value("min_assets", s.min_assets);
  s.min_overlap = j.value("min_overlap", s.min_overlap);
  s.elite_size = j.value("elite_size", s.elite_size);
  if (j.contains("reward")) s.reward = j.at("reward").get<RewardParams>();
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw InputError("scenario must be a JSON object");
  Scenario s;
  try {
    s = j.get<Scenario>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
  s.check();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("scenario '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace alphamine
