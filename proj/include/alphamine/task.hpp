#pragma once

#include <string>

#include <json.hpp>

#include "alphamine/dsl.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

/// One seeded mining task: improve `seed` under `scenario` on `window`.
struct MiningTask {
  std::string task_id;
  FactorExpr seed;
  Scenario scenario;
  TimeWindow window;
  PrimaryMetric objective = PrimaryMetric::rankic;
};

nlohmann::json to_json(const MiningTask& task);
// Reparses and revalidates the seed. Throws InputError.
MiningTask task_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TimeWindow& w);
TimeWindow window_from_json(const nlohmann::json& j);

}  // namespace alphamine
