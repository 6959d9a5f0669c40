#include "alphamine/task.hpp"

#include "alphamine/errors.hpp"

namespace alphamine {

nlohmann::json to_json(const TimeWindow& w) { return {{"start", w.start}, {"end", w.end}}; }

TimeWindow window_from_json(const nlohmann::json& j) {
  try {
    TimeWindow w{j.at("start").get<std::int64_t>(), j.at("end").get<std::int64_t>()};
    if (w.end < w.start) throw InputError("window end precedes start");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad window: ") + e.what());
  }
}

nlohmann::json to_json(const MiningTask& task) {
  nlohmann::json scenario = task.scenario;
  return {{"task_id", task.task_id},
          {"seed", print(task.seed)},
          {"scenario", scenario},
          {"window", to_json(task.window)},
          {"objective", to_string(task.objective)}};
}

MiningTask task_from_json(const nlohmann::json& j) {
  try {
    MiningTask task;
    task.task_id = j.at("task_id").get<std::string>();
    task.scenario = scenario_from_json(j.at("scenario"));
    task.seed = parse_valid(j.at("seed").get<std::string>(), task.scenario);
    task.window = window_from_json(j.at("window"));
    task.objective = parse_primary_metric(j.value("objective", to_string(task.scenario.primary_metric)));
    return task;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad task: ") + e.what());
  }
}

}  // namespace alphamine
