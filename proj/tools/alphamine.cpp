// alphamine: command-line driver for the factor mining pipeline.
//
//   alphamine synth  --out data/
//   alphamine eval   --data data/panel.csv --expr "ts_mean(close,5)"
//   alphamine seed   --data ... --seeds seeds.txt --out run/
//   alphamine tasks  --pool run/seed_pool.txt --range a:b --window-length 120 --stride 60 --out run/
//   alphamine mine   --data ... --tasks run/tasks.jsonl --rounds 50 --out run/
//   alphamine fuse   --data ... --archive run/archive.jsonl --validation-window a:b --test-window c:d --out run/
//   alphamine report --archive run/archive.jsonl --out run/
//
// Exit codes: 0 ok, 1 I/O, 2 bad input, 3 generator failure. Errors are one
// JSON object on a single stderr line.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "alphamine/archive.hpp"
#include "alphamine/backtest.hpp"
#include "alphamine/errors.hpp"
#include "alphamine/eval_engine.hpp"
#include "alphamine/fusion.hpp"
#include "alphamine/generator.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/mining_loop.hpp"
#include "alphamine/scenario.hpp"
#include "alphamine/seeding.hpp"
#include "alphamine/synth.hpp"
#include "alphamine/task.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace alphamine;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Reads --config files as JSON. Top-level keys set shared options; an object
/// under a subcommand's name sets that subcommand's options. Keys may use
/// snake_case or kebab-case.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string kebab(std::string key) {
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    return key;
  }

  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void collect(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = kebab(key);
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

struct Shared {
  std::string config;
  std::string data;
  std::string scenario;
  std::string archive;
  std::uint64_t seed_rng = 0;
  int threads = 0;
  std::string out = "out";
};

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string cell(const std::optional<double>& v) { return v ? shortest(*v) : std::string(); }

class Run {
 public:
  Run(const Shared& shared, std::string command) : shared_(shared), command_(std::move(command)) {
    manifest_ = {{"tool", "alphamine"},
                 {"version", kVersion},
                 {"command", command_},
                 {"config", shared.config.empty() ? json(nullptr) : json(shared.config)},
                 {"seed_rng", shared.seed_rng},
                 {"threads", shared.threads},
                 {"inputs", json::object()},
                 {"parameters", json::object()},
                 {"artifacts", json::array()}};
  }

  void input(const std::string& key, const std::string& path) {
    if (!path.empty()) manifest_["inputs"][key] = path;
  }
  template <typename T>
  void parameter(const std::string& key, const T& value) {
    manifest_["parameters"][key] = value;
  }
  void scenario(const Scenario& s) { manifest_["scenario"] = json(s); }

  fs::path out_dir() const {
    fs::path dir(shared_.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
  }

  fs::path artifact(const std::string& name) {
    fs::path p = out_dir() / name;
    manifest_["artifacts"].push_back(p.string());
    return p;
  }

  void write_manifest() {
    const fs::path p = out_dir() / ("manifest." + command_ + ".json");
    std::ofstream out(p, std::ios::trunc);
    out << manifest_.dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest '" + p.string() + "'");
  }

 private:
  const Shared& shared_;
  std::string command_;
  json manifest_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

void check_written(std::ostream& out, const fs::path& p) {
  out.flush();
  if (!out) throw IoError("write failure on '" + p.string() + "'");
}

MarketPanel require_panel(const Shared& s) {
  if (s.data.empty()) throw InputError("--data is required");
  return load_panel(s.data);
}

Scenario scenario_of(const Shared& s) {
  return s.scenario.empty() ? default_scenario() : load_scenario(s.scenario);
}

TimeWindow whole(const MarketPanel& panel) {
  if (panel.periods() == 0) throw InputError("panel is empty");
  return {panel.timestamps().front(), panel.timestamps().back()};
}

std::unique_ptr<CandidateGenerator> make_generator(const std::string& command, std::int64_t timeout_ms) {
  if (command.empty() || command == "builtin") return std::make_unique<BuiltinGenerator>();
  return std::make_unique<ProcessGenerator>(command, std::chrono::milliseconds(timeout_ms));
}

json strip_behavior(json report) {
  report.erase("behavior");
  return report;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t assets = 20;
  std::size_t periods = 500;
  double noise = 0.1;
  std::vector<std::string> planted{"volume:0.1"};
  std::int64_t start_time = 1'700'000'000;
  std::int64_t step = 3600;
};

int cmd_synth(const Shared& s, const SynthArgs& a, bool seed_given) {
  SynthConfig cfg;
  cfg.assets = a.assets;
  cfg.periods = a.periods;
  cfg.noise = a.noise;
  if (seed_given) cfg.seed = s.seed_rng;
  cfg.start_time = a.start_time;
  cfg.step_seconds = a.step;
  cfg.planted.clear();
  for (const auto& p : a.planted) {
    const auto colon = p.find(':');
    double weight = 0.1;
    if (colon != std::string::npos) {
      const std::string w = p.substr(colon + 1);
      const auto res = std::from_chars(w.data(), w.data() + w.size(), weight);
      if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw InputError("bad planted weight '" + p + "'");
    }
    cfg.planted.push_back({p.substr(0, colon), weight});
  }

  Run run(s, "synth");
  run.parameter("assets", cfg.assets);
  run.parameter("periods", cfg.periods);
  run.parameter("noise", cfg.noise);
  run.parameter("seed", cfg.seed);
  run.parameter("planted", a.planted);
  run.parameter("start_time", cfg.start_time);
  run.parameter("step_seconds", cfg.step_seconds);
  const MarketPanel panel = make_synthetic_panel(cfg);
  write_panel(run.artifact("panel.csv"), panel);
  json planted = json::object();
  for (const auto& p : cfg.planted) planted[p.name] = planted_expression(p.name);
  const fs::path info = run.artifact("planted.json");
  auto out = open_out(info);
  out << planted.dump(2) << '\n';
  check_written(out, info);
  run.write_manifest();
  return 0;
}

int cmd_eval(const Shared& s, const std::string& expr_text, const std::string& window_text, bool write_manifest) {
  const MarketPanel panel = require_panel(s);
  const Scenario scenario = scenario_of(s);
  const TimeWindow window = window_text.empty() ? whole(panel) : parse_window(window_text);
  const FactorExpr expr = parse_valid(expr_text, scenario);
  const ReturnTarget target = future_returns(panel, scenario.horizon);
  const WindowedFactor wf = evaluate_on_window(expr, panel, target, scenario, window);
  const BacktestReport report = regime_backtest(wf.values, wf.target, scenario);

  json j = to_json(report);
  j["expression"] = print(expr);
  j["window"] = format_window(window);
  std::cout << j.dump() << '\n';

  if (write_manifest) {
    Run run(s, "eval");
    run.input("data", s.data);
    run.input("scenario", s.scenario);
    run.parameter("expr", expr_text);
    run.parameter("window", format_window(window));
    run.scenario(scenario);
    const fs::path p = run.artifact("eval_report.json");
    auto out = open_out(p);
    out << j.dump(2) << '\n';
    check_written(out, p);
    run.write_manifest();
  }
  return 0;
}

struct SeedArgs {
  std::string seeds;
  std::size_t generate = 0;
  std::string generator;
  std::int64_t timeout_ms = 60000;
  std::string scoring_window;
  std::size_t k = 16;
};

int cmd_seed(const Shared& s, const SeedArgs& a) {
  const MarketPanel panel = require_panel(s);
  const Scenario scenario = scenario_of(s);
  const TimeWindow window = a.scoring_window.empty() ? whole(panel) : parse_window(a.scoring_window);
  const ReturnTarget target = future_returns(panel, scenario.horizon);

  Run run(s, "seed");
  run.input("data", s.data);
  run.input("scenario", s.scenario);
  run.input("seeds", a.seeds);
  run.parameter("generate", a.generate);
  run.parameter("generator", a.generator.empty() ? "builtin" : a.generator);
  run.parameter("scoring_window", format_window(window));
  run.parameter("k", a.k);
  run.scenario(scenario);

  std::vector<SeedCandidate> raw;
  if (!a.seeds.empty()) raw = read_seed_file(a.seeds);
  RawSeedBatch batch;
  if (a.generate > 0) {
    auto gen = make_generator(a.generator, a.timeout_ms);
    batch = generate_raw_seeds(*gen, scenario, a.generate, s.seed_rng);
    for (auto& c : batch.candidates) raw.push_back(std::move(c));
  }
  if (raw.empty()) throw InputError("no seed candidates: pass --seeds and/or --generate");

  const SeedPool pool = build_seed_pool(raw, scenario, panel, target, window, a.k);
  const fs::path pool_path = run.artifact("seed_pool.txt");
  auto out = open_out(pool_path);
  out << "# raw=" << pool.counts.raw << " valid=" << pool.counts.valid << " scored=" << pool.counts.scored
      << " selected=" << pool.counts.selected << '\n';
  for (const auto& seed : pool.seeds) out << print(seed.expr) << "  # q=" << shortest(seed.score) << '\n';
  check_written(out, pool_path);

  const fs::path rej_path = run.artifact("seed_rejects.jsonl");
  auto rej = open_out(rej_path);
  for (const auto& r : batch.rejects) rej << json{{"text", r.text}, {"reason", r.reason}}.dump() << '\n';
  check_written(rej, rej_path);
  run.write_manifest();
  return 0;
}

struct TasksArgs {
  std::string pool;
  std::vector<std::string> windows;
  std::string range;
  std::size_t window_length = 0;
  std::size_t stride = 0;
};

int cmd_tasks(const Shared& s, const TasksArgs& a) {
  const Scenario scenario = scenario_of(s);
  Run run(s, "tasks");
  run.input("pool", a.pool);
  run.input("scenario", s.scenario);
  run.scenario(scenario);

  std::vector<FactorExpr> pool;
  for (const auto& c : read_seed_file(a.pool)) pool.push_back(canonicalize(parse_valid(c.text, scenario)));

  std::vector<TimeWindow> windows;
  for (const auto& w : a.windows) windows.push_back(parse_window(w));
  if (!a.range.empty()) {
    if (a.window_length == 0 || a.stride == 0) throw InputError("--range needs --window-length and --stride");
    const MarketPanel panel = require_panel(s);
    run.input("data", s.data);
    for (const auto& w : make_windows(panel.timestamps(), parse_window(a.range), a.window_length, a.stride)) {
      windows.push_back(w);
    }
    run.parameter("range", a.range);
    run.parameter("window_length", a.window_length);
    run.parameter("stride", a.stride);
  }
  json ws = json::array();
  for (const auto& w : windows) ws.push_back(format_window(w));
  run.parameter("windows", ws);

  const auto tasks = build_task_bank(pool, scenario, windows);
  const fs::path p = run.artifact("tasks.jsonl");
  auto out = open_out(p);
  for (const auto& t : tasks) out << to_json(t).dump() << '\n';
  check_written(out, p);
  run.write_manifest();
  return 0;
}

std::vector<MiningTask> read_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open task bank '" + path + "'");
  std::vector<MiningTask> tasks;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      tasks.push_back(task_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(number, e.what());
    } catch (const InputError& e) {
      throw FormatError(number, e.what());
    }
  }
  return tasks;
}

struct MineArgs {
  std::string tasks;
  std::size_t rounds = 1;
  std::size_t group_size = 8;
  std::string generator;
  std::int64_t timeout_ms = 60000;
};

int cmd_mine(const Shared& s, const MineArgs& a) {
  const MarketPanel panel = require_panel(s);
  const auto tasks = read_tasks(a.tasks);
  if (tasks.empty()) throw InputError("task bank '" + a.tasks + "' is empty");
  const int horizon = tasks.front().scenario.horizon;
  for (const auto& t : tasks) {
    if (t.scenario.horizon != horizon) throw InputError("tasks disagree on the return horizon");
  }
  const ReturnTarget target = future_returns(panel, horizon);

  Run run(s, "mine");
  run.input("data", s.data);
  run.input("tasks", a.tasks);
  run.input("archive", s.archive);
  run.parameter("rounds", a.rounds);
  run.parameter("group_size", a.group_size);
  run.parameter("generator", a.generator.empty() ? "builtin" : a.generator);

  Archive archive = s.archive.empty() ? Archive() : Archive::load(s.archive);
  const fs::path archive_path = run.artifact("archive.jsonl");
  if (!s.archive.empty() && fs::exists(archive_path) && fs::equivalent(archive_path, s.archive)) {
    throw InputError("--archive must differ from the output archive path");
  }
  archive.persist(archive_path);
  archive.attach_log(archive_path);

  auto gen = make_generator(a.generator, a.timeout_ms);
  JsonlRecordSink sink(run.artifact("training.jsonl"));
  const CampaignSummary summary =
      run_campaign(tasks, *gen, panel, target, archive, {a.rounds, a.group_size, s.seed_rng}, sink);

  const fs::path csv = run.artifact("summary.csv");
  auto out = open_out(csv);
  summary.write_csv(out);
  check_written(out, csv);
  run.write_manifest();
  return 0;
}

struct FuseArgs {
  std::string validation_window;
  std::string test_window;
  std::size_t top_k = 10;
  double corr_threshold = 0.7;
  std::vector<std::size_t> sweep_k{3, 5, 10, 20, 25, 30};
  std::vector<double> sweep_threshold{0.3, 0.5, 0.7, 0.9, 1.0};
};

int cmd_fuse(const Shared& s, const FuseArgs& a) {
  if (s.archive.empty()) throw InputError("--archive is required");
  const MarketPanel panel = require_panel(s);
  const Scenario scenario = scenario_of(s);
  const Archive archive = Archive::load(s.archive);
  if (archive.empty()) throw InputError("archive '" + s.archive + "' is empty");
  const ReturnTarget target = future_returns(panel, scenario.horizon);

  FusionConfig cfg;
  cfg.top_k = a.top_k;
  cfg.corr_threshold = a.corr_threshold;
  cfg.validation_window = parse_window(a.validation_window);
  cfg.test_window = parse_window(a.test_window);
  cfg.check();

  Run run(s, "fuse");
  run.input("data", s.data);
  run.input("scenario", s.scenario);
  run.input("archive", s.archive);
  run.parameter("top_k", cfg.top_k);
  run.parameter("corr_threshold", cfg.corr_threshold);
  run.parameter("validation_window", a.validation_window);
  run.parameter("test_window", a.test_window);
  run.parameter("sweep_k", a.sweep_k);
  run.parameter("sweep_threshold", a.sweep_threshold);
  run.scenario(scenario);

  const auto rescored = rescore(archive, cfg.validation_window, panel, target, scenario);
  const auto selected = select_from(rescored, cfg, scenario);
  json result;
  json members = json::array();
  for (const auto& m : selected) {
    const BacktestReport test = backtest_on_window(parse(m.record.expression), panel, target, scenario, cfg.test_window);
    members.push_back({{"expression", m.record.expression},
                       {"exact_hash", m.record.exact_hash.hex()},
                       {"validation", strip_behavior(to_json(m.validation))},
                       {"test", strip_behavior(to_json(test))}});
  }
  result["selected"] = std::move(members);
  if (!selected.empty()) {
    const FusedSignal signal = fuse(std::span<const SelectedFactor>(selected), panel, cfg.test_window, scenario,
                                    cfg.validation_window);
    json fused = to_json(signal, evaluate_fused(signal, target, scenario));
    fused["report"] = strip_behavior(fused["report"]);
    result["fused"] = std::move(fused);
  }
  const fs::path report_path = run.artifact("fusion.json");
  auto out = open_out(report_path);
  out << result.dump(2) << '\n';
  check_written(out, report_path);

  const auto by_k = sweep_top_k(rescored, cfg, a.sweep_k, panel, target, scenario);
  const fs::path k_path = run.artifact("sweep_top_k.csv");
  auto k_out = open_out(k_path);
  write_sweep_csv(k_out, by_k);
  check_written(k_out, k_path);

  const auto by_th = sweep_threshold(rescored, cfg, a.sweep_threshold, panel, target, scenario);
  const fs::path th_path = run.artifact("sweep_threshold.csv");
  auto th_out = open_out(th_path);
  write_sweep_csv(th_out, by_th);
  check_written(th_out, th_path);
  run.write_manifest();
  return 0;
}

int cmd_report(const Shared& s) {
  if (s.archive.empty()) throw InputError("--archive is required");
  const Archive archive = Archive::load(s.archive);
  Run run(s, "report");
  run.input("archive", s.archive);

  const fs::path factors = run.artifact("factors.csv");
  auto out = open_out(factors);
  out << "inserted_at,round,task_id,family_hash,rankic,ic,icir,diracc,coverage,n_periods,expression\n";
  for (const auto& r : archive.records()) {
    out << r.inserted_at << ',' << r.round << ',' << r.task_id << ',' << r.family_hash.hex().substr(0, 16) << ','
        << cell(r.report.rankic) << ',' << cell(r.report.ic) << ',' << cell(r.report.icir) << ','
        << cell(r.report.diracc) << ',' << shortest(r.report.coverage) << ',' << r.report.n_periods << ",\""
        << r.expression << "\"\n";
  }
  check_written(out, factors);

  const fs::path families = run.artifact("families.csv");
  auto fam = open_out(families);
  fam << "family_hash,count,best_primary_metric\n";
  for (const auto& [hash, stats] : archive.family_stats()) {
    fam << hash.hex().substr(0, 16) << ',' << stats.count << ',' << shortest(stats.best_primary_metric) << '\n';
  }
  check_written(fam, families);

  // Cumulative archive growth by round, for growth curves.
  const fs::path growth = run.artifact("growth.csv");
  auto gr = open_out(growth);
  gr << "round,archive_size,distinct_families\n";
  std::map<std::int64_t, std::pair<std::size_t, std::set<Digest>>> by_round;
  std::size_t size = 0;
  std::set<Digest> seen;
  auto records = archive.records();
  std::stable_sort(records.begin(), records.end(), [](const auto& x, const auto& y) { return x.round < y.round; });
  for (const auto& r : records) {
    ++size;
    seen.insert(r.family_hash);
    by_round[r.round] = {size, seen};
  }
  for (const auto& [round, state] : by_round) gr << round << ',' << state.first << ',' << state.second.size() << '\n';
  check_written(gr, growth);
  run.write_manifest();
  return 0;
}

void report_error(int code, const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formulaic alpha factor mining engine", "alphamine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.config_formatter(std::make_shared<JsonConfig>());
  Shared shared;
  auto* config_opt = app.set_config("--config", "", "JSON file with option values; command-line flags win");
  app.add_option("--data", shared.data, "Market panel CSV");
  app.add_option("--scenario", shared.scenario, "Scenario JSON");
  app.add_option("--archive", shared.archive, "Archive JSONL");
  auto* seed_opt = app.add_option("--seed-rng", shared.seed_rng, "RNG seed");
  app.add_option("--threads", shared.threads, "Maximum worker threads (0 = OpenMP default)");
  app.add_option("--out", shared.out, "Output directory")->capture_default_str();

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  SynthArgs synth;
  auto* synth_cmd = sub("synth", "Write a synthetic panel with planted factors");
  synth_cmd->add_option("--assets", synth.assets)->capture_default_str();
  synth_cmd->add_option("--periods", synth.periods)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise)->capture_default_str();
  synth_cmd->add_option("--planted", synth.planted, "name:weight, name in {volume, range}")->capture_default_str();
  synth_cmd->add_option("--start-time", synth.start_time)->capture_default_str();
  synth_cmd->add_option("--step", synth.step)->capture_default_str();

  std::string expr_text, eval_window;
  auto* eval_cmd = sub("eval", "Backtest one expression and print the report as JSON");
  eval_cmd->add_option("--expr", expr_text, "Factor expression")->required();
  eval_cmd->add_option("--window", eval_window, "start:end (default: whole panel)");

  SeedArgs seed;
  auto* seed_cmd = sub("seed", "Build the seed pool");
  seed_cmd->add_option("--seeds", seed.seeds, "Seed file, one expression per line");
  seed_cmd->add_option("--generate", seed.generate, "Also ask the generator for this many candidates");
  seed_cmd->add_option("--generator", seed.generator, "Generator command (default: builtin)");
  seed_cmd->add_option("--timeout-ms", seed.timeout_ms)->capture_default_str();
  seed_cmd->add_option("--scoring-window", seed.scoring_window, "start:end (default: whole panel)");
  seed_cmd->add_option("--k", seed.k, "Pool size")->capture_default_str();

  TasksArgs tasks;
  auto* tasks_cmd = sub("tasks", "Expand a seed pool into a task bank");
  tasks_cmd->add_option("--pool", tasks.pool, "Seed pool file")->required();
  tasks_cmd->add_option("--window", tasks.windows, "start:end (repeatable)");
  tasks_cmd->add_option("--range", tasks.range, "start:end range to tile with windows");
  tasks_cmd->add_option("--window-length", tasks.window_length, "Window length in periods");
  tasks_cmd->add_option("--stride", tasks.stride, "Window stride in periods");

  MineArgs mine;
  auto* mine_cmd = sub("mine", "Run mining rounds over a task bank");
  mine_cmd->add_option("--tasks", mine.tasks, "Task bank JSONL")->required();
  mine_cmd->add_option("--rounds", mine.rounds)->capture_default_str();
  mine_cmd->add_option("--group-size", mine.group_size)->capture_default_str();
  mine_cmd->add_option("--generator", mine.generator, "Generator command (default: builtin)");
  mine_cmd->add_option("--timeout-ms", mine.timeout_ms)->capture_default_str();

  FuseArgs fuse_args;
  auto* fuse_cmd = sub("fuse", "Select, decorrelate and fuse archived factors");
  fuse_cmd->add_option("--validation-window", fuse_args.validation_window)->required();
  fuse_cmd->add_option("--test-window", fuse_args.test_window)->required();
  fuse_cmd->add_option("--top-k", fuse_args.top_k)->capture_default_str();
  fuse_cmd->add_option("--corr-threshold", fuse_args.corr_threshold)->capture_default_str();
  fuse_cmd->add_option("--sweep-k", fuse_args.sweep_k)->capture_default_str();
  fuse_cmd->add_option("--sweep-threshold", fuse_args.sweep_threshold)->capture_default_str();

  auto* report_cmd = sub("report", "Export archive contents as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(2, "input", e.what());
    return 2;
  }

  if (config_opt->count() > 0) shared.config = config_opt->as<std::string>();
  if (shared.threads > 0) omp_set_num_threads(shared.threads);

  try {
    if (*synth_cmd) return cmd_synth(shared, synth, seed_opt->count() > 0);
    if (*eval_cmd) return cmd_eval(shared, expr_text, eval_window, app.get_option("--out")->count() > 0);
    if (*seed_cmd) return cmd_seed(shared, seed);
    if (*tasks_cmd) return cmd_tasks(shared, tasks);
    if (*mine_cmd) return cmd_mine(shared, mine);
    if (*fuse_cmd) return cmd_fuse(shared, fuse_args);
    if (*report_cmd) return cmd_report(shared);
  } catch (const Error& e) {
    const int code = static_cast<int>(e.kind());
    const char* kind = e.kind() == ErrorKind::io ? "io" : e.kind() == ErrorKind::generator ? "generator" : "input";
    report_error(code, kind, e.what());
    return code;
  } catch (const json::exception& e) {
    report_error(2, "input", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(1, "io", e.what());
    return 1;
  }
  return 0;
}
