#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kTool = ALPHAMINE_CLI_PATH;
const std::int64_t kStart = 1'700'000'000;

std::string at(int period) { return std::to_string(kStart + 3600LL * period); }
std::string window(int a, int b) { return at(a) + ":" + at(b); }

int run(const std::string& args, const fs::path& log) {
  const int status = std::system((kTool + " " + args + " >" + log.string() + " 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("alphamine_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Full pipeline into `dir`; returns the first failing step's exit code or 0.
int pipeline(const fs::path& dir) {
  const auto log = dir / "log.txt";
  const std::string out = " --out " + dir.string();
  const std::string data = " --data " + (dir / "panel.csv").string();
  if (int rc = run("synth --periods 300 --assets 12" + out, log)) return rc;
  if (int rc = run("seed --seeds " + std::string(ALPHAMINE_CONFIGS_DIR) + "/seeds.txt --k 4 --scoring-window " +
                       window(0, 149) + data + out,
                   log))
    return rc;
  if (int rc = run("tasks --pool " + (dir / "seed_pool.txt").string() + " --window " + window(20, 149) +
                       data + out,
                   log))
    return rc;
  if (int rc = run("mine --tasks " + (dir / "tasks.jsonl").string() + " --rounds 3 --group-size 4" + data + out,
                   log))
    return rc;
  if (int rc = run("fuse --archive " + (dir / "archive.jsonl").string() + " --validation-window " +
                       window(20, 149) + " --test-window " + window(150, 298) + " --top-k 3" + data + out,
                   log))
    return rc;
  return run("report --archive " + (dir / "archive.jsonl").string() + out, log);
}

}  // namespace

TEST_CASE("eval reports on a synthetic panel") {
  const auto dir = fresh_dir("eval");
  REQUIRE(run("synth --out " + dir.string(), dir / "synth.log") == 0);
  REQUIRE(run("eval --expr 'rank(ts_mean(return,5))' --data " + (dir / "panel.csv").string(), dir / "eval.log") ==
          0);
  const auto report = nlohmann::json::parse(slurp(dir / "eval.log"));
  CHECK(report.contains("rankic"));
  CHECK(report["rankic"].is_number());
  CHECK(report["valid"].get<bool>());
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("exit");
  REQUIRE(run("synth --periods 50 --out " + dir.string(), dir / "synth.log") == 0);
  const std::string data = " --data " + (dir / "panel.csv").string();
  CHECK(run("eval --expr 'ts_mean(close'" + data, dir / "e1.log") == 2);
  const auto err = nlohmann::json::parse(slurp(dir / "e1.log"));
  CHECK(err["error"]["code"] == 2);
  CHECK(run("eval --expr 'ts_mean(close,0)'" + data, dir / "e2.log") == 2);
  CHECK(run("eval --expr close --data " + (dir / "nope.csv").string(), dir / "e3.log") == 1);
  CHECK(run("eval --expr close --bogus-flag" + data, dir / "e4.log") == 2);
  CHECK(run("mine --tasks x.jsonl --generator 'exec /nonexistent' --timeout-ms 200" + data, dir / "e5.log") != 0);
}

TEST_CASE("zero rounds writes an empty training file and a manifest") {
  const auto dir = fresh_dir("zero");
  const auto log = dir / "log.txt";
  REQUIRE(run("synth --periods 120 --out " + dir.string(), log) == 0);
  const std::string data = " --data " + (dir / "panel.csv").string() + " --out " + dir.string();
  REQUIRE(run("seed --seeds " + std::string(ALPHAMINE_CONFIGS_DIR) + "/seeds.txt --k 2" + data, log) == 0);
  REQUIRE(run("tasks --pool " + (dir / "seed_pool.txt").string() + " --window " + window(30, 110) + data, log) == 0);
  REQUIRE(run("mine --rounds 0 --tasks " + (dir / "tasks.jsonl").string() + data, log) == 0);
  CHECK(fs::exists(dir / "training.jsonl"));
  CHECK(fs::file_size(dir / "training.jsonl") == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.mine.json"));
  CHECK(manifest["command"] == "mine");
}

TEST_CASE("reruns produce byte-identical artifacts") {
  const auto a = fresh_dir("rerun_a");
  const auto b = fresh_dir("rerun_b");
  REQUIRE(pipeline(a) == 0);
  REQUIRE(pipeline(b) == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "log.txt") continue;
    std::string lhs = slurp(entry.path()), rhs = slurp(b / name);
    if (name.string().rfind("manifest.", 0) == 0) {
      // Manifests record the output directory.
      auto ja = nlohmann::json::parse(lhs), jb = nlohmann::json::parse(rhs);
      for (auto* j : {&ja, &jb}) {
        j->erase("config");
        j->erase("inputs");
        j->erase("artifacts");
      }
      lhs = ja.dump();
      rhs = jb.dump();
    }
    CHECK_MESSAGE(lhs == rhs, name.string());
    ++compared;
  }
  CHECK(compared >= 10);
  for (const char* f : {"archive.jsonl", "training.jsonl", "summary.csv", "fusion.json", "sweep_top_k.csv",
                        "sweep_threshold.csv", "factors.csv", "families.csv", "growth.csv"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
}

TEST_CASE("json config file supplies options") {
  const auto dir = fresh_dir("config");
  const auto cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << nlohmann::json{{"out", dir.string()}, {"synth", {{"assets", 6}, {"periods", 40}}}}.dump();
  }
  REQUIRE(run("synth --config " + cfg.string(), dir / "log.txt") == 0);
  const auto text = slurp(dir / "panel.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 6 * 40);
}
