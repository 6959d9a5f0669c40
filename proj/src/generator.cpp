#include "alphamine/generator.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <limits>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "alphamine/errors.hpp"

namespace alphamine {

nlohmann::json to_json(const TrainingRecord& r) {
  return {{"task_id", r.task_id},       {"round", r.round},   {"group_index", r.group_index},
          {"expression", r.expression}, {"reward", r.reward}, {"advantage", r.advantage},
          {"valid", r.valid}};
}

TrainingRecord training_record_from_json(const nlohmann::json& j) {
  try {
    TrainingRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.round = j.at("round").get<std::int64_t>();
    r.group_index = j.at("group_index").get<std::size_t>();
    r.expression = j.at("expression").get<std::string>();
    r.reward = j.at("reward").get<double>();
    r.advantage = j.at("advantage").get<double>();
    r.valid = j.at("valid").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad training record: ") + e.what());
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

namespace {

using Path = std::vector<std::size_t>;

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[uniform_index(rng, items.size())];
}

Expr& at(Expr& root, const Path& path) {
  Expr* node = &root;
  for (std::size_t k : path) node = &node->args[k];
  return *node;
}

// Paths to every node satisfying `pred`, in pre-order.
template <typename Pred>
void collect(const Expr& e, Path& path, std::vector<Path>& out, Pred pred) {
  if (pred(e)) out.push_back(path);
  for (std::size_t k = 0; k < e.args.size(); ++k) {
    path.push_back(k);
    collect(e.args[k], path, out, pred);
    path.pop_back();
  }
}

template <typename Pred>
std::vector<Path> paths_where(const Expr& e, Pred pred) {
  std::vector<Path> out;
  Path path;
  collect(e, path, out, pred);
  return out;
}

bool is_windowed_call(const Expr& e) {
  if (e.kind != Expr::Kind::call) return false;
  const OperatorInfo* op = find_operator(e.name);
  return op != nullptr && op->windowed && !e.args.empty() && e.args.back().kind == Expr::Kind::int_literal;
}

const std::vector<std::vector<std::string>>& swap_classes() {
  static const std::vector<std::vector<std::string>> classes{
      {"add", "sub", "mul", "div"},
      {"neg", "abs", "log", "sign"},
      {"ts_mean", "ts_std", "ts_min", "ts_max", "ts_sum", "ts_delta", "ts_rank", "delay"},
      {"rank", "zscore"},
  };
  return classes;
}

bool usable(const std::string& op, const Scenario& scenario) {
  const OperatorInfo* info = find_operator(op);
  if (info == nullptr || scenario.allowed_operators.count(op) == 0) return false;
  return !(info->op_class == OpClass::cross_sectional && scenario.universe_mode == UniverseMode::single_asset);
}

std::vector<std::string> usable_ops(const Scenario& scenario, OpClass cls, std::size_t arity, bool windowed) {
  std::vector<std::string> out;
  for (const auto& op : operators()) {
    if (op.op_class == cls && op.arity == arity && op.windowed == windowed && usable(std::string(op.name), scenario)) {
      out.emplace_back(op.name);
    }
  }
  return out;
}

std::vector<std::string> usable_variables(const Scenario& scenario) {
  std::vector<std::string> out;
  for (const auto& v : known_variables()) {
    if (scenario.allowed_variables.count(v) != 0) out.push_back(v);
  }
  return out;
}

std::int64_t random_window(std::mt19937_64& rng, const Scenario& scenario) {
  const std::size_t hi = std::min<std::size_t>(scenario.w_max, 20);
  return static_cast<std::int64_t>(2 + uniform_index(rng, hi > 1 ? hi - 1 : 1));
}

bool perturb_window(Expr& e, const Scenario& scenario, std::mt19937_64& rng) {
  const auto targets = paths_where(e, is_windowed_call);
  if (targets.empty()) return false;
  Expr& call = at(e, pick(rng, targets));
  const auto step = static_cast<std::int64_t>(1 + uniform_index(rng, 5));
  const std::int64_t delta = uniform_index(rng, 2) == 0 ? -step : step;
  const auto w_max = static_cast<std::int64_t>(scenario.w_max);
  std::int64_t& w = call.args.back().int_value;
  const std::int64_t next = std::clamp<std::int64_t>(w + delta, 1, w_max);
  if (next == w) return false;
  w = next;
  return true;
}

bool swap_operator(Expr& e, const Scenario& scenario, std::mt19937_64& rng) {
  const auto targets = paths_where(e, [](const Expr& n) { return n.kind == Expr::Kind::call; });
  if (targets.empty()) return false;
  Expr& call = at(e, pick(rng, targets));
  for (const auto& cls : swap_classes()) {
    if (std::find(cls.begin(), cls.end(), call.name) == cls.end()) continue;
    std::vector<std::string> options;
    for (const auto& op : cls) {
      if (op != call.name && usable(op, scenario)) options.push_back(op);
    }
    if (options.empty()) return false;
    call.name = pick(rng, options);
    return true;
  }
  return false;
}

bool wrap_subtree(Expr& e, const Scenario& scenario, std::mt19937_64& rng) {
  const auto targets = paths_where(e, [](const Expr& n) { return !n.is_literal(); });
  if (targets.empty()) return false;
  std::vector<std::string> wrappers = usable_ops(scenario, OpClass::elementwise, 1, false);
  for (const auto& op : usable_ops(scenario, OpClass::cross_sectional, 1, false)) wrappers.push_back(op);
  for (const auto& op : usable_ops(scenario, OpClass::time_series, 2, true)) wrappers.push_back(op);
  if (wrappers.empty()) return false;
  Expr& node = at(e, pick(rng, targets));
  const std::string op = pick(rng, wrappers);
  std::vector<Expr> args{std::move(node)};
  if (find_operator(op)->windowed) args.push_back(Expr::integer(random_window(rng, scenario)));
  node = Expr::call(op, std::move(args));
  return true;
}

bool substitute_variable(Expr& e, const Scenario& scenario, std::mt19937_64& rng) {
  const auto targets = paths_where(e, [](const Expr& n) { return n.kind == Expr::Kind::variable; });
  if (targets.empty()) return false;
  Expr& leaf = at(e, pick(rng, targets));
  std::vector<std::string> options;
  for (const auto& v : usable_variables(scenario)) {
    if (v != leaf.name) options.push_back(v);
  }
  if (options.empty()) return false;
  leaf.name = pick(rng, options);
  return true;
}

bool apply_edit(Expr& e, const Scenario& scenario, std::mt19937_64& rng) {
  switch (uniform_index(rng, 4)) {
    case 0: return perturb_window(e, scenario, rng);
    case 1: return swap_operator(e, scenario, rng);
    case 2: return wrap_subtree(e, scenario, rng);
    default: return substitute_variable(e, scenario, rng);
  }
}

Expr random_node(const Scenario& scenario, std::mt19937_64& rng, std::size_t budget) {
  const auto variables = usable_variables(scenario);
  if (budget <= 1 || uniform_index(rng, 10) < 3) return Expr::variable(pick(rng, variables));

  std::vector<const OperatorInfo*> ops;
  for (const auto& op : operators()) {
    if (usable(std::string(op.name), scenario)) ops.push_back(&op);
  }
  if (ops.empty()) return Expr::variable(pick(rng, variables));
  const OperatorInfo& op = *pick(rng, ops);
  std::vector<Expr> args;
  const std::size_t series_args = op.windowed ? op.arity - 1 : op.arity;
  for (std::size_t k = 0; k < series_args; ++k) {
    // Binary elementwise ops occasionally take a constant on the right.
    if (k == 1 && op.op_class == OpClass::elementwise && uniform_index(rng, 4) == 0) {
      args.push_back(Expr::number(static_cast<double>(1 + uniform_index(rng, 9)) / 2.0));
    } else {
      args.push_back(random_node(scenario, rng, budget - 1));
    }
  }
  if (op.windowed) args.push_back(Expr::integer(random_window(rng, scenario)));
  return Expr::call(std::string(op.name), std::move(args));
}

}  // namespace

std::vector<std::string> builtin_mutate(const FactorExpr& base, const Scenario& scenario, std::size_t group_size,
                                        std::uint64_t rng_seed) {
  std::vector<std::string> out;
  out.reserve(group_size);
  for (std::size_t k = 0; k < group_size; ++k) {
    std::mt19937_64 rng(mix_seed(rng_seed, k));
    Expr candidate = base;
    const std::size_t edits = 1 + uniform_index(rng, 2);
    for (std::size_t n = 0; n < edits; ++n) {
      Expr trial = candidate;
      if (apply_edit(trial, scenario, rng) && !find_violation(trial, scenario)) candidate = std::move(trial);
    }
    out.push_back(find_violation(candidate, scenario) ? print(base) : print(candidate));
  }
  return out;
}

std::vector<std::string> builtin_mutate(const MiningTask& task, std::size_t group_size, std::uint64_t rng_seed) {
  return builtin_mutate(task.seed, task.scenario, group_size, rng_seed);
}

FactorExpr random_expression(const Scenario& scenario, std::mt19937_64& rng, std::size_t max_depth) {
  if (usable_variables(scenario).empty()) throw InputError("scenario allows no variables");
  const std::size_t budget = std::max<std::size_t>(1, std::min(max_depth, scenario.d_max));
  for (;;) {
    Expr e = random_node(scenario, rng, budget);
    if (!find_violation(e, scenario)) return e;
  }
}

// ---------------------------------------------------------------------------

std::vector<std::string> BuiltinGenerator::generate(const MiningTask& task, std::size_t group_size,
                                                    std::uint64_t rng_seed) {
  const auto it = incumbents_.find(task.task_id);
  const FactorExpr& base = it == incumbents_.end() ? task.seed : it->second.expr;
  return builtin_mutate(base, task.scenario, group_size, rng_seed);
}

std::vector<std::string> BuiltinGenerator::propose_seeds(const Scenario& scenario, std::size_t count,
                                                         std::uint64_t rng_seed) {
  std::mt19937_64 rng(mix_seed(rng_seed, 0x5eed));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(print(random_expression(scenario, rng)));
  return out;
}

void BuiltinGenerator::observe(const MiningTask& task, std::span<const TrainingRecord> records) {
  const TrainingRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.valid && (best == nullptr || r.reward > best->reward)) best = &r;
  }
  if (best == nullptr) return;
  const auto it = incumbents_.find(task.task_id);
  if (it != incumbents_.end() && best->reward <= it->second.reward) return;
  try {
    FactorExpr expr = parse_valid(best->expression, task.scenario);
    incumbents_.insert_or_assign(task.task_id, Incumbent{std::move(expr), best->reward});
  } catch (const InputError&) {
    // a valid record always reparses; keep the old incumbent otherwise
  }
}

// ---------------------------------------------------------------------------

ProcessGenerator::ProcessGenerator(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

ProcessGenerator::~ProcessGenerator() { stop(); }

void ProcessGenerator::start() {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw GeneratorError(describe() + ": pipe failed: " + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw GeneratorError(describe() + ": pipe failed: " + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw GeneratorError(describe() + ": fork failed: " + std::strerror(errno));
  }
  if (pid == 0) {
    // Own process group, so stop() reaches whatever the shell spawned.
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void ProcessGenerator::stop() noexcept {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    kill(-pid_, SIGTERM);
    int status = 0;
    bool reaped = false;
    for (int k = 0; k < 50 && !reaped; ++k) {
      reaped = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) usleep(10'000);
    }
    if (!reaped) {
      kill(-pid_, SIGKILL);
      waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
}

nlohmann::json ProcessGenerator::request(const nlohmann::json& message) {
  if (pid_ < 0) start();
  auto fail = [this](const std::string& what) -> GeneratorError {
    stop();
    return GeneratorError("generator " + describe() + " unreachable: " + what);
  };

  const std::string line = message.dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw fail(std::string("write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (reply.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        return nlohmann::json::parse(reply);
      } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("malformed reply: ") + e.what());
      }
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw fail("timed out after " + std::to_string(timeout_.count()) + " ms");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw fail(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw fail(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw fail("child closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

std::vector<std::string> expressions_of(const nlohmann::json& reply, const std::string& who) {
  if (!reply.is_object() || reply.value("type", "") != "candidates" || !reply.contains("expressions") ||
      !reply["expressions"].is_array()) {
    throw GeneratorError("generator " + who + " sent an unexpected reply: " + reply.dump());
  }
  std::vector<std::string> out;
  for (const auto& e : reply["expressions"]) out.push_back(e.is_string() ? e.get<std::string>() : e.dump());
  return out;
}

}  // namespace

std::vector<std::string> ProcessGenerator::generate(const MiningTask& task, std::size_t group_size,
                                                    std::uint64_t rng_seed) {
  nlohmann::json scenario = task.scenario;
  const auto reply = request({{"type", "generate"},
                              {"task_id", task.task_id},
                              {"scenario", scenario},
                              {"seed", print(task.seed)},
                              {"window", to_json(task.window)},
                              {"group_size", group_size},
                              {"rng_seed", rng_seed}});
  auto out = expressions_of(reply, describe());
  // Missing entries become empty (unparseable) candidates.
  out.resize(group_size);
  return out;
}

std::vector<std::string> ProcessGenerator::propose_seeds(const Scenario& scenario, std::size_t count,
                                                         std::uint64_t rng_seed) {
  nlohmann::json sc = scenario;
  const auto reply = request({{"type", "generate"},
                              {"task_id", "__seed__"},
                              {"scenario", sc},
                              {"seed", ""},
                              {"window", to_json(TimeWindow{})},
                              {"group_size", count},
                              {"rng_seed", rng_seed}});
  auto out = expressions_of(reply, describe());
  if (out.size() > count) out.resize(count);
  return out;
}

Scenario ProcessGenerator::refine(const std::string& raw_scenario) {
  const auto reply = request({{"type", "refine"}, {"raw_scenario", raw_scenario}});
  if (!reply.is_object() || reply.value("type", "") != "scenario") {
    throw GeneratorError("generator " + describe() + " sent an unexpected reply: " + reply.dump());
  }
  try {
    return scenario_from_json(reply.contains("scenario") ? reply["scenario"] : reply);
  } catch (const InputError& e) {
    throw GeneratorError("generator " + describe() + " proposed an unusable scenario: " + e.what());
  }
}

}  // namespace alphamine
