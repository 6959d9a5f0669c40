#include "alphamine/eval_engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "alphamine/errors.hpp"

namespace alphamine {

namespace {

struct OpMapping {
  std::string_view name;
  StepOp op;
};

constexpr OpMapping kStepOps[] = {
    {"neg", StepOp::neg},         {"abs", StepOp::abs},         {"log", StepOp::log},
    {"sign", StepOp::sign},       {"add", StepOp::add},         {"sub", StepOp::sub},
    {"mul", StepOp::mul},         {"div", StepOp::div},         {"ts_mean", StepOp::ts_mean},
    {"ts_std", StepOp::ts_std},   {"ts_min", StepOp::ts_min},   {"ts_max", StepOp::ts_max},
    {"ts_sum", StepOp::ts_sum},   {"ts_delta", StepOp::ts_delta}, {"ts_rank", StepOp::ts_rank},
    {"delay", StepOp::delay},     {"ts_corr", StepOp::ts_corr}, {"rank", StepOp::cs_rank},
    {"zscore", StepOp::cs_zscore},
};

StepOp step_op_for(const std::string& name) {
  for (const auto& m : kStepOps) {
    if (m.name == name) return m.op;
  }
  throw std::logic_error("no kernel for operator '" + name + "'");
}

kernels::Rolling rolling_kind(StepOp op) {
  switch (op) {
    case StepOp::ts_mean: return kernels::Rolling::mean;
    case StepOp::ts_std: return kernels::Rolling::std;
    case StepOp::ts_min: return kernels::Rolling::min;
    case StepOp::ts_max: return kernels::Rolling::max;
    case StepOp::ts_sum: return kernels::Rolling::sum;
    case StepOp::ts_delta: return kernels::Rolling::delta;
    case StepOp::ts_rank: return kernels::Rolling::rank;
    case StepOp::delay: return kernels::Rolling::delay;
    default: throw std::logic_error("not a rolling step");
  }
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::variable) out.insert(e.name);
  for (const auto& a : e.args) collect_variables(a, out);
}

class Compiler {
 public:
  explicit Compiler(CompiledFactor& cf) : cf_(cf) {
    for (std::size_t k = 0; k < cf_.variables.size(); ++k) memo_.emplace(cf_.variables[k], k);
  }

  std::size_t emit(const Expr& e) {
    std::string key = print(e);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    PlanStep step;
    switch (e.kind) {
      case Expr::Kind::variable:
        throw std::logic_error("variable '" + e.name + "' missing from the slot table");
      case Expr::Kind::int_literal:
        step.op = StepOp::constant;
        step.value = static_cast<double>(e.int_value);
        break;
      case Expr::Kind::num_literal:
        step.op = StepOp::constant;
        step.value = e.num_value;
        break;
      case Expr::Kind::call: {
        step.op = step_op_for(e.name);
        const OperatorInfo* info = find_operator(e.name);
        const std::size_t series_args = info->windowed ? e.args.size() - 1 : e.args.size();
        for (std::size_t k = 0; k < series_args; ++k) step.inputs.push_back(emit(e.args[k]));
        if (info->windowed) step.window = static_cast<std::size_t>(e.args.back().int_value);
        break;
      }
    }
    cf_.plan.push_back(std::move(step));
    const std::size_t slot = cf_.variables.size() + cf_.plan.size() - 1;
    memo_.emplace(std::move(key), slot);
    return slot;
  }

 private:
  CompiledFactor& cf_;
  std::unordered_map<std::string, std::size_t> memo_;
};

}  // namespace

std::string to_string(StepOp op) {
  if (op == StepOp::constant) return "constant";
  for (const auto& m : kStepOps) {
    if (m.op == op) return std::string(m.name);
  }
  return "?";
}

std::size_t max_lookback(const Expr& expr) {
  if (expr.kind != Expr::Kind::call) return 0;
  const OperatorInfo* info = find_operator(expr.name);
  const bool windowed = info != nullptr && info->windowed && !expr.args.empty();
  const std::size_t series_args = windowed ? expr.args.size() - 1 : expr.args.size();
  std::size_t inner = 0;
  for (std::size_t k = 0; k < series_args; ++k) inner = std::max(inner, max_lookback(expr.args[k]));
  if (!windowed) return inner;
  const auto window = static_cast<std::size_t>(std::max<std::int64_t>(expr.args.back().int_value, 0));
  const StepOp op = step_op_for(expr.name);
  // ts_corr shares ts_mean's window shape.
  const auto kind = op == StepOp::ts_corr ? kernels::Rolling::mean : rolling_kind(op);
  return inner + kernels::rolling_lookback(kind, window);
}

CompiledFactor realize(const FactorExpr& expr, const Scenario& scenario) {
  (void)scenario;  // validation already applied the scenario's constraints
  CompiledFactor cf;
  std::set<std::string> vars;
  collect_variables(expr, vars);
  cf.variables.assign(vars.begin(), vars.end());
  Compiler compiler(cf);
  cf.output = compiler.emit(expr);
  cf.max_lookback = max_lookback(expr);
  cf.expression = print(expr);
  return cf;
}

FactorValues evaluate(const CompiledFactor& cf, const MarketPanel& panel, kernels::Exec exec) {
  using kernels::Binary;
  using kernels::Unary;

  std::vector<const Grid*> slots;
  slots.reserve(cf.variables.size() + cf.plan.size());
  for (const auto& v : cf.variables) slots.push_back(&panel.field(v));

  std::vector<Grid> owned;
  owned.reserve(cf.plan.size());
  const std::size_t rows = panel.periods();
  const std::size_t cols = panel.asset_count();
  for (const PlanStep& step : cf.plan) {
    auto in = [&](std::size_t k) -> const Grid& { return *slots[step.inputs[k]]; };
    Grid result;
    switch (step.op) {
      case StepOp::constant: result = kernels::constant(rows, cols, step.value); break;
      case StepOp::neg: result = kernels::unary(Unary::neg, in(0), exec); break;
      case StepOp::abs: result = kernels::unary(Unary::abs, in(0), exec); break;
      case StepOp::log: result = kernels::unary(Unary::log, in(0), exec); break;
      case StepOp::sign: result = kernels::unary(Unary::sign, in(0), exec); break;
      case StepOp::add: result = kernels::binary(Binary::add, in(0), in(1), exec); break;
      case StepOp::sub: result = kernels::binary(Binary::sub, in(0), in(1), exec); break;
      case StepOp::mul: result = kernels::binary(Binary::mul, in(0), in(1), exec); break;
      case StepOp::div: result = kernels::binary(Binary::div, in(0), in(1), exec); break;
      case StepOp::ts_corr: result = kernels::rolling_corr(in(0), in(1), step.window, exec); break;
      case StepOp::cs_rank: result = kernels::cs_rank(in(0), exec); break;
      case StepOp::cs_zscore: result = kernels::cs_zscore(in(0), exec); break;
      default: result = kernels::rolling(rolling_kind(step.op), in(0), step.window, exec); break;
    }
    owned.push_back(std::move(result));
    slots.push_back(&owned.back());
  }

  FactorValues fv;
  fv.values = *slots.at(cf.output);
  fv.warm_up = cf.max_lookback;
  fv.prefix_rows = panel.warm_up();
  return fv;
}

FactorValues evaluate_expr(const FactorExpr& expr, const MarketPanel& panel, const Scenario& scenario) {
  return evaluate(realize(validate(expr, scenario), scenario), panel);
}

}  // namespace alphamine
