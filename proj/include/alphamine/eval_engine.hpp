#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alphamine/dsl.hpp"
#include "alphamine/kernels.hpp"
#include "alphamine/market_data.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

enum class StepOp : std::uint8_t {
  constant,
  neg, abs, log, sign,
  add, sub, mul, div,
  ts_mean, ts_std, ts_min, ts_max, ts_sum, ts_delta, ts_rank, delay,
  ts_corr,
  cs_rank, cs_zscore,
};

std::string to_string(StepOp op);

struct PlanStep {
  StepOp op = StepOp::constant;
  std::vector<std::size_t> inputs;  // slot indices, all < this step's slot
  std::size_t window = 0;
  double value = 0.0;  // constant steps only
};

/// Executable form of a validated expression.
///
/// Slots [0, variables.size()) hold panel fields; slot variables.size() + k
/// holds the output of plan[k]. Identical subtrees share one slot.
struct CompiledFactor {
  std::vector<std::string> variables;
  std::vector<PlanStep> plan;
  std::size_t output = 0;
  // Longest chain of window lags on any root-to-leaf path.
  std::size_t max_lookback = 0;
  std::string expression;
};

struct FactorValues {
  Grid values;
  std::size_t warm_up = 0;       // == max_lookback of the compiled factor
  std::size_t prefix_rows = 0;   // leading rows that belong to the panel's warm-up prefix

  // First row that metrics may look at.
  std::size_t first_scored_row() const noexcept { return warm_up > prefix_rows ? warm_up : prefix_rows; }
};

// Lag accounting used by realize(); exposed for slicing decisions.
std::size_t max_lookback(const Expr& expr);

CompiledFactor realize(const FactorExpr& expr, const Scenario& scenario);

// Throws InputError when the panel lacks a variable the plan reads.
FactorValues evaluate(const CompiledFactor& cf, const MarketPanel& panel,
                      kernels::Exec exec = kernels::Exec::parallel);

FactorValues evaluate_expr(const FactorExpr& expr, const MarketPanel& panel, const Scenario& scenario);

}  // namespace alphamine
