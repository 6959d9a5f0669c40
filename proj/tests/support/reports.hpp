#pragma once

// Hand-built backtest reports for archive and reward tests.

#include <random>

#include "alphamine/backtest.hpp"

namespace fixtures {

inline alphamine::BehaviorProfile ramp_behavior(std::size_t periods, std::size_t width, double phase) {
  alphamine::BehaviorProfile b;
  b.mode = alphamine::BehaviorProfile::Mode::ranking;
  b.width = width;
  for (std::size_t t = 0; t < periods; ++t) {
    b.timestamps.push_back(1000 + static_cast<std::int64_t>(t));
    for (std::size_t i = 0; i < width; ++i) b.vector.push_back(std::sin(phase + 0.37 * static_cast<double>(t * width + i)));
  }
  return b;
}

inline alphamine::BacktestReport valid_report(double q, alphamine::BehaviorProfile behavior = ramp_behavior(40, 3, 0.0)) {
  alphamine::BacktestReport r;
  r.executable = true;
  r.valid = true;
  r.coverage = 1.0;
  r.n_periods = 40;
  r.rankic = q;
  r.ic = q / 2;
  r.icir = 0.5;
  r.diracc = 0.5;
  r.primary_metric_value = q;
  r.behavior = std::move(behavior);
  return r;
}

}  // namespace fixtures
