#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alphamine/market_data.hpp"

namespace alphamine {

/// Synthetic market with planted predictive factors.
///
/// Per period, the next-period return of asset i is
///   sum_k weight_k * zscore(planted_k)_i + Normal(0, noise)
/// where the planted factors are computed from same-period data:
///   "volume": log(volume), volume ~ lognormal;
///   "range":  (high - low) / close.
/// Prices compound the returns from a start price of 100.
struct SynthConfig {
  std::size_t assets = 20;
  std::size_t periods = 500;
  std::uint64_t seed = 7;
  double noise = 0.1;
  struct Planted {
    std::string name;
    double weight;
  };
  std::vector<Planted> planted{{"volume", 0.1}};
  std::int64_t start_time = 1'700'000'000;
  std::int64_t step_seconds = 3600;
};

MarketPanel make_synthetic_panel(const SynthConfig& config);

// DSL text of a planted factor ("volume" -> "zscore(log(volume))").
std::string planted_expression(const std::string& name);

}  // namespace alphamine
