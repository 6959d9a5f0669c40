#pragma once

#include <cstddef>
#include <span>

#include "alphamine/market_data.hpp"

// Data-parallel kernels behind the factor evaluator.
//
// Every kernel has one per-cell definition and two drivers: `Exec::serial`,
// a plain loop kept as the reference, and `Exec::parallel`, which spreads
// independent columns (time-series ops), rows (cross-sectional ops) or cells
// (elementwise ops) over OpenMP threads. Work units never share state, so both
// drivers produce bit-identical grids.
//
// Conventions shared by all kernels:
//   - a missing input inside a cell's dependency cone gives a missing output;
//   - non-finite results become missing;
//   - sums run in index order (oldest to newest, first to last asset);
//   - standard deviations are population (divide by n).
namespace alphamine::kernels {

enum class Exec { serial, parallel };

enum class Unary { neg, abs, log, sign };
enum class Binary { add, sub, mul, div };
enum class Rolling { mean, std, min, max, sum, delta, rank, delay };

inline constexpr double kDivEpsilon = 1e-12;

double apply(Unary op, double x) noexcept;
double apply(Binary op, double a, double b) noexcept;

Grid constant(std::size_t rows, std::size_t cols, double value);
Grid unary(Unary op, const Grid& x, Exec exec = Exec::parallel);
Grid binary(Binary op, const Grid& a, const Grid& b, Exec exec = Exec::parallel);

// Windowed op over each asset's series. `window` is the lag for delta/delay.
Grid rolling(Rolling op, const Grid& x, std::size_t window, Exec exec = Exec::parallel);
Grid rolling_corr(const Grid& x, const Grid& y, std::size_t window, Exec exec = Exec::parallel);

// Average rank / defined count within each row, in (0, 1].
Grid cs_rank(const Grid& x, Exec exec = Exec::parallel);
// Row z-score with population std; missing for constant rows or < 2 values.
Grid cs_zscore(const Grid& x, Exec exec = Exec::parallel);

// Number of leading rows a rolling op leaves undefined.
std::size_t rolling_lookback(Rolling op, std::size_t window) noexcept;

// ---------------------------------------------------------------------------
// Scalar helpers shared with the metric code.

// 1-based average ranks (ties share the mean of their positions).
void average_ranks(std::span<const double> values, std::span<double> ranks);

// Two-pass Pearson correlation. Missing when fewer than two values or either
// side is constant (max == min). Clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y) noexcept;

double mean(std::span<const double> x) noexcept;
double population_std(std::span<const double> x) noexcept;

}  // namespace alphamine::kernels
