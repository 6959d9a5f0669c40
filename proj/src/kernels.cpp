#include "alphamine/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace alphamine::kernels {

namespace {

template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) fn(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < n; ++k) fn(k);
  }
}

double rolling_cell(Rolling op, std::span<const double> w) {
  for (double v : w) {
    if (!is_defined(v)) return kMissing;
  }
  const auto n = static_cast<double>(w.size());
  switch (op) {
    case Rolling::mean:
      return finite_or_missing(std::accumulate(w.begin(), w.end(), 0.0) / n);
    case Rolling::sum:
      return finite_or_missing(std::accumulate(w.begin(), w.end(), 0.0));
    case Rolling::std:
      return finite_or_missing(population_std(w));
    case Rolling::min:
      return *std::min_element(w.begin(), w.end());
    case Rolling::max:
      return *std::max_element(w.begin(), w.end());
    case Rolling::rank: {
      const double current = w.back();
      std::size_t less = 0;
      std::size_t equal = 0;
      for (double v : w) {
        if (v < current) ++less;
        if (v == current) ++equal;
      }
      return (static_cast<double>(less) + static_cast<double>(equal + 1) / 2.0) / n;
    }
    case Rolling::delta:
    case Rolling::delay:
      break;  // handled by rolling()
  }
  return kMissing;
}

}  // namespace

double apply(Unary op, double x) noexcept {
  if (!is_defined(x)) return kMissing;
  switch (op) {
    case Unary::neg: return -x;
    case Unary::abs: return std::fabs(x);
    case Unary::log: return x > 0.0 ? finite_or_missing(std::log(x)) : kMissing;
    case Unary::sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  return kMissing;
}

double apply(Binary op, double a, double b) noexcept {
  if (!is_defined(a) || !is_defined(b)) return kMissing;
  switch (op) {
    case Binary::add: return finite_or_missing(a + b);
    case Binary::sub: return finite_or_missing(a - b);
    case Binary::mul: return finite_or_missing(a * b);
    case Binary::div: return std::fabs(b) <= kDivEpsilon ? kMissing : finite_or_missing(a / b);
  }
  return kMissing;
}

Grid constant(std::size_t rows, std::size_t cols, double value) { return Grid(rows, cols, finite_or_missing(value)); }

Grid unary(Unary op, const Grid& x, Exec exec) {
  Grid out(x.rows(), x.cols());
  const auto in = x.data();
  auto dst = out.data();
  for_each_index(in.size(), exec, [&](std::size_t k) { dst[k] = apply(op, in[k]); });
  return out;
}

Grid binary(Binary op, const Grid& a, const Grid& b, Exec exec) {
  Grid out(a.rows(), a.cols());
  const auto da = a.data();
  const auto db = b.data();
  auto dst = out.data();
  for_each_index(da.size(), exec, [&](std::size_t k) { dst[k] = apply(op, da[k], db[k]); });
  return out;
}

std::size_t rolling_lookback(Rolling op, std::size_t window) noexcept {
  if (op == Rolling::delta || op == Rolling::delay) return window;
  return window == 0 ? 0 : window - 1;
}

Grid rolling(Rolling op, const Grid& x, std::size_t window, Exec exec) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const std::size_t lookback = rolling_lookback(op, window);
  const std::size_t span = lookback + 1;  // cells read per output
  Grid out(rows, cols);
  for_each_index(cols, exec, [&](std::size_t i) {
    std::vector<double> column(rows);
    for (std::size_t t = 0; t < rows; ++t) column[t] = x(t, i);
    for (std::size_t t = lookback; t < rows; ++t) {
      if (op == Rolling::delay) {
        out(t, i) = column[t - lookback];
      } else if (op == Rolling::delta) {
        out(t, i) = apply(Binary::sub, column[t], column[t - lookback]);
      } else {
        out(t, i) = rolling_cell(op, std::span<const double>(column.data() + (t - lookback), span));
      }
    }
  });
  return out;
}

Grid rolling_corr(const Grid& x, const Grid& y, std::size_t window, Exec exec) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  Grid out(rows, cols);
  if (window == 0) return out;
  for_each_index(cols, exec, [&](std::size_t i) {
    std::vector<double> cx(rows);
    std::vector<double> cy(rows);
    for (std::size_t t = 0; t < rows; ++t) {
      cx[t] = x(t, i);
      cy[t] = y(t, i);
    }
    for (std::size_t t = window - 1; t < rows; ++t) {
      std::span<const double> wx(cx.data() + (t + 1 - window), window);
      std::span<const double> wy(cy.data() + (t + 1 - window), window);
      const bool complete = std::all_of(wx.begin(), wx.end(), is_defined) && std::all_of(wy.begin(), wy.end(), is_defined);
      out(t, i) = complete ? pearson(wx, wy) : kMissing;
    }
  });
  return out;
}

Grid cs_rank(const Grid& x, Exec exec) {
  Grid out(x.rows(), x.cols());
  for_each_index(x.rows(), exec, [&](std::size_t t) {
    const auto row = x.row(t);
    std::vector<double> values;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (is_defined(row[i])) {
        values.push_back(row[i]);
        where.push_back(i);
      }
    }
    if (values.empty()) return;
    std::vector<double> ranks(values.size());
    average_ranks(values, ranks);
    const auto n = static_cast<double>(values.size());
    auto dst = out.row(t);
    for (std::size_t k = 0; k < where.size(); ++k) dst[where[k]] = ranks[k] / n;
  });
  return out;
}

Grid cs_zscore(const Grid& x, Exec exec) {
  Grid out(x.rows(), x.cols());
  for_each_index(x.rows(), exec, [&](std::size_t t) {
    const auto row = x.row(t);
    std::vector<double> values;
    for (double v : row) {
      if (is_defined(v)) values.push_back(v);
    }
    if (values.size() < 2) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return;
    const double m = mean(values);
    const double sd = population_std(values);
    auto dst = out.row(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (is_defined(row[i])) dst[i] = finite_or_missing((row[i] - m) / sd);
    }
  });
  return out;
}

void average_ranks(std::span<const double> values, std::span<double> ranks) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::size_t j = 0;
  while (j < n) {
    std::size_t k = j + 1;
    while (k < n && values[order[k]] == values[order[j]]) ++k;
    const double r = static_cast<double>(j + k - 1) / 2.0 + 1.0;
    for (std::size_t m = j; m < k; ++m) ranks[order[m]] = r;
    j = k;
  }
}

double mean(std::span<const double> x) noexcept {
  if (x.empty()) return kMissing;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double population_std(std::span<const double> x) noexcept {
  if (x.empty()) return kMissing;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double pearson(std::span<const double> x, std::span<const double> y) noexcept {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return kMissing;
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  if (*xlo == *xhi || *ylo == *yhi) return kMissing;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  if (!std::isfinite(r)) return kMissing;
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace alphamine::kernels
