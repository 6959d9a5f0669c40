#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace alphamine {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double v) noexcept { return !std::isnan(v); }

// Collapses inf/nan to the missing marker.
inline double finite_or_missing(double v) noexcept { return std::isfinite(v) ? v : kMissing; }

/// Row-major T x N grid of reals. A cell is missing iff it holds NaN; defined
/// cells are always finite.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = kMissing)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t t, std::size_t i) { return values_[t * cols_ + i]; }
  double operator()(std::size_t t, std::size_t i) const { return values_[t * cols_ + i]; }
  bool defined(std::size_t t, std::size_t i) const { return is_defined((*this)(t, i)); }

  std::span<double> row(std::size_t t) { return {values_.data() + t * cols_, cols_}; }
  std::span<const double> row(std::size_t t) const { return {values_.data() + t * cols_, cols_}; }
  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }

  std::size_t defined_count() const;
  std::vector<bool> mask() const;

  // Copy of rows [first, first + count).
  Grid rows_range(std::size_t first, std::size_t count) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Same shape, same missing-mask, bit-identical defined values.
bool identical(const Grid& a, const Grid& b);

struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const noexcept { return start <= t && t <= end; }
  bool operator==(const TimeWindow&) const = default;
};

// "start:end" in epoch seconds.
TimeWindow parse_window(const std::string& text);
std::string format_window(const TimeWindow& w);

inline const std::vector<std::string>& base_fields() {
  static const std::vector<std::string> names{"open", "high", "low", "close", "volume"};
  return names;
}

// Derived trailing 1-step simple return, close[t]/close[t-1] - 1.
inline constexpr const char* kReturnField = "return";

/// Aligned timestamp x asset grid of market variables. Immutable once built.
class MarketPanel {
 public:
  MarketPanel() = default;

  /// Validates the invariants (strictly increasing timestamps, unique assets,
  /// field shapes, positive close, non-negative volume) and derives `return`
  /// when `close` is present. Throws InputError.
  static MarketPanel make(std::vector<std::int64_t> timestamps, std::vector<std::string> assets,
                          std::map<std::string, Grid> fields);

  const std::vector<std::int64_t>& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::string>& assets() const noexcept { return assets_; }
  std::size_t periods() const noexcept { return timestamps_.size(); }
  std::size_t asset_count() const noexcept { return assets_.size(); }

  bool has_field(const std::string& name) const { return fields_.count(name) != 0; }
  // Throws InputError when absent.
  const Grid& field(const std::string& name) const;
  const std::map<std::string, Grid>& fields() const noexcept { return fields_; }

  // Leading rows that precede the requested window (warm-up history).
  std::size_t warm_up() const noexcept { return warm_up_; }

  // Index of the first timestamp >= t (periods() when none).
  std::size_t lower_index(std::int64_t t) const;

  bool operator==(const MarketPanel& other) const;

 private:
  friend MarketPanel slice(const MarketPanel&, const TimeWindow&, std::size_t);

  std::vector<std::int64_t> timestamps_;
  std::vector<std::string> assets_;
  std::map<std::string, Grid> fields_;
  std::size_t warm_up_ = 0;
};

struct ReturnTarget {
  int horizon = 1;
  std::vector<std::int64_t> timestamps;
  Grid values;
};

/// Column names for each role in the CSV file.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string asset = "asset";
  std::map<std::string, std::string> columns{{"open", "open"},   {"high", "high"},
                                             {"low", "low"},     {"close", "close"},
                                             {"volume", "volume"}};
};

MarketPanel load_panel(const std::filesystem::path& path, const CsvSchema& schema = {});
MarketPanel read_panel(std::istream& in, const CsvSchema& schema = {});
void write_panel(const std::filesystem::path& path, const MarketPanel& panel);
void write_panel(std::ostream& out, const MarketPanel& panel);

// timestamp,asset,value layout for debugging factor output.
void write_values_csv(std::ostream& out, const std::vector<std::int64_t>& timestamps,
                      const std::vector<std::string>& assets, const Grid& values);

ReturnTarget future_returns(const MarketPanel& panel, int horizon);

/// Rows with window.start <= t <= window.end, preceded by up to `warm_up_rows`
/// earlier rows (fewer when history runs out). The result's warm_up() records
/// how many prefix rows were actually taken.
MarketPanel slice(const MarketPanel& panel, const TimeWindow& window, std::size_t warm_up_rows = 0);

// Target rows matching the timestamps of `sliced` (which must be a contiguous
// run of the target's timestamps).
ReturnTarget align(const ReturnTarget& target, const std::vector<std::int64_t>& timestamps);

/// Windows of `length` consecutive grid steps starting every `stride` steps
/// inside `range`.
std::vector<TimeWindow> make_windows(const std::vector<std::int64_t>& grid, const TimeWindow& range,
                                     std::size_t length, std::size_t stride);

}  // namespace alphamine
