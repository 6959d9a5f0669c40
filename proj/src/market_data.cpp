#include "alphamine/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "alphamine/errors.hpp"

namespace alphamine {

std::size_t Grid::defined_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), is_defined));
}

std::vector<bool> Grid::mask() const {
  std::vector<bool> m(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) m[k] = is_defined(values_[k]);
  return m;
}

Grid Grid::rows_range(std::size_t first, std::size_t count) const {
  Grid out(count, cols_);
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_, out.values_.begin());
  return out;
}

bool identical(const Grid& a, const Grid& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) {
    const bool ma = is_defined(da[k]);
    if (ma != is_defined(db[k])) return false;
    if (ma && std::memcmp(&da[k], &db[k], sizeof(double)) != 0) return false;
  }
  return true;
}

namespace {

std::int64_t parse_int64(std::string_view text, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

// Empty text is missing; anything else must be a finite decimal.
bool parse_cell(std::string_view text, double& out) {
  if (text.empty()) {
    out = kMissing;
    return true;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(begin));
      return parts;
    }
    parts.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

void format_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

Grid derive_return(const Grid& close) {
  Grid out(close.rows(), close.cols());
  for (std::size_t t = 1; t < close.rows(); ++t) {
    for (std::size_t i = 0; i < close.cols(); ++i) {
      out(t, i) = finite_or_missing(close(t, i) / close(t - 1, i) - 1.0);
    }
  }
  return out;
}

}  // namespace

TimeWindow parse_window(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) throw InputError("window must be 'start:end', got '" + text + "'");
  TimeWindow w{parse_int64(std::string_view(text).substr(0, pos), "window start"),
               parse_int64(std::string_view(text).substr(pos + 1), "window end")};
  if (w.start >= w.end) throw InputError("window start must precede end: '" + text + "'");
  return w;
}

std::string format_window(const TimeWindow& w) { return std::to_string(w.start) + ":" + std::to_string(w.end); }

MarketPanel MarketPanel::make(std::vector<std::int64_t> timestamps, std::vector<std::string> assets,
                              std::map<std::string, Grid> fields) {
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    if (timestamps[t] <= timestamps[t - 1]) throw InputError("timestamps must be strictly increasing");
  }
  {
    std::set<std::string> seen;
    for (const auto& a : assets) {
      if (!seen.insert(a).second) throw InputError("duplicate asset '" + a + "'");
    }
  }
  for (const auto& [name, grid] : fields) {
    if (grid.rows() != timestamps.size() || grid.cols() != assets.size()) {
      throw InputError("field '" + name + "' has shape " + std::to_string(grid.rows()) + "x" +
                       std::to_string(grid.cols()) + ", expected " + std::to_string(timestamps.size()) + "x" +
                       std::to_string(assets.size()));
    }
    for (double v : grid.data()) {
      if (is_defined(v) && !std::isfinite(v)) throw InputError("field '" + name + "' holds a non-finite value");
    }
  }
  if (auto it = fields.find("close"); it != fields.end()) {
    for (double v : it->second.data()) {
      if (is_defined(v) && v <= 0.0) throw InputError("close must be strictly positive");
    }
    fields[kReturnField] = derive_return(it->second);
  }
  if (auto it = fields.find("volume"); it != fields.end()) {
    for (double v : it->second.data()) {
      if (is_defined(v) && v < 0.0) throw InputError("volume must be non-negative");
    }
  }
  MarketPanel p;
  p.timestamps_ = std::move(timestamps);
  p.assets_ = std::move(assets);
  p.fields_ = std::move(fields);
  return p;
}

const Grid& MarketPanel::field(const std::string& name) const {
  const auto it = fields_.find(name);
  if (it == fields_.end()) throw InputError("panel has no variable '" + name + "'");
  return it->second;
}

std::size_t MarketPanel::lower_index(std::int64_t t) const {
  return static_cast<std::size_t>(std::lower_bound(timestamps_.begin(), timestamps_.end(), t) - timestamps_.begin());
}

bool MarketPanel::operator==(const MarketPanel& other) const {
  if (timestamps_ != other.timestamps_ || assets_ != other.assets_ || warm_up_ != other.warm_up_ ||
      fields_.size() != other.fields_.size()) {
    return false;
  }
  for (const auto& [name, grid] : fields_) {
    const auto it = other.fields_.find(name);
    if (it == other.fields_.end() || !identical(grid, it->second)) return false;
  }
  return true;
}

MarketPanel read_panel(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split(line, ',');
  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError(1, "header lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = column_of(schema.timestamp);
  const std::size_t asset_col = column_of(schema.asset);
  std::vector<std::pair<std::string, std::size_t>> value_cols;
  for (const auto& [field, column] : schema.columns) value_cols.emplace_back(field, column_of(column));

  struct Row {
    std::int64_t ts;
    std::string asset;
    std::vector<double> values;
    std::size_t line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw FormatError(line_no, "expected " + std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
    }
    Row row{0, std::string(cells[asset_col]), {}, line_no};
    try {
      row.ts = parse_int64(cells[ts_col], "timestamp");
    } catch (const InputError& e) {
      throw FormatError(line_no, e.what());
    }
    if (row.asset.empty()) throw FormatError(line_no, "empty asset");
    for (const auto& [field, col] : value_cols) {
      double v = 0.0;
      if (!parse_cell(cells[col], v)) {
        throw FormatError(line_no, "invalid " + field + " value '" + std::string(cells[col]) + "'");
      }
      if (field == "close" && is_defined(v) && v <= 0.0) {
        throw FormatError(line_no, "non-positive close " + std::string(cells[col]));
      }
      if (field == "volume" && is_defined(v) && v < 0.0) {
        throw FormatError(line_no, "negative volume " + std::string(cells[col]));
      }
      row.values.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::int64_t> timestamps;
  std::vector<std::string> assets;
  for (const auto& r : rows) {
    timestamps.push_back(r.ts);
    assets.push_back(r.asset);
  }
  std::sort(timestamps.begin(), timestamps.end());
  timestamps.erase(std::unique(timestamps.begin(), timestamps.end()), timestamps.end());
  std::sort(assets.begin(), assets.end());
  assets.erase(std::unique(assets.begin(), assets.end()), assets.end());

  std::unordered_map<std::string, std::size_t> asset_index;
  for (std::size_t i = 0; i < assets.size(); ++i) asset_index[assets[i]] = i;

  std::map<std::string, Grid> fields;
  for (const auto& [field, col] : value_cols) fields.emplace(field, Grid(timestamps.size(), assets.size()));
  std::vector<std::size_t> seen_line(timestamps.size() * assets.size(), 0);
  for (const auto& r : rows) {
    const auto t = static_cast<std::size_t>(std::lower_bound(timestamps.begin(), timestamps.end(), r.ts) -
                                            timestamps.begin());
    const std::size_t i = asset_index.at(r.asset);
    std::size_t& first = seen_line[t * assets.size() + i];
    if (first != 0) {
      throw FormatError(r.line, "duplicate row for timestamp " + std::to_string(r.ts) + " and asset " + r.asset +
                                    " (first seen on line " + std::to_string(first) + ")");
    }
    first = r.line;
    for (std::size_t k = 0; k < value_cols.size(); ++k) fields.at(value_cols[k].first)(t, i) = r.values[k];
  }
  return MarketPanel::make(std::move(timestamps), std::move(assets), std::move(fields));
}

MarketPanel load_panel(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return read_panel(in, schema);
}

void write_panel(std::ostream& out, const MarketPanel& panel) {
  out << "timestamp,asset";
  std::vector<const Grid*> grids;
  for (const auto& name : base_fields()) {
    out << ',' << name;
    grids.push_back(panel.has_field(name) ? &panel.field(name) : nullptr);
  }
  out << '\n';
  for (std::size_t t = 0; t < panel.periods(); ++t) {
    for (std::size_t i = 0; i < panel.asset_count(); ++i) {
      out << panel.timestamps()[t] << ',' << panel.assets()[i];
      for (const Grid* g : grids) {
        out << ',';
        if (g != nullptr && g->defined(t, i)) format_double(out, (*g)(t, i));
      }
      out << '\n';
    }
  }
}

void write_panel(const std::filesystem::path& path, const MarketPanel& panel) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_panel(out, panel);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_values_csv(std::ostream& out, const std::vector<std::int64_t>& timestamps,
                      const std::vector<std::string>& assets, const Grid& values) {
  out << "timestamp,asset,value\n";
  for (std::size_t t = 0; t < values.rows(); ++t) {
    for (std::size_t i = 0; i < values.cols(); ++i) {
      out << timestamps[t] << ',' << assets[i] << ',';
      if (values.defined(t, i)) format_double(out, values(t, i));
      out << '\n';
    }
  }
}

ReturnTarget future_returns(const MarketPanel& panel, int horizon) {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (static_cast<std::size_t>(horizon) >= panel.periods()) {
    throw InputError("horizon " + std::to_string(horizon) + " must be below the panel length " +
                     std::to_string(panel.periods()));
  }
  const Grid& close = panel.field("close");
  const auto h = static_cast<std::size_t>(horizon);
  ReturnTarget y{horizon, panel.timestamps(), Grid(panel.periods(), panel.asset_count())};
  for (std::size_t t = 0; t + h < panel.periods(); ++t) {
    for (std::size_t i = 0; i < panel.asset_count(); ++i) {
      y.values(t, i) = finite_or_missing(close(t + h, i) / close(t, i) - 1.0);
    }
  }
  return y;
}

MarketPanel slice(const MarketPanel& panel, const TimeWindow& window, std::size_t warm_up_rows) {
  const std::size_t first = panel.lower_index(window.start);
  const std::size_t last = panel.lower_index(window.end + 1);  // one past
  if (window.start > window.end || first >= last) {
    throw InputError("window " + format_window(window) + " does not intersect the panel");
  }
  const std::size_t prefix = std::min(warm_up_rows, first);
  const std::size_t begin = first - prefix;
  const std::size_t count = last - begin;

  MarketPanel out;
  out.timestamps_.assign(panel.timestamps_.begin() + static_cast<std::ptrdiff_t>(begin),
                         panel.timestamps_.begin() + static_cast<std::ptrdiff_t>(last));
  out.assets_ = panel.assets_;
  for (const auto& [name, grid] : panel.fields_) out.fields_.emplace(name, grid.rows_range(begin, count));
  out.warm_up_ = prefix;
  return out;
}

ReturnTarget align(const ReturnTarget& target, const std::vector<std::int64_t>& timestamps) {
  ReturnTarget out{target.horizon, timestamps, Grid(timestamps.size(), target.values.cols())};
  if (timestamps.empty()) return out;
  const auto it = std::lower_bound(target.timestamps.begin(), target.timestamps.end(), timestamps.front());
  const auto first = static_cast<std::size_t>(it - target.timestamps.begin());
  if (first + timestamps.size() > target.timestamps.size()) throw InputError("target does not cover the window");
  for (std::size_t k = 0; k < timestamps.size(); ++k) {
    if (target.timestamps[first + k] != timestamps[k]) throw InputError("target timestamps do not match the panel");
  }
  out.values = target.values.rows_range(first, timestamps.size());
  return out;
}

std::vector<TimeWindow> make_windows(const std::vector<std::int64_t>& grid, const TimeWindow& range,
                                     std::size_t length, std::size_t stride) {
  if (length < 2) throw InputError("window length must be at least 2 steps");
  if (stride < 1) throw InputError("window stride must be positive");
  const auto lo = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), range.start) - grid.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), range.end) - grid.begin());
  const std::size_t span = hi > lo ? hi - lo : 0;
  if (length > span) {
    throw InputError("window length " + std::to_string(length) + " exceeds the range's " + std::to_string(span) +
                     " steps");
  }
  std::vector<TimeWindow> windows;
  for (std::size_t offset = 0; offset + length <= span; offset += stride) {
    windows.push_back({grid[lo + offset], grid[lo + offset + length - 1]});
  }
  return windows;
}

}  // namespace alphamine
