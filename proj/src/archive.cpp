#include "alphamine/archive.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <numeric>

#include "alphamine/errors.hpp"

namespace alphamine {

namespace {

nlohmann::json nullable(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> optional_double(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

nlohmann::json to_json(const ReportSummary& s) {
  return {{"diracc", nullable(s.diracc)},     {"ic", nullable(s.ic)},
          {"rankic", nullable(s.rankic)},     {"icir", nullable(s.icir)},
          {"coverage", s.coverage},           {"n_periods", s.n_periods},
          {"valid", s.valid},                 {"primary_metric_value", nullable(s.primary_metric_value)}};
}

ReportSummary summary_from_json(const nlohmann::json& j) {
  ReportSummary s;
  s.diracc = optional_double(j, "diracc");
  s.ic = optional_double(j, "ic");
  s.rankic = optional_double(j, "rankic");
  s.icir = optional_double(j, "icir");
  s.coverage = j.at("coverage").get<double>();
  s.n_periods = j.at("n_periods").get<std::size_t>();
  s.valid = j.at("valid").get<bool>();
  s.primary_metric_value = optional_double(j, "primary_metric_value");
  return s;
}

}  // namespace

ReportSummary ReportSummary::of(const BacktestReport& r) {
  ReportSummary s;
  s.diracc = r.diracc;
  s.ic = r.ic;
  s.rankic = r.rankic;
  // Stored as reported so that a persisted archive never holds huge ratios.
  if (r.icir) s.icir = reported_icir(*r.icir);
  s.coverage = r.coverage;
  s.n_periods = r.n_periods;
  s.valid = r.valid;
  s.primary_metric_value = r.primary_metric_value;
  return s;
}

nlohmann::json to_json(const ArchiveRecord& r) {
  return {{"expression", r.expression},
          {"exact_hash", r.exact_hash.hex()},
          {"family_hash", r.family_hash.hex()},
          {"report", to_json(r.report)},
          {"behavior", to_json(r.behavior)},
          {"task_id", r.task_id},
          {"round", r.round},
          {"inserted_at", r.inserted_at}};
}

ArchiveRecord record_from_json(const nlohmann::json& j) {
  try {
    ArchiveRecord r;
    r.expression = j.at("expression").get<std::string>();
    r.exact_hash = Digest::from_hex(j.at("exact_hash").get<std::string>());
    r.family_hash = Digest::from_hex(j.at("family_hash").get<std::string>());
    r.report = summary_from_json(j.at("report"));
    r.behavior = behavior_from_json(j.at("behavior"));
    r.task_id = j.at("task_id").get<std::string>();
    r.round = j.at("round").get<std::int64_t>();
    r.inserted_at = j.at("inserted_at").get<std::uint64_t>();

    const Signature sig = signature(parse(r.expression));
    if (sig.exact_hash != r.exact_hash || sig.family_hash != r.family_hash) {
      throw InputError("hashes do not match expression '" + r.expression + "'");
    }
    if (!r.report.valid) throw InputError("archived record is not valid");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(e.what());
  }
}

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::not_executable: return "not_executable";
    case RejectReason::coverage: return "coverage";
    case RejectReason::insufficient_periods: return "insufficient_periods";
    case RejectReason::below_threshold: return "below_threshold";
    case RejectReason::duplicate: return "duplicate";
  }
  return "?";
}

Archive::Archive() : mutex_(std::make_unique<std::shared_mutex>()) {}

Archive::Archive(Archive&& other) noexcept
    : records_(std::move(other.records_)),
      exact_index_(std::move(other.exact_index_)),
      families_(std::move(other.families_)),
      log_path_(std::move(other.log_path_)),
      next_ordinal_(other.next_ordinal_),
      mutex_(std::make_unique<std::shared_mutex>()) {}

Archive& Archive::operator=(Archive&& other) noexcept {
  if (this != &other) {
    records_ = std::move(other.records_);
    exact_index_ = std::move(other.exact_index_);
    families_ = std::move(other.families_);
    log_path_ = std::move(other.log_path_);
    next_ordinal_ = other.next_ordinal_;
  }
  return *this;
}

Archive::Archive(const Archive& other) : mutex_(std::make_unique<std::shared_mutex>()) {
  std::shared_lock lock(*other.mutex_);
  records_ = other.records_;
  exact_index_ = other.exact_index_;
  families_ = other.families_;
  log_path_ = other.log_path_;
  next_ordinal_ = other.next_ordinal_;
}

Archive& Archive::operator=(const Archive& other) {
  if (this != &other) {
    Archive copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Archive::~Archive() = default;

void Archive::index_record(ArchiveRecord record) {
  exact_index_.emplace(record.exact_hash, records_.size());
  auto [it, fresh] = families_.try_emplace(record.family_hash);
  FamilyStats& fs = it->second;
  if (fresh) {
    fs.family_hash = record.family_hash;
    fs.best_primary_metric = record.primary();
  } else {
    fs.best_primary_metric = std::max(fs.best_primary_metric, record.primary());
  }
  ++fs.count;
  next_ordinal_ = std::max(next_ordinal_, record.inserted_at + 1);
  records_.push_back(std::move(record));
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open archive '" + path.string() + "'");
  Archive archive;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ArchiveRecord record;
    try {
      record = record_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(number, std::string("corrupt archive record: ") + e.what());
    } catch (const InputError& e) {
      throw FormatError(number, std::string("corrupt archive record: ") + e.what());
    }
    if (archive.exact_index_.count(record.exact_hash) != 0) {
      throw FormatError(number, "duplicate exact_hash " + record.exact_hash.hex());
    }
    archive.index_record(std::move(record));
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return archive;
}

void Archive::persist(const std::filesystem::path& path) const {
  std::shared_lock lock(*mutex_);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write archive '" + tmp.string() + "'");
    for (const auto& r : records_) out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace '" + path.string() + "': " + ec.message());
}

void Archive::attach_log(const std::filesystem::path& path) {
  std::unique_lock lock(*mutex_);
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw IoError("cannot open archive log '" + path.string() + "'");
  log_path_ = path;
}

InsertOutcome Archive::try_insert(const FactorExpr& candidate, const BacktestReport& report, const Scenario& scenario,
                                  const std::string& task_id, std::int64_t round) {
  auto reject = [](RejectReason r) { return InsertOutcome{false, r}; };
  if (!report.executable) return reject(RejectReason::not_executable);
  if (report.coverage < scenario.min_coverage) return reject(RejectReason::coverage);
  if (report.n_periods < scenario.min_periods) return reject(RejectReason::insufficient_periods);
  if (!report.valid || !report.primary_metric_value ||
      *report.primary_metric_value < scenario.quality_threshold) {
    return reject(RejectReason::below_threshold);
  }

  const FactorExpr canonical = canonicalize(candidate);
  const Signature sig = signature(canonical);

  std::unique_lock lock(*mutex_);
  if (exact_index_.count(sig.exact_hash) != 0) return reject(RejectReason::duplicate);

  ArchiveRecord record;
  record.expression = print(canonical);
  record.exact_hash = sig.exact_hash;
  record.family_hash = sig.family_hash;
  record.report = ReportSummary::of(report);
  record.behavior = report.behavior;
  record.task_id = task_id;
  record.round = round;
  record.inserted_at = next_ordinal_;

  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app);
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to archive log '" + log_path_->string() + "'");
  }
  index_record(std::move(record));
  return InsertOutcome{true, std::nullopt};
}

std::vector<ArchiveRecord> Archive::elite(std::size_t m) const {
  std::shared_lock lock(*mutex_);
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(m, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double pa = records_[a].primary();
                      const double pb = records_[b].primary();
                      if (pa != pb) return pa > pb;
                      return records_[a].inserted_at < records_[b].inserted_at;
                    });
  std::vector<ArchiveRecord> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) out.push_back(records_[order[k]]);
  return out;
}

std::size_t Archive::family_count(const Digest& family_hash) const {
  std::shared_lock lock(*mutex_);
  const auto it = families_.find(family_hash);
  return it == families_.end() ? 0 : it->second.count;
}

std::optional<FamilyStats> Archive::family(const Digest& family_hash) const {
  std::shared_lock lock(*mutex_);
  const auto it = families_.find(family_hash);
  if (it == families_.end()) return std::nullopt;
  return it->second;
}

bool Archive::contains_exact(const Digest& exact_hash) const {
  std::shared_lock lock(*mutex_);
  return exact_index_.count(exact_hash) != 0;
}

std::size_t Archive::size() const {
  std::shared_lock lock(*mutex_);
  return records_.size();
}

std::size_t Archive::distinct_families() const {
  std::shared_lock lock(*mutex_);
  return families_.size();
}

std::vector<ArchiveRecord> Archive::records() const {
  std::shared_lock lock(*mutex_);
  return records_;
}

std::map<Digest, FamilyStats> Archive::family_stats() const {
  std::shared_lock lock(*mutex_);
  return families_;
}

std::map<Digest, FamilyStats> Archive::rebuild_family_stats(const std::vector<ArchiveRecord>& records) {
  std::map<Digest, FamilyStats> out;
  for (const auto& r : records) {
    auto [it, fresh] = out.try_emplace(r.family_hash);
    if (fresh) {
      it->second.family_hash = r.family_hash;
      it->second.best_primary_metric = r.primary();
    } else {
      it->second.best_primary_metric = std::max(it->second.best_primary_metric, r.primary());
    }
    ++it->second.count;
  }
  return out;
}

}  // namespace alphamine
