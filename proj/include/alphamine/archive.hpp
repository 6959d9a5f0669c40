#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "alphamine/backtest.hpp"
#include "alphamine/dsl.hpp"
#include "alphamine/hashing.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

// Scalar part of a BacktestReport kept with each archived factor.
struct ReportSummary {
  std::optional<double> diracc;
  std::optional<double> ic;
  std::optional<double> rankic;
  std::optional<double> icir;
  double coverage = 0.0;
  std::size_t n_periods = 0;
  bool valid = false;
  std::optional<double> primary_metric_value;

  static ReportSummary of(const BacktestReport& r);
  bool operator==(const ReportSummary&) const = default;
};

struct ArchiveRecord {
  std::string expression;  // canonical text
  Digest exact_hash;
  Digest family_hash;
  ReportSummary report;
  BehaviorProfile behavior;
  std::string task_id;
  std::int64_t round = 0;
  std::uint64_t inserted_at = 0;  // insertion ordinal

  double primary() const { return report.primary_metric_value.value_or(0.0); }
  bool operator==(const ArchiveRecord&) const = default;
};

nlohmann::json to_json(const ArchiveRecord& r);
ArchiveRecord record_from_json(const nlohmann::json& j);

struct FamilyStats {
  Digest family_hash;
  std::size_t count = 0;
  double best_primary_metric = 0.0;

  bool operator==(const FamilyStats&) const = default;
};

enum class RejectReason { not_executable, coverage, insufficient_periods, below_threshold, duplicate };
std::string to_string(RejectReason r);

struct InsertOutcome {
  bool inserted = false;
  std::optional<RejectReason> reason;
};

/// The mined factor database: append-only records plus exact-hash and family
/// indexes. Single writer, many readers.
class Archive {
 public:
  Archive();
  Archive(Archive&& other) noexcept;
  Archive& operator=(Archive&& other) noexcept;
  Archive(const Archive& other);
  Archive& operator=(const Archive& other);
  ~Archive();

  // Refuses the whole file on the first corrupt line (FormatError with line number).
  static Archive load(const std::filesystem::path& path);
  void persist(const std::filesystem::path& path) const;

  // Subsequent insertions are appended (and flushed) to `path` before the
  // in-memory state changes.
  void attach_log(const std::filesystem::path& path);

  /// Inserted iff the report is valid, its primary metric reaches the
  /// quality threshold and the canonical form is new.
  InsertOutcome try_insert(const FactorExpr& candidate, const BacktestReport& report,
                           const Scenario& scenario, const std::string& task_id = {},
                           std::int64_t round = 0);

  // Top-m by primary metric, ties to the earlier insertion.
  std::vector<ArchiveRecord> elite(std::size_t m) const;

  std::size_t family_count(const Digest& family_hash) const;
  std::optional<FamilyStats> family(const Digest& family_hash) const;
  bool contains_exact(const Digest& exact_hash) const;

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t distinct_families() const;
  std::vector<ArchiveRecord> records() const;
  std::map<Digest, FamilyStats> family_stats() const;

  static std::map<Digest, FamilyStats> rebuild_family_stats(const std::vector<ArchiveRecord>& records);

 private:
  void index_record(ArchiveRecord record);

  std::vector<ArchiveRecord> records_;
  std::unordered_map<Digest, std::size_t, DigestHash> exact_index_;
  std::map<Digest, FamilyStats> families_;
  std::optional<std::filesystem::path> log_path_;
  std::uint64_t next_ordinal_ = 0;
  std::unique_ptr<std::shared_mutex> mutex_;
};

}  // namespace alphamine
