#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "alphamine/archive.hpp"
#include "support/reports.hpp"

using namespace alphamine;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "alphamine_archive_tests";
  fs::create_directories(dir);
  return dir / name;
}

Archive hundred_records() {
  Archive a;
  const auto s = default_scenario();
  for (int k = 0; k < 100; ++k) {
    const std::string text = "ts_mean(" + std::string(k % 2 ? "close" : "volume") + "," + std::to_string(1 + k % 25) +
                             ")";
    const auto expr = k < 50 ? parse(text) : parse("add(" + text + "," + std::to_string(k) + ".5)");
    auto report = fixtures::valid_report(0.03 + 0.001 * k, fixtures::ramp_behavior(40, 3, k));
    report.behavior.vector[static_cast<std::size_t>(k)] = kMissing;
    if (k % 3 == 0) report.icir = 1e12;
    if (k % 5 == 0) report.diracc.reset();
    REQUIRE(a.try_insert(expr, report, s, "task" + std::to_string(k % 4), k / 10).inserted);
  }
  return a;
}

}  // namespace

TEST_CASE("insertion gates") {
  Archive a;
  const auto s = default_scenario();
  const auto e = parse("ts_mean(close,5)");
  CHECK(a.try_insert(e, fixtures::valid_report(0.06), s).inserted);
  const auto dup = a.try_insert(parse("ts_mean( close , 5 )"), fixtures::valid_report(0.07), s);
  CHECK_FALSE(dup.inserted);
  CHECK(dup.reason == RejectReason::duplicate);

  auto low_cov = fixtures::valid_report(0.06);
  low_cov.coverage = 0.4;
  CHECK(a.try_insert(parse("close"), low_cov, s).reason == RejectReason::coverage);
  auto few = fixtures::valid_report(0.06);
  few.n_periods = 3;
  CHECK(a.try_insert(parse("close"), few, s).reason == RejectReason::insufficient_periods);
  CHECK(a.try_insert(parse("close"), fixtures::valid_report(0.01), s).reason == RejectReason::below_threshold);
  CHECK(a.try_insert(parse("close"), BacktestReport::not_executable("x"), s).reason ==
        RejectReason::not_executable);
  CHECK(a.size() == 1);
  CHECK(a.records()[0].expression == "ts_mean(close,5)");
}

TEST_CASE("elite") {
  Archive a;
  const auto s = default_scenario();
  CHECK(a.elite(3).empty());
  a.try_insert(parse("ts_mean(close,1)"), fixtures::valid_report(0.1), s);
  a.try_insert(parse("ts_mean(close,2)"), fixtures::valid_report(0.3), s);
  a.try_insert(parse("ts_mean(close,3)"), fixtures::valid_report(0.2), s);
  const auto top = a.elite(2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].primary() == 0.3);
  CHECK(top[1].primary() == 0.2);

  Archive tie;
  tie.try_insert(parse("close"), fixtures::valid_report(0.2), s);
  tie.try_insert(parse("volume"), fixtures::valid_report(0.2), s);
  CHECK(tie.elite(1)[0].expression == "close");
}

TEST_CASE("family index") {
  Archive a;
  const auto s = default_scenario();
  const auto e5 = parse("ts_mean(close,5)");
  const auto e10 = parse("ts_mean(close,10)");
  a.try_insert(e5, fixtures::valid_report(0.05), s);
  a.try_insert(e10, fixtures::valid_report(0.08), s);
  const auto sig = signature(e5);
  CHECK(a.family_count(sig.family_hash) == 2);
  CHECK(a.family(sig.family_hash)->best_primary_metric == 0.08);
  CHECK(a.contains_exact(sig.exact_hash));
  CHECK(a.contains_exact(signature(e10).exact_hash));
  CHECK(a.family_count(signature(parse("close")).family_hash) == 0);
  CHECK_FALSE(a.contains_exact(signature(parse("close")).exact_hash));
  CHECK(a.distinct_families() == 1);
}

TEST_CASE("persist and load round trip") {
  const Archive a = hundred_records();
  const auto path = temp_file("round_trip.jsonl");
  a.persist(path);
  const Archive b = Archive::load(path);
  CHECK(b.records() == a.records());
  CHECK(b.family_stats() == a.family_stats());
  CHECK(Archive::rebuild_family_stats(a.records()) == a.family_stats());
}

TEST_CASE("attached log replays to the same archive") {
  const auto path = temp_file("log.jsonl");
  fs::remove(path);
  Archive a;
  a.attach_log(path);
  const auto s = default_scenario();
  a.try_insert(parse("ts_mean(close,5)"), fixtures::valid_report(0.06), s, "t", 3);
  a.try_insert(parse("ts_mean(close,5)"), fixtures::valid_report(0.06), s, "t", 3);
  a.try_insert(parse("rank(volume)"), fixtures::valid_report(0.09), s, "t", 4);
  CHECK(Archive::load(path).records() == a.records());
}

TEST_CASE("truncated file is refused with the line number") {
  const auto path = temp_file("truncated.jsonl");
  hundred_records().persist(path);
  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  text.resize(text.size() - 40);
  {
    std::ofstream out(path, std::ios::trunc);
    out << text;
  }
  try {
    Archive::load(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 100);
  }
}

TEST_CASE("tampered records are refused") {
  const auto path = temp_file("tampered.jsonl");
  Archive a;
  a.try_insert(parse("ts_mean(close,5)"), fixtures::valid_report(0.06), default_scenario());
  auto j = to_json(a.records()[0]);
  j["expression"] = "ts_mean(close,6)";
  {
    std::ofstream out(path, std::ios::trunc);
    out << j.dump() << "\n";
  }
  CHECK_THROWS_AS(Archive::load(path), FormatError);
}

TEST_CASE("empty file loads as an empty archive") {
  const auto path = temp_file("empty.jsonl");
  { std::ofstream out(path, std::ios::trunc); }
  CHECK(Archive::load(path).empty());
  CHECK_THROWS_AS(Archive::load(temp_file("does_not_exist.jsonl")), IoError);
}
