#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alphamine/dsl.hpp"
#include "support/fixtures.hpp"

using namespace alphamine;

TEST_CASE("parse") {
  const auto e = parse("rank(ts_mean(return, 5))");
  const auto expected =
      Expr::call("rank", {Expr::call("ts_mean", {Expr::variable("return"), Expr::integer(5)})});
  CHECK(e == expected);
  CHECK(parse("close") == Expr::variable("close"));
  CHECK(parse("neg(1.5)").args[0] == Expr::number(1.5));
}

TEST_CASE("syntax errors carry an offset") {
  try {
    parse("ts_mean(close");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 13);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("close)"), ParseError);
  CHECK_THROWS_AS(parse("f(,)"), ParseError);
}

TEST_CASE("validation") {
  const auto cs = default_scenario();
  const auto single = default_scenario(UniverseMode::single_asset);
  auto violation = [](const std::string& text, const Scenario& s) {
    return find_violation(parse(text), s).value().violation;
  };
  CHECK(violation("ts_mean(close, 0)", cs) == Violation::window_range);
  CHECK(violation("ts_mean(close, 31)", cs) == Violation::window_range);
  CHECK(violation("rank(close)", single) == Violation::cross_sectional_in_single_asset);
  CHECK(violation("foo(close)", cs) == Violation::unknown_operator);
  CHECK(violation("add(close)", cs) == Violation::arity);
  CHECK(violation("ts_mean(close, 2.5)", cs) == Violation::window_type);
  CHECK(violation("ts_mean(close, close)", cs) == Violation::window_type);
  CHECK(violation("price", cs) == Violation::unknown_variable);
  CHECK(violation("5", cs) == Violation::type);
  CHECK_FALSE(find_violation(parse("rank(ts_mean(return, 5))"), cs));
  CHECK_FALSE(find_violation(parse("add(close, 2)"), cs));

  Scenario narrow = cs;
  narrow.allowed_variables = {"close"};
  narrow.allowed_operators = {"neg"};
  CHECK(violation("neg(volume)", narrow) == Violation::variable_not_allowed);
  CHECK(violation("abs(close)", narrow) == Violation::operator_not_allowed);

  Scenario shallow = cs;
  shallow.d_max = 2;
  CHECK(violation("neg(neg(neg(close)))", shallow) == Violation::depth);
  CHECK_THROWS_AS(parse_valid("ts_mean(close, 0)", cs), ValidationError);
}

TEST_CASE("canonicalize") {
  CHECK(print(canonicalize(parse("add(volume, close)"))) == "add(close,volume)");
  CHECK(print(canonicalize(parse("neg(neg(close))"))) == "close");
  CHECK(print(canonicalize(parse("sub(volume, close)"))) == "sub(volume,close)");
}

TEST_CASE("signatures") {
  const auto a = signature(parse("rank(ts_mean(return,5))"));
  CHECK(a == signature(parse("rank( ts_mean( return , 5 ) )")));
  const auto b = signature(parse("rank(ts_mean(return,10))"));
  CHECK(a.exact_hash != b.exact_hash);
  CHECK(a.family_hash == b.family_hash);
  CHECK(signature(parse("add(close,volume)")) == signature(parse("add(volume,close)")));
}

TEST_CASE("print") {
  CHECK(print(Expr::call("rank", {Expr::variable("close")})) == "rank(close)");
  CHECK(print(Expr::integer(5)) == "5");
  CHECK(print_template(parse("ts_mean(close,5)")) == "ts_mean(close,#)");
  CHECK(format_number(0.1) == "0.1");
  CHECK(parse(format_number(1.0)).kind == Expr::Kind::num_literal);
}

TEST_CASE("round trip and canonical idempotence on random ASTs") {
  fixtures::AstGenerator gen(11, 30);
  for (int k = 0; k < 1000; ++k) {
    const Expr e = gen.series(1 + fixtures::below(gen.rng(), 6));
    const std::string text = print(e);
    REQUIRE_MESSAGE(parse(text) == e, text);
    const Expr c = canonicalize(e);
    CHECK(canonicalize(c) == c);
    CHECK(signature(e) == signature(c));
  }
}

TEST_CASE("exact hash equality follows canonical identity") {
  fixtures::AstGenerator gen(12, 5);
  std::map<Digest, std::string> seen;
  for (int k = 0; k < 2000; ++k) {
    const Expr e = gen.series(1 + fixtures::below(gen.rng(), 3));
    const auto sig = signature(e);
    const std::string canon = print(canonicalize(e));
    auto [it, fresh] = seen.emplace(sig.exact_hash, canon);
    if (!fresh) CHECK(it->second == canon);
  }
}
