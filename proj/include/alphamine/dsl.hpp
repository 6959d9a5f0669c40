#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alphamine/errors.hpp"
#include "alphamine/hashing.hpp"
#include "alphamine/scenario.hpp"

namespace alphamine {

/// Node of a factor expression. Value type; children are owned.
struct Expr {
  enum class Kind : std::uint8_t { variable, int_literal, num_literal, call };

  Kind kind = Kind::variable;
  std::string name;  // variable or operator name
  std::int64_t int_value = 0;
  double num_value = 0.0;
  std::vector<Expr> args;

  static Expr variable(std::string name);
  static Expr integer(std::int64_t value);
  static Expr number(double value);
  static Expr call(std::string op, std::vector<Expr> args);

  bool is_literal() const noexcept { return kind == Kind::int_literal || kind == Kind::num_literal; }
  std::size_t depth() const;
  std::size_t node_count() const;

  bool operator==(const Expr&) const = default;
};

// Root of a (validated) formulaic alpha expression.
using FactorExpr = Expr;

// ---------------------------------------------------------------------------
// Operator inventory

enum class OpClass : std::uint8_t { elementwise, time_series, cross_sectional };

struct OperatorInfo {
  std::string_view name;
  std::size_t arity;
  OpClass op_class;
  bool windowed;     // last argument is an integer window literal
  bool commutative;  // arguments sorted during canonicalization
};

std::span<const OperatorInfo> operators();
const OperatorInfo* find_operator(std::string_view name);

// Names usable as `Variable` leaves.
const std::vector<std::string>& known_variables();

// ---------------------------------------------------------------------------
// Text

class ParseError : public InputError {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : InputError("syntax error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// expr := ident | number | ident '(' expr (',' expr)* ')'
FactorExpr parse(std::string_view text);

// Compact form without spaces; parse(print(e)) == e.
std::string print(const Expr& expr);

// print() with every literal replaced by '#'.
std::string print_template(const Expr& expr);

// Shortest text that reparses to the same NumLiteral.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Validation

enum class Violation : std::uint8_t {
  unknown_operator,
  operator_not_allowed,
  arity,
  window_range,
  window_type,
  depth,
  cross_sectional_in_single_asset,
  unknown_variable,
  variable_not_allowed,
  type,
};

std::string to_string(Violation v);

class ValidationError : public InputError {
 public:
  ValidationError(Violation violation, const std::string& what)
      : InputError(what), violation_(violation) {}
  Violation violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

struct ValidationIssue {
  Violation violation;
  std::string message;
};

std::optional<ValidationIssue> find_violation(const Expr& expr, const Scenario& scenario);

// Returns `expr` unchanged when it satisfies every constraint of the scenario;
// throws ValidationError otherwise.
FactorExpr validate(const FactorExpr& expr, const Scenario& scenario);

// parse + validate.
FactorExpr parse_valid(std::string_view text, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Normal form and signatures

/// Deterministic normal form: add/mul arguments sorted by their printed text,
/// neg(neg(x)) -> x. Nothing else is rewritten.
FactorExpr canonicalize(const FactorExpr& expr);

struct Signature {
  Digest exact_hash;   // digest of print(canonicalize(e))
  Digest family_hash;  // digest of print_template(canonicalize(e))

  bool operator==(const Signature&) const = default;
};

Signature signature(const FactorExpr& expr);

}  // namespace alphamine
