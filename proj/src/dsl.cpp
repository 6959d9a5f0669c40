#include "alphamine/dsl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace alphamine {

Expr Expr::variable(std::string name) {
  Expr e;
  e.kind = Kind::variable;
  e.name = std::move(name);
  return e;
}

Expr Expr::integer(std::int64_t value) {
  Expr e;
  e.kind = Kind::int_literal;
  e.int_value = value;
  return e;
}

Expr Expr::number(double value) {
  Expr e;
  e.kind = Kind::num_literal;
  e.num_value = value;
  return e;
}

Expr Expr::call(std::string op, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::call;
  e.name = std::move(op);
  e.args = std::move(args);
  return e;
}

std::size_t Expr::depth() const {
  std::size_t d = 0;
  for (const auto& a : args) d = std::max(d, a.depth());
  return d + 1;
}

std::size_t Expr::node_count() const {
  std::size_t n = 1;
  for (const auto& a : args) n += a.node_count();
  return n;
}

namespace {

constexpr std::array<OperatorInfo, 19> kOperators{{
    {"add", 2, OpClass::elementwise, false, true},
    {"sub", 2, OpClass::elementwise, false, false},
    {"mul", 2, OpClass::elementwise, false, true},
    {"div", 2, OpClass::elementwise, false, false},
    {"neg", 1, OpClass::elementwise, false, false},
    {"abs", 1, OpClass::elementwise, false, false},
    {"log", 1, OpClass::elementwise, false, false},
    {"sign", 1, OpClass::elementwise, false, false},
    {"ts_mean", 2, OpClass::time_series, true, false},
    {"ts_std", 2, OpClass::time_series, true, false},
    {"ts_min", 2, OpClass::time_series, true, false},
    {"ts_max", 2, OpClass::time_series, true, false},
    {"ts_sum", 2, OpClass::time_series, true, false},
    {"ts_delta", 2, OpClass::time_series, true, false},
    {"ts_rank", 2, OpClass::time_series, true, false},
    {"delay", 2, OpClass::time_series, true, false},
    {"ts_corr", 3, OpClass::time_series, true, false},
    {"rank", 1, OpClass::cross_sectional, false, false},
    {"zscore", 1, OpClass::cross_sectional, false, false},
}};

}  // namespace

std::span<const OperatorInfo> operators() { return kOperators; }

const OperatorInfo* find_operator(std::string_view name) {
  for (const auto& op : operators()) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

const std::vector<std::string>& known_variables() {
  static const std::vector<std::string> names{"open", "high", "low", "close", "volume", "return"};
  return names;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr std::size_t kMaxNesting = 256;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr(0);
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  Expr parse_expr(std::size_t nesting) {
    if (nesting > kMaxNesting) throw ParseError(pos_, "expression nested too deeply");
    skip_ws();
    if (at_end()) throw ParseError(pos_, "unexpected end of input, expected an expression");
    const char c = text_[pos_];
    if (ident_start(c)) return parse_ident(nesting);
    if (digit(c) || c == '-' || c == '.') return parse_number();
    throw ParseError(pos_, "unknown token '" + std::string(1, c) + "'");
  }

  Expr parse_ident(std::size_t nesting) {
    const std::size_t begin = pos_;
    while (!at_end() && ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(begin, pos_ - begin));
    skip_ws();
    if (at_end() || text_[pos_] != '(') return Expr::variable(std::move(name));
    ++pos_;  // '('
    std::vector<Expr> args;
    while (true) {
      args.push_back(parse_expr(nesting + 1));
      skip_ws();
      if (at_end()) throw ParseError(pos_, "unexpected end of input, expected ',' or ')'");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      throw ParseError(pos_, "expected ',' or ')', found '" + std::string(1, text_[pos_]) + "'");
    }
    return Expr::call(std::move(name), std::move(args));
  }

  Expr parse_number() {
    const std::size_t begin = pos_;
    bool is_int = true;
    if (text_[pos_] == '-') ++pos_;
    const std::size_t digits_begin = pos_;
    while (!at_end() && digit(text_[pos_])) ++pos_;
    if (!at_end() && text_[pos_] == '.') {
      is_int = false;
      ++pos_;
      while (!at_end() && digit(text_[pos_])) ++pos_;
    }
    if (pos_ == digits_begin || (pos_ == digits_begin + 1 && text_[digits_begin] == '.')) {
      throw ParseError(begin, "malformed number");
    }
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      is_int = false;
      ++pos_;
      if (!at_end() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      const std::size_t exp_begin = pos_;
      while (!at_end() && digit(text_[pos_])) ++pos_;
      if (pos_ == exp_begin) throw ParseError(begin, "malformed exponent");
    }
    if (!at_end() && ident_char(text_[pos_])) throw ParseError(pos_, "unknown token after number");
    const std::string_view token = text_.substr(begin, pos_ - begin);
    if (is_int) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(begin, "integer literal out of range");
      }
      return Expr::integer(v);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
      throw ParseError(begin, "numeric literal out of range");
    }
    return Expr::number(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const Expr& e, std::string& out, bool templated) {
  switch (e.kind) {
    case Expr::Kind::variable:
      out += e.name;
      return;
    case Expr::Kind::int_literal:
      out += templated ? "#" : std::to_string(e.int_value);
      return;
    case Expr::Kind::num_literal:
      out += templated ? "#" : format_number(e.num_value);
      return;
    case Expr::Kind::call:
      out += e.name;
      out += '(';
      for (std::size_t k = 0; k < e.args.size(); ++k) {
        if (k > 0) out += ',';
        print_into(e.args[k], out, templated);
      }
      out += ')';
      return;
  }
}

}  // namespace

FactorExpr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string format_number(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string print(const Expr& expr) {
  std::string out;
  print_into(expr, out, false);
  return out;
}

std::string print_template(const Expr& expr) {
  std::string out;
  print_into(expr, out, true);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

std::string to_string(Violation v) {
  switch (v) {
    case Violation::unknown_operator: return "unknown_operator";
    case Violation::operator_not_allowed: return "operator_not_allowed";
    case Violation::arity: return "arity";
    case Violation::window_range: return "window_range";
    case Violation::window_type: return "window_type";
    case Violation::depth: return "depth";
    case Violation::cross_sectional_in_single_asset: return "cross_sectional_in_single_asset";
    case Violation::unknown_variable: return "unknown_variable";
    case Violation::variable_not_allowed: return "variable_not_allowed";
    case Violation::type: return "type";
  }
  return "unknown";
}

namespace {

enum class Ty { series, scalar };

struct Checker {
  const Scenario& scenario;
  std::optional<ValidationIssue> issue;

  bool fail(Violation v, std::string message) {
    if (!issue) issue = ValidationIssue{v, std::move(message)};
    return false;
  }

  bool check(const Expr& e, Ty& ty) {
    switch (e.kind) {
      case Expr::Kind::int_literal:
      case Expr::Kind::num_literal:
        ty = Ty::scalar;
        return true;
      case Expr::Kind::variable: {
        const auto& known = known_variables();
        if (std::find(known.begin(), known.end(), e.name) == known.end()) {
          return fail(Violation::unknown_variable, "unknown variable '" + e.name + "'");
        }
        if (scenario.allowed_variables.count(e.name) == 0) {
          return fail(Violation::variable_not_allowed, "variable '" + e.name + "' is not allowed in scenario '" +
                                                           scenario.name + "'");
        }
        ty = Ty::series;
        return true;
      }
      case Expr::Kind::call:
        return check_call(e, ty);
    }
    return false;
  }

  bool check_call(const Expr& e, Ty& ty) {
    const OperatorInfo* op = find_operator(e.name);
    if (op == nullptr) return fail(Violation::unknown_operator, "unknown operator '" + e.name + "'");
    if (op->op_class == OpClass::cross_sectional && scenario.universe_mode == UniverseMode::single_asset) {
      return fail(Violation::cross_sectional_in_single_asset,
                  "cross-sectional operator '" + e.name + "' is not available in single-asset mode");
    }
    if (scenario.allowed_operators.count(e.name) == 0) {
      return fail(Violation::operator_not_allowed,
                  "operator '" + e.name + "' is not allowed in scenario '" + scenario.name + "'");
    }
    if (e.args.size() != op->arity) {
      return fail(Violation::arity, "operator '" + e.name + "' takes " + std::to_string(op->arity) +
                                        " arguments, got " + std::to_string(e.args.size()));
    }
    const std::size_t series_args = op->windowed ? op->arity - 1 : op->arity;
    if (op->windowed) {
      const Expr& w = e.args.back();
      if (w.kind != Expr::Kind::int_literal) {
        return fail(Violation::window_type, "window of '" + e.name + "' must be an integer literal");
      }
      if (w.int_value < 1 || static_cast<std::uint64_t>(w.int_value) > scenario.w_max) {
        return fail(Violation::window_range, "window " + std::to_string(w.int_value) + " of '" + e.name +
                                                 "' outside [1, " + std::to_string(scenario.w_max) + "]");
      }
    }
    bool any_series = false;
    for (std::size_t k = 0; k < series_args; ++k) {
      Ty arg_ty = Ty::scalar;
      if (!check(e.args[k], arg_ty)) return false;
      if (arg_ty == Ty::series) {
        any_series = true;
      } else if (op->op_class != OpClass::elementwise) {
        return fail(Violation::type, "argument " + std::to_string(k + 1) + " of '" + e.name + "' must be a series");
      }
    }
    ty = any_series ? Ty::series : Ty::scalar;
    return true;
  }
};

}  // namespace

std::optional<ValidationIssue> find_violation(const Expr& expr, const Scenario& scenario) {
  const std::size_t depth = expr.depth();
  if (depth > scenario.d_max) {
    return ValidationIssue{Violation::depth, "expression depth " + std::to_string(depth) + " exceeds " +
                                                 std::to_string(scenario.d_max)};
  }
  Checker checker{scenario, std::nullopt};
  Ty ty = Ty::scalar;
  if (!checker.check(expr, ty)) return checker.issue;
  if (ty != Ty::series) return ValidationIssue{Violation::type, "expression does not reference any variable"};
  return std::nullopt;
}

FactorExpr validate(const FactorExpr& expr, const Scenario& scenario) {
  if (auto issue = find_violation(expr, scenario)) throw ValidationError(issue->violation, issue->message);
  return expr;
}

FactorExpr parse_valid(std::string_view text, const Scenario& scenario) { return validate(parse(text), scenario); }

// ---------------------------------------------------------------------------
// Canonical form

FactorExpr canonicalize(const FactorExpr& expr) {
  if (expr.kind != Expr::Kind::call) return expr;
  Expr out = expr;
  for (auto& a : out.args) a = canonicalize(a);
  if (out.name == "neg" && out.args.size() == 1 && out.args[0].kind == Expr::Kind::call &&
      out.args[0].name == "neg" && out.args[0].args.size() == 1) {
    return out.args[0].args[0];
  }
  const OperatorInfo* op = find_operator(out.name);
  if (op != nullptr && op->commutative) {
    std::vector<std::pair<std::string, Expr>> keyed;
    keyed.reserve(out.args.size());
    for (auto& a : out.args) keyed.emplace_back(print(a), std::move(a));
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (std::size_t k = 0; k < keyed.size(); ++k) out.args[k] = std::move(keyed[k].second);
  }
  return out;
}

Signature signature(const FactorExpr& expr) {
  const FactorExpr c = canonicalize(expr);
  return {Digest::of(print(c)), Digest::of(print_template(c))};
}

}  // namespace alphamine
