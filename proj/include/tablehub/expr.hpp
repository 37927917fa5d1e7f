#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/table.hpp"
#include "tablehub/value.hpp"

namespace tablehub {

enum class UnaryOp { Neg, Not };

enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

enum class Func { Abs, Round, Floor, Ceil, Len, Lower, Upper, Trim, Concat, If, Coalesce, Year, Month, Day };

constexpr std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

constexpr std::string_view to_string(Func f) {
  switch (f) {
    case Func::Abs: return "abs";
    case Func::Round: return "round";
    case Func::Floor: return "floor";
    case Func::Ceil: return "ceil";
    case Func::Len: return "len";
    case Func::Lower: return "lower";
    case Func::Upper: return "upper";
    case Func::Trim: return "trim";
    case Func::Concat: return "concat";
    case Func::If: return "if";
    case Func::Coalesce: return "coalesce";
    case Func::Year: return "year";
    case Func::Month: return "month";
    case Func::Day: return "day";
  }
  return "?";
}

inline std::optional<Func> parse_func_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Func::Day); ++i)
    if (to_string(static_cast<Func>(i)) == s) return static_cast<Func>(i);
  return std::nullopt;
}

/// Accepted argument counts: [min, max], max = SIZE_MAX for variadic.
constexpr std::pair<std::size_t, std::size_t> arity(Func f) {
  switch (f) {
    case Func::If: return {3, 3};
    case Func::Concat:
    case Func::Coalesce: return {2, SIZE_MAX};
    case Func::Round: return {1, 2};
    default: return {1, 1};
  }
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  Value value;
};
struct ColumnRef {
  std::string name;
};
struct Unary {
  UnaryOp op;
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Call {
  Func fn;
  std::vector<ExprPtr> args;
};

struct Expr {
  std::variant<Literal, ColumnRef, Unary, Binary, Call> node;
  std::size_t pos = 0;  // byte offset in the source, 0 for built nodes
};

namespace ex {
inline ExprPtr lit(Value v) { return std::make_shared<const Expr>(Expr{Literal{std::move(v)}}); }
inline ExprPtr col(std::string name) { return std::make_shared<const Expr>(Expr{ColumnRef{std::move(name)}}); }
inline ExprPtr unary(UnaryOp op, ExprPtr e) { return std::make_shared<const Expr>(Expr{Unary{op, std::move(e)}}); }
inline ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(l), std::move(r)}});
}
inline ExprPtr call(Func f, std::vector<ExprPtr> args) {
  return std::make_shared<const Expr>(Expr{Call{f, std::move(args)}});
}
}  // namespace ex

/// Structural equality; source positions are ignored.
inline bool same_expr(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) {
          return same_value(x.value, y.value);
        } else if constexpr (std::is_same_v<T, ColumnRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.op == y.op && same_expr(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && same_expr(*x.lhs, *y.lhs) && same_expr(*x.rhs, *y.rhs);
        } else {
          if (x.fn != y.fn || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!same_expr(*x.args[i], *y.args[i])) return false;
          return true;
        }
      },
      a.node);
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace detail {

enum class Tok { End, Ident, QuotedIdent, Int, Float, String, LParen, RParen, Comma, Op, Keyword };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, decoded string, operator or keyword spelling
  std::size_t pos = 0;
};

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_keyword(std::string_view s) {
  return s == "and" || s == "or" || s == "not" || s == "true" || s == "false" || s == "null";
}

[[noreturn]] inline void syntax_error(std::size_t pos, const std::string& expected) {
  throw Error(Errc::SyntaxError, "at position " + std::to_string(pos) + ": expected " + expected,
              expected, pos);
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      std::string word(src.substr(start, i - start));
      out.push_back({is_keyword(word) ? Tok::Keyword : Tok::Ident, std::move(word), start});
      continue;
    }
    if (c == '`') {
      std::string name;
      ++i;
      while (true) {
        if (i >= src.size()) syntax_error(start, "closing '`'");
        if (src[i] == '`') {
          if (i + 1 < src.size() && src[i + 1] == '`') {
            name.push_back('`');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        name.push_back(src[i++]);
      }
      if (name.empty()) syntax_error(start, "non-empty quoted identifier");
      out.push_back({Tok::QuotedIdent, std::move(name), start});
      continue;
    }
    if (is_digit(c)) {
      bool is_float = false;
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        is_float = true;
        ++i;
        if (i >= src.size() || !is_digit(src[i])) syntax_error(i, "digit after '.'");
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        is_float = true;
        ++i;
        if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
        if (i >= src.size() || !is_digit(src[i])) syntax_error(i, "exponent digits");
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && is_ident_start(src[i])) syntax_error(i, "operator after number");
      out.push_back({is_float ? Tok::Float : Tok::Int, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (c == '"') {
      std::string s;
      ++i;
      while (true) {
        if (i >= src.size()) syntax_error(start, "closing '\"'");
        char d = src[i];
        if (d == '"') {
          ++i;
          break;
        }
        if (d == '\\') {
          if (i + 1 >= src.size()) syntax_error(i, "escape character");
          char e = src[i + 1];
          switch (e) {
            case '"': s.push_back('"'); break;
            case '\\': s.push_back('\\'); break;
            case 'n': s.push_back('\n'); break;
            case 't': s.push_back('\t'); break;
            case 'r': s.push_back('\r'); break;
            case '0': s.push_back('\0'); break;
            default: syntax_error(i, "one of \\\" \\\\ \\n \\t \\r \\0");
          }
          i += 2;
          continue;
        }
        s.push_back(d);
        ++i;
      }
      out.push_back({Tok::String, std::move(s), start});
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::LParen, "(", start}); ++i; continue;
      case ')': out.push_back({Tok::RParen, ")", start}); ++i; continue;
      case ',': out.push_back({Tok::Comma, ",", start}); ++i; continue;
      case '+': case '-': case '*': case '/': case '%':
        out.push_back({Tok::Op, std::string(1, c), start});
        ++i;
        continue;
      case '=': case '!': case '<': case '>': {
        bool eq_next = i + 1 < src.size() && src[i + 1] == '=';
        if (eq_next) {
          out.push_back({Tok::Op, std::string(src.substr(i, 2)), start});
          i += 2;
          continue;
        }
        if (c == '<' || c == '>') {
          out.push_back({Tok::Op, std::string(1, c), start});
          ++i;
          continue;
        }
        syntax_error(start, c == '=' ? "'==' (use == for equality)" : "'!='");
      }
      default:
        syntax_error(start, "an expression token");
    }
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : tokens_(tokenize(src)) {}

  ExprPtr parse() {
    auto e = parse_or();
    if (peek().kind != Tok::End) syntax_error(peek().pos, "end of expression");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool at_keyword(std::string_view kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }
  bool at_op(std::string_view op) const { return peek().kind == Tok::Op && peek().text == op; }

  static ExprPtr make(auto node, std::size_t pos) {
    return std::make_shared<const Expr>(Expr{std::move(node), pos});
  }

  ExprPtr parse_or() {
    auto lhs = parse_and();
    while (at_keyword("or")) {
      auto pos = advance().pos;
      lhs = make(Binary{BinaryOp::Or, lhs, parse_and()}, pos);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    auto lhs = parse_not();
    while (at_keyword("and")) {
      auto pos = advance().pos;
      lhs = make(Binary{BinaryOp::And, lhs, parse_not()}, pos);
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at_keyword("not")) {
      auto pos = advance().pos;
      return make(Unary{UnaryOp::Not, parse_not()}, pos);
    }
    return parse_comparison();
  }

  std::optional<BinaryOp> comparison_op() const {
    if (peek().kind != Tok::Op) return std::nullopt;
    const auto& t = peek().text;
    if (t == "==") return BinaryOp::Eq;
    if (t == "!=") return BinaryOp::Ne;
    if (t == "<") return BinaryOp::Lt;
    if (t == "<=") return BinaryOp::Le;
    if (t == ">") return BinaryOp::Gt;
    if (t == ">=") return BinaryOp::Ge;
    return std::nullopt;
  }

  ExprPtr parse_comparison() {
    auto lhs = parse_additive();
    if (auto op = comparison_op()) {
      auto pos = advance().pos;
      auto rhs = parse_additive();
      if (comparison_op())
        syntax_error(peek().pos, "no chained comparison (comparisons are non-associative)");
      return make(Binary{*op, lhs, rhs}, pos);
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (at_op("+") || at_op("-")) {
      const auto& t = advance();
      lhs = make(Binary{t.text == "+" ? BinaryOp::Add : BinaryOp::Sub, lhs, parse_multiplicative()}, t.pos);
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    auto lhs = parse_unary();
    while (at_op("*") || at_op("/") || at_op("%")) {
      const auto& t = advance();
      BinaryOp op = t.text == "*" ? BinaryOp::Mul : (t.text == "/" ? BinaryOp::Div : BinaryOp::Mod);
      lhs = make(Binary{op, lhs, parse_unary()}, t.pos);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_op("-")) {
      auto pos = advance().pos;
      // A minus directly before a numeric literal folds into the literal.
      if (peek().kind == Tok::Int) return int_literal(advance(), true, pos);
      if (peek().kind == Tok::Float) return float_literal(advance(), true, pos);
      return make(Unary{UnaryOp::Neg, parse_unary()}, pos);
    }
    return parse_primary();
  }

  ExprPtr int_literal(const Token& t, bool negate, std::size_t pos) {
    auto v = parse_int(negate ? "-" + t.text : t.text);
    if (!v) syntax_error(t.pos, "integer literal within 64-bit range");
    return make(Literal{Value{*v}}, pos);
  }

  ExprPtr float_literal(const Token& t, bool negate, std::size_t pos) {
    auto v = parse_float(t.text);
    if (!v || !std::isfinite(*v)) syntax_error(t.pos, "finite float literal");
    return make(Literal{Value{negate ? -*v : *v}}, pos);
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: advance(); return int_literal(t, false, t.pos);
      case Tok::Float: advance(); return float_literal(t, false, t.pos);
      case Tok::String: advance(); return make(Literal{Value{t.text}}, t.pos);
      case Tok::QuotedIdent: advance(); return make(ColumnRef{t.text}, t.pos);
      case Tok::Keyword:
        if (t.text == "true" || t.text == "false") {
          advance();
          return make(Literal{Value{t.text == "true"}}, t.pos);
        }
        if (t.text == "null") {
          advance();
          return make(Literal{Value{Null{}}}, t.pos);
        }
        syntax_error(t.pos, "an operand");
      case Tok::Ident: {
        advance();
        if (peek().kind != Tok::LParen) return make(ColumnRef{t.text}, t.pos);
        auto fn = parse_func_name(t.text);
        if (!fn) syntax_error(t.pos, "a known function name");
        advance();
        std::vector<ExprPtr> args;
        if (peek().kind != Tok::RParen) {
          args.push_back(parse_or());
          while (peek().kind == Tok::Comma) {
            advance();
            args.push_back(parse_or());
          }
        }
        if (peek().kind != Tok::RParen) syntax_error(peek().pos, "')' or ','");
        advance();
        auto [lo, hi] = arity(*fn);
        if (args.size() < lo || args.size() > hi)
          syntax_error(t.pos, std::string(to_string(*fn)) + " with " +
                                  (lo == hi ? std::to_string(lo)
                                            : (hi == SIZE_MAX ? "at least " + std::to_string(lo)
                                                              : std::to_string(lo) + " or " + std::to_string(hi))) +
                                  " arguments");
        return make(Call{*fn, std::move(args)}, t.pos);
      }
      case Tok::LParen: {
        advance();
        auto e = parse_or();
        if (peek().kind != Tok::RParen) syntax_error(peek().pos, "')'");
        advance();
        return e;
      }
      default:
        syntax_error(t.pos, "an operand");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expr(std::string_view src) { return detail::ExprParser(src).parse(); }

// ---------------------------------------------------------------------------
// Canonical renderer: fully parenthesized, parses back to the same tree.

namespace detail {

inline std::string quote_string_literal(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\0': out += "\\0"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

inline std::string render_identifier(std::string_view name) {
  bool bare = !name.empty() && is_ident_start(name.front()) && !is_keyword(name);
  for (char c : name) bare = bare && is_ident_char(c);
  if (bare) return std::string(name);
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

}  // namespace detail

inline std::string render_expr(const Expr& e) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          if (auto* s = std::get_if<std::string>(&x.value)) return detail::quote_string_literal(*s);
          if (auto* d = std::get_if<Date>(&x.value)) return detail::quote_string_literal(format_date(*d));
          if (auto* f = std::get_if<double>(&x.value); f && !std::isfinite(*f)) return "null";
          if (is_null(x.value)) return "null";
          return *render_text(x.value);
        } else if constexpr (std::is_same_v<T, ColumnRef>) {
          return detail::render_identifier(x.name);
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (x.op == UnaryOp::Not) return "(not " + render_expr(*x.operand) + ")";
          // "-5" would parse back as a single negative literal.
          if (std::holds_alternative<Literal>(x.operand->node)) return "(-(" + render_expr(*x.operand) + "))";
          return "(-" + render_expr(*x.operand) + ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          return "(" + render_expr(*x.lhs) + " " + std::string(to_string(x.op)) + " " +
                 render_expr(*x.rhs) + ")";
        } else {
          std::string out(to_string(x.fn));
          out.push_back('(');
          for (std::size_t i = 0; i < x.args.size(); ++i) {
            if (i) out += ", ";
            out += render_expr(*x.args[i]);
          }
          out.push_back(')');
          return out;
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Type checking and compilation

namespace detail {

/// Static type of a node; nullopt is the type of the `null` literal, which
/// unifies with everything.
using StaticType = std::optional<DType>;

inline std::string type_name(StaticType t) { return t ? std::string(to_string(*t)) : "null"; }

[[noreturn]] inline void type_mismatch(const Expr& node, StaticType found, const std::string& expected) {
  throw Error(Errc::TypeMismatch,
              "'" + render_expr(node) + "' at position " + std::to_string(node.pos) + ": found " +
                  type_name(found) + ", expected " + expected,
              render_expr(node), node.pos);
}

inline std::optional<StaticType> unify(StaticType a, StaticType b) {
  if (!a) return b;
  if (!b) return a;
  if (*a == *b) return a;
  if (is_numeric(*a) && is_numeric(*b)) return StaticType{DType::Float};
  return std::nullopt;
}

struct Node {
  enum class Kind { Literal, Column, Unary, Binary, Call } kind;
  StaticType type;
  Value literal;
  std::size_t column = 0;
  UnaryOp uop{};
  BinaryOp bop{};
  Func fn{};
  std::vector<Node> kids;
};

class Compiler {
 public:
  explicit Compiler(const Schema& schema) : schema_(schema) {}

  Node compile(const Expr& e) {
    return std::visit([&](const auto& x) { return compile_node(e, x); }, e.node);
  }

 private:
  Node compile_node(const Expr&, const Literal& x) {
    Node n{Node::Kind::Literal, dtype_of(x.value), x.value};
    return n;
  }

  Node compile_node(const Expr&, const ColumnRef& x) {
    for (std::size_t i = 0; i < schema_.size(); ++i)
      if (schema_[i].name == x.name) {
        Node n{Node::Kind::Column, schema_[i].dtype};
        n.column = i;
        return n;
      }
    throw Error(Errc::UnknownColumn, "unknown column '" + x.name + "'", x.name);
  }

  Node compile_node(const Expr& e, const Unary& x) {
    Node n{Node::Kind::Unary};
    n.uop = x.op;
    n.kids.push_back(compile(*x.operand));
    StaticType t = n.kids[0].type;
    if (x.op == UnaryOp::Neg) {
      if (t && !is_numeric(*t)) type_mismatch(*x.operand, t, "int or float");
      n.type = t;
    } else {
      if (t && *t != DType::Bool) type_mismatch(*x.operand, t, "bool");
      n.type = DType::Bool;
    }
    (void)e;
    return n;
  }

  Node compile_node(const Expr& e, const Binary& x) {
    Node n{Node::Kind::Binary};
    n.bop = x.op;
    n.kids.push_back(compile(*x.lhs));
    n.kids.push_back(compile(*x.rhs));
    StaticType l = n.kids[0].type, r = n.kids[1].type;
    auto require_numeric = [&](const Expr& side, StaticType t) {
      if (t && !is_numeric(*t)) type_mismatch(side, t, "int or float");
    };
    switch (x.op) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
        require_numeric(*x.lhs, l);
        require_numeric(*x.rhs, r);
        n.type = *unify(l, r);
        break;
      case BinaryOp::Div:
        require_numeric(*x.lhs, l);
        require_numeric(*x.rhs, r);
        n.type = DType::Float;
        break;
      case BinaryOp::Mod:
        if (l && *l != DType::Int) type_mismatch(*x.lhs, l, "int");
        if (r && *r != DType::Int) type_mismatch(*x.rhs, r, "int");
        n.type = DType::Int;
        break;
      case BinaryOp::Eq:
      case BinaryOp::Ne:
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
        if (!unify(l, r)) type_mismatch(*x.rhs, r, type_name(l) + "-comparable operand");
        n.type = DType::Bool;
        break;
      case BinaryOp::And:
      case BinaryOp::Or:
        if (l && *l != DType::Bool) type_mismatch(*x.lhs, l, "bool");
        if (r && *r != DType::Bool) type_mismatch(*x.rhs, r, "bool");
        n.type = DType::Bool;
        break;
    }
    (void)e;
    return n;
  }

  Node compile_node(const Expr& e, const Call& x) {
    Node n{Node::Kind::Call};
    n.fn = x.fn;
    auto [lo, hi] = arity(x.fn);
    if (x.args.size() < lo || x.args.size() > hi)
      type_mismatch(e, std::nullopt, std::string(to_string(x.fn)) + " with valid arity");
    for (const auto& a : x.args) n.kids.push_back(compile(*a));
    auto arg_type = [&](std::size_t i) { return n.kids[i].type; };
    auto expect = [&](std::size_t i, DType t) {
      if (arg_type(i) && *arg_type(i) != t) type_mismatch(*x.args[i], arg_type(i), std::string(to_string(t)));
    };
    switch (x.fn) {
      case Func::Abs:
      case Func::Floor:
      case Func::Ceil:
        if (arg_type(0) && !is_numeric(*arg_type(0))) type_mismatch(*x.args[0], arg_type(0), "int or float");
        n.type = arg_type(0) ? arg_type(0) : StaticType{DType::Float};
        break;
      case Func::Round:
        if (arg_type(0) && !is_numeric(*arg_type(0))) type_mismatch(*x.args[0], arg_type(0), "int or float");
        if (x.args.size() == 2) expect(1, DType::Int);
        n.type = arg_type(0) ? arg_type(0) : StaticType{DType::Float};
        break;
      case Func::Len:
        expect(0, DType::Text);
        n.type = DType::Int;
        break;
      case Func::Lower:
      case Func::Upper:
      case Func::Trim:
        expect(0, DType::Text);
        n.type = DType::Text;
        break;
      case Func::Concat:
        for (std::size_t i = 0; i < x.args.size(); ++i) expect(i, DType::Text);
        n.type = DType::Text;
        break;
      case Func::If: {
        expect(0, DType::Bool);
        auto t = unify(arg_type(1), arg_type(2));
        if (!t) type_mismatch(*x.args[2], arg_type(2), type_name(arg_type(1)) + "-compatible branch");
        n.type = *t;
        break;
      }
      case Func::Coalesce: {
        StaticType t;
        for (std::size_t i = 0; i < x.args.size(); ++i) {
          auto u = unify(t, arg_type(i));
          if (!u) type_mismatch(*x.args[i], arg_type(i), type_name(t) + "-compatible argument");
          t = *u;
        }
        n.type = t;
        break;
      }
      case Func::Year:
      case Func::Month:
      case Func::Day:
        expect(0, DType::Date);
        n.type = DType::Int;
        break;
    }
    return n;
  }

  const Schema& schema_;
};

}  // namespace detail

/// Result dtype of `e` over `schema`. An expression that can only be null
/// (e.g. `null`) types as Text.
inline DType typecheck(const Expr& e, const Schema& schema) {
  return detail::Compiler(schema).compile(e).type.value_or(DType::Text);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline Value to_static(Value v, StaticType t) {
  if (t && *t == DType::Float) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return Value{static_cast<double>(*i)};
  }
  return v;
}

inline double as_double(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

inline std::string ascii_map(std::string s, bool upper) {
  for (auto& c : s) {
    if (upper && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (!upper && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

inline std::string trim_ascii(const std::string& s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline Value round_value(const Value& x, std::int64_t digits) {
  if (auto* i = std::get_if<std::int64_t>(&x)) {
    if (digits >= 0) return x;
    if (digits < -18) return Value{std::int64_t{0}};
    std::int64_t p = 1;
    for (std::int64_t k = 0; k < -digits; ++k) p *= 10;
    std::int64_t q = *i / p, rem = *i % p;
    if (rem * 2 >= p) ++q;
    else if (rem * 2 <= -p) --q;
    std::int64_t out;
    if (__builtin_mul_overflow(q, p, &out)) return Value{Null{}};
    return Value{out};
  }
  double f = std::get<double>(x);
  if (digits == 0) return Value{std::round(f)};
  if (digits > 300 || digits < -300) return digits > 0 ? x : Value{0.0 * f};
  double scale = std::pow(10.0, static_cast<double>(digits));
  double scaled = f * scale;
  if (!std::isfinite(scaled)) return x;
  return Value{std::round(scaled) / scale};
}

class Evaluator {
 public:
  explicit Evaluator(const Table& t) : table_(t) {}

  Value eval(const Node& n, std::size_t row) const { return to_static(eval_raw(n, row), n.type); }

 private:
  Value eval_raw(const Node& n, std::size_t row) const {
    switch (n.kind) {
      case Node::Kind::Literal: return n.literal;
      case Node::Kind::Column: return table_.cell(row, n.column);
      case Node::Kind::Unary: return eval_unary(n, row);
      case Node::Kind::Binary: return eval_binary(n, row);
      case Node::Kind::Call: return eval_call(n, row);
    }
    return Value{Null{}};
  }

  Value eval_unary(const Node& n, std::size_t row) const {
    Value v = eval(n.kids[0], row);
    if (is_null(v)) return v;
    if (n.uop == UnaryOp::Not) return Value{!std::get<bool>(v)};
    if (auto* i = std::get_if<std::int64_t>(&v)) {
      if (*i == std::numeric_limits<std::int64_t>::min()) return Value{Null{}};
      return Value{-*i};
    }
    return Value{-std::get<double>(v)};
  }

  Value eval_binary(const Node& n, std::size_t row) const {
    if (n.bop == BinaryOp::And || n.bop == BinaryOp::Or) {
      Value l = eval(n.kids[0], row);
      bool is_and = n.bop == BinaryOp::And;
      // Kleene: the dominant value (false for and, true for or) wins over null.
      if (!is_null(l) && std::get<bool>(l) != is_and) return l;
      Value r = eval(n.kids[1], row);
      if (!is_null(r) && std::get<bool>(r) != is_and) return r;
      if (is_null(l) || is_null(r)) return Value{Null{}};
      return Value{is_and};
    }
    Value l = eval(n.kids[0], row), r = eval(n.kids[1], row);
    if (is_null(l) || is_null(r)) return Value{Null{}};
    switch (n.bop) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul: {
        auto* a = std::get_if<std::int64_t>(&l);
        auto* b = std::get_if<std::int64_t>(&r);
        if (a && b) {
          std::int64_t out;
          bool overflow = n.bop == BinaryOp::Add   ? __builtin_add_overflow(*a, *b, &out)
                          : n.bop == BinaryOp::Sub ? __builtin_sub_overflow(*a, *b, &out)
                                                   : __builtin_mul_overflow(*a, *b, &out);
          if (overflow) return Value{Null{}};
          return Value{out};
        }
        double x = as_double(l), y = as_double(r);
        return Value{n.bop == BinaryOp::Add ? x + y : (n.bop == BinaryOp::Sub ? x - y : x * y)};
      }
      case BinaryOp::Div: {
        double y = as_double(r);
        if (y == 0.0) return Value{Null{}};
        return Value{as_double(l) / y};
      }
      case BinaryOp::Mod: {
        auto a = std::get<std::int64_t>(l), b = std::get<std::int64_t>(r);
        if (b == 0) return Value{Null{}};
        if (b == -1) return Value{std::int64_t{0}};
        return Value{a % b};
      }
      default: {
        auto c = compare_values(l, r);
        switch (n.bop) {
          case BinaryOp::Eq: return Value{c == 0};
          case BinaryOp::Ne: return Value{c != 0};
          case BinaryOp::Lt: return Value{c < 0};
          case BinaryOp::Le: return Value{c <= 0};
          case BinaryOp::Gt: return Value{c > 0};
          default: return Value{c >= 0};
        }
      }
    }
  }

  Value eval_call(const Node& n, std::size_t row) const {
    switch (n.fn) {
      case Func::If: {
        Value c = eval(n.kids[0], row);
        if (is_null(c)) return c;
        return eval(n.kids[std::get<bool>(c) ? 1 : 2], row);
      }
      case Func::Coalesce: {
        for (const auto& k : n.kids) {
          Value v = eval(k, row);
          if (!is_null(v)) return v;
        }
        return Value{Null{}};
      }
      default:
        break;
    }
    std::vector<Value> args;
    args.reserve(n.kids.size());
    for (const auto& k : n.kids) {
      args.push_back(eval(k, row));
      if (is_null(args.back())) return Value{Null{}};
    }
    const Value& a = args[0];
    switch (n.fn) {
      case Func::Abs:
        if (auto* i = std::get_if<std::int64_t>(&a)) {
          if (*i == std::numeric_limits<std::int64_t>::min()) return Value{Null{}};
          return Value{*i < 0 ? -*i : *i};
        }
        return Value{std::fabs(std::get<double>(a))};
      case Func::Round:
        return round_value(a, args.size() == 2 ? std::get<std::int64_t>(args[1]) : 0);
      case Func::Floor:
        if (std::holds_alternative<std::int64_t>(a)) return a;
        return Value{std::floor(std::get<double>(a))};
      case Func::Ceil:
        if (std::holds_alternative<std::int64_t>(a)) return a;
        return Value{std::ceil(std::get<double>(a))};
      case Func::Len:
        return Value{static_cast<std::int64_t>(utf8_length(std::get<std::string>(a)))};
      case Func::Lower: return Value{ascii_map(std::get<std::string>(a), false)};
      case Func::Upper: return Value{ascii_map(std::get<std::string>(a), true)};
      case Func::Trim: return Value{trim_ascii(std::get<std::string>(a))};
      case Func::Concat: {
        std::string out;
        for (const auto& v : args) out += std::get<std::string>(v);
        return Value{std::move(out)};
      }
      case Func::Year: return Value{std::int64_t{std::get<Date>(a).year()}};
      case Func::Month: return Value{std::int64_t{std::get<Date>(a).month()}};
      case Func::Day: return Value{std::int64_t{std::get<Date>(a).day()}};
      default: return Value{Null{}};
    }
  }

  const Table& table_;
};

}  // namespace detail

/// Row-wise evaluation. Typechecks first; runtime failures yield Null cells.
/// A bare column reference returns that column unchanged unless `name` is
/// given; other results are named `name` or "value".
inline Column eval_expr(const Expr& e, const Table& t, std::optional<std::string> name = std::nullopt) {
  auto root = detail::Compiler(t.schema()).compile(e);
  DType out_type = root.type.value_or(DType::Text);
  if (root.kind == detail::Node::Kind::Column) {
    Column c = t.column(root.column);
    if (name) c.name = std::move(*name);
    return c;
  }
  detail::Evaluator ev(t);
  Column out{name ? std::move(*name) : std::string("value"), out_type, {}};
  out.values.reserve(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) out.values.push_back(ev.eval(root, r));
  return out;
}

}  // namespace tablehub
