#pragma once

// A small expression language for scalar fields:
//   expr  := term (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
// Names are ambient coordinates x0, x1, ..., the constant pi, and any extra
// symbols the caller binds to variable slots.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"

namespace cbundle {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace dsl {

enum class Kind { Num, Var, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };

struct Ast;
using AstPtr = std::shared_ptr<const Ast>;

struct Ast {
  Kind kind = Kind::Num;
  double value = 0.0;  // Num
  int var = -1;        // Var
  std::string name;    // Var (as written) or Call
  std::vector<AstPtr> args;
};

/// Extra symbols: name -> variable slot.
using Symbols = std::map<std::string, int, std::less<>>;

namespace detail {

inline int arity(std::string_view f) {
  if (f == "sin" || f == "cos" || f == "exp" || f == "log" || f == "sqrt") return 1;
  if (f == "atan2") return 2;
  return -1;
}

inline AstPtr node(Kind k, std::vector<AstPtr> args = {}) {
  auto a = std::make_shared<Ast>();
  a->kind = k;
  a->args = std::move(args);
  return a;
}

class Parser {
 public:
  Parser(std::string_view s, const Symbols& syms) : s_(s), syms_(syms) {}

  AstPtr parse() {
    AstPtr e = expr();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  const Symbols& syms_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, i_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  AstPtr expr() {
    AstPtr a = term();
    for (;;) {
      if (eat('+'))
        a = node(Kind::Add, {a, term()});
      else if (eat('-'))
        a = node(Kind::Sub, {a, term()});
      else
        return a;
    }
  }
  AstPtr term() {
    AstPtr a = unary();
    for (;;) {
      if (eat('*'))
        a = node(Kind::Mul, {a, unary()});
      else if (eat('/'))
        a = node(Kind::Div, {a, unary()});
      else
        return a;
    }
  }
  AstPtr unary() {
    if (eat('-')) return node(Kind::Neg, {unary()});
    return power();
  }
  AstPtr power() {
    AstPtr a = atom();
    if (eat('^')) return node(Kind::Pow, {a, unary()});
    return a;
  }
  AstPtr atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      AstPtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }
  AstPtr number() {
    const std::size_t start = i_;
    auto digits = [&] {
      const std::size_t b = i_;
      while (i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '9') ++i_;
      return i_ > b;
    };
    bool any = digits();
    if (i_ < s_.size() && s_[i_] == '.') {
      ++i_;
      any = digits() || any;
    }
    if (!any) fail("malformed number", start);
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      ++i_;
      if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
      if (!digits()) fail("malformed exponent");
    }
    auto a = std::make_shared<Ast>();
    a->kind = Kind::Num;
    const auto r = std::from_chars(s_.data() + start, s_.data() + i_, a->value);
    if (r.ec != std::errc() || !std::isfinite(a->value)) fail("number out of range", start);
    return a;
  }
  AstPtr name() {
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    const std::string id(s_.substr(start, i_ - start));
    skip();
    if (i_ < s_.size() && s_[i_] == '(') {
      const int n = arity(id);
      if (n < 0) fail("unknown function '" + id + "'", start);
      ++i_;
      auto a = std::make_shared<Ast>();
      a->kind = Kind::Call;
      a->name = id;
      a->args.push_back(expr());
      while (eat(',')) a->args.push_back(expr());
      if (!eat(')')) fail("expected ')'");
      if (static_cast<int>(a->args.size()) != n)
        fail(id + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"), start);
      return a;
    }
    auto a = std::make_shared<Ast>();
    a->name = id;
    if (id == "pi") {
      a->kind = Kind::Pi;
      return a;
    }
    if (auto it = syms_.find(id); it != syms_.end()) {
      a->kind = Kind::Var;
      a->var = it->second;
      return a;
    }
    if (id.size() > 1 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos &&
        (id.size() == 2 || id[1] != '0')) {
      a->kind = Kind::Var;
      const auto r = std::from_chars(id.data() + 1, id.data() + id.size(), a->var);
      if (r.ec != std::errc()) fail("coordinate index out of range", start);
      return a;
    }
    if (arity(id) >= 0) fail("function '" + id + "' needs arguments", start);
    fail("unknown identifier '" + id + "'", start);
  }
};

inline int prec(Kind k) {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

inline std::string number_text(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void print(const Ast& a, std::string& out);

inline void print_at(const Ast& a, int min_prec, std::string& out) {
  const bool paren = prec(a.kind) < min_prec;
  if (paren) out += '(';
  print(a, out);
  if (paren) out += ')';
}

inline void print(const Ast& a, std::string& out) {
  switch (a.kind) {
    case Kind::Num: out += number_text(a.value); return;
    case Kind::Var: out += a.name.empty() ? "x" + std::to_string(a.var) : a.name; return;
    case Kind::Pi: out += "pi"; return;
    case Kind::Neg:
      out += '-';
      print_at(*a.args[0], 3, out);
      return;
    case Kind::Add:
    case Kind::Sub:
      print_at(*a.args[0], 1, out);
      out += a.kind == Kind::Add ? " + " : " - ";
      print_at(*a.args[1], 2, out);
      return;
    case Kind::Mul:
    case Kind::Div:
      print_at(*a.args[0], 2, out);
      out += a.kind == Kind::Mul ? "*" : "/";
      print_at(*a.args[1], 3, out);
      return;
    case Kind::Pow:
      print_at(*a.args[0], 5, out);
      out += '^';
      print_at(*a.args[1], 3, out);
      return;
    case Kind::Call:
      out += a.name;
      out += '(';
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        print(*a.args[i], out);
      }
      out += ')';
      return;
  }
}

inline void sexpr(const Ast& a, std::string& out) {
  auto call = [&](const char* f) {
    out += f;
    out += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) out += ',';
      sexpr(*a.args[i], out);
    }
    out += ')';
  };
  switch (a.kind) {
    case Kind::Num:
    case Kind::Var:
    case Kind::Pi: print(a, out); return;
    case Kind::Neg: call("neg"); return;
    case Kind::Add: call("add"); return;
    case Kind::Sub: call("sub"); return;
    case Kind::Mul: call("mul"); return;
    case Kind::Div: call("div"); return;
    case Kind::Pow: call("pow"); return;
    case Kind::Call: call(a.name.c_str()); return;
  }
}

inline void check_div(double d) {
  if (std::abs(d) < 1e-300) throw DomainError("division by " + number_text(d));
}

}  // namespace detail

inline AstPtr parse_expression(std::string_view text, const Symbols& symbols = {}) {
  return detail::Parser(text, symbols).parse();
}

/// Canonical infix form: minimal parentheses, "a + b", "a*b", "f(a, b)".
inline std::string print(const Ast& a) {
  std::string out;
  detail::print(a, out);
  return out;
}

/// Prefix form, e.g. add(mul(x0,x1),pow(x2,2)).
inline std::string to_sexpr(const Ast& a) {
  std::string out;
  detail::sexpr(a, out);
  return out;
}

inline bool equal(const Ast& a, const Ast& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  if (a.kind == Kind::Num && a.value != b.value) return false;
  if (a.kind == Kind::Var && a.var != b.var) return false;
  if (a.kind == Kind::Call && a.name != b.name) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

/// Largest variable slot referenced, -1 if none.
inline int max_var(const Ast& a) {
  int m = a.kind == Kind::Var ? a.var : -1;
  for (const auto& c : a.args) m = std::max(m, max_var(*c));
  return m;
}

/// Direct evaluation with domain checks.
inline double evaluate(const Ast& a, std::span<const double> x) {
  auto arg = [&](std::size_t i) { return evaluate(*a.args[i], x); };
  switch (a.kind) {
    case Kind::Num: return a.value;
    case Kind::Pi: return std::numbers::pi;
    case Kind::Var:
      if (a.var < 0 || static_cast<std::size_t>(a.var) >= x.size())
        throw ConstraintViolation("variable " + std::to_string(a.var) + " outside the point");
      return x[a.var];
    case Kind::Neg: return -arg(0);
    case Kind::Add: return arg(0) + arg(1);
    case Kind::Sub: return arg(0) - arg(1);
    case Kind::Mul: return arg(0) * arg(1);
    case Kind::Div: {
      const double n = arg(0), d = arg(1);
      detail::check_div(d);
      return n / d;
    }
    case Kind::Pow: {
      const double b = arg(0), e = arg(1);
      const double v = std::pow(b, e);
      if (!std::isfinite(v)) throw DomainError("pow(" + detail::number_text(b) + ", " + detail::number_text(e) + ")");
      return v;
    }
    case Kind::Call: {
      const double v = arg(0);
      if (a.name == "sin") return std::sin(v);
      if (a.name == "cos") return std::cos(v);
      if (a.name == "exp") return std::exp(v);
      if (a.name == "log") {
        if (!(v > 0)) throw DomainError("log of " + detail::number_text(v));
        return std::log(v);
      }
      if (a.name == "sqrt") {
        if (v < 0) throw DomainError("sqrt of " + detail::number_text(v));
        return std::sqrt(v);
      }
      return std::atan2(v, arg(1));
    }
  }
  return 0.0;
}

/// Lower to a field with symbolic derivatives.
inline Expr to_expr(const Ast& a) {
  auto arg = [&](std::size_t i) { return to_expr(*a.args[i]); };
  switch (a.kind) {
    case Kind::Num: return Expr(a.value);
    case Kind::Pi: return Expr(std::numbers::pi);
    case Kind::Var: return Expr::var(a.var);
    case Kind::Neg: return -arg(0);
    case Kind::Add: return arg(0) + arg(1);
    case Kind::Sub: return arg(0) - arg(1);
    case Kind::Mul: return arg(0) * arg(1);
    case Kind::Div: return arg(0) / arg(1);
    case Kind::Pow: return pow(arg(0), arg(1));
    case Kind::Call:
      if (a.name == "sin") return sin(arg(0));
      if (a.name == "cos") return cos(arg(0));
      if (a.name == "exp") return exp(arg(0));
      if (a.name == "log") return log(arg(0));
      if (a.name == "sqrt") return sqrt(arg(0));
      return atan2(arg(0), arg(1));
  }
  return Expr(0.0);
}

}  // namespace dsl
}  // namespace cbundle
