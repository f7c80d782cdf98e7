#pragma once

// Scalar fields on ambient coordinates.
//
// A field is an immutable expression DAG over the ambient coordinates
// x0, x1, ...  Differentiation is symbolic for every node kind except
// opaque callables without supplied partials and subtrees explicitly wrapped
// by finite_difference(), which fall back to central differences.  For
// evaluation at many points an expression set is compiled into a Tape, a
// linear instruction list with common subexpressions shared by identity.
//
// Construction (including differentiation, which populates per-node caches)
// is single-writer; compiled tapes are safe to evaluate from many threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbundle/error.hpp"

namespace cbundle {

/// Default central-difference step.
inline constexpr double kDefaultFdStep = 1e-5;

/// Polynomial sum_k c[k] * (t - origin)^k.
struct Poly {
  double origin = 0.0;
  std::vector<double> c;

  double operator()(double t) const {
    const double u = t - origin;
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  Poly derivative() const {
    Poly d{origin, {}};
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(static_cast<double>(k) * c[k]);
    return d;
  }

  /// Antiderivative vanishing at origin.
  Poly antiderivative() const {
    Poly p{origin, {0.0}};
    for (std::size_t k = 0; k < c.size(); ++k) p.c.push_back(c[k] / static_cast<double>(k + 1));
    return p;
  }
};

/// Piecewise polynomial of one variable.  Piece k is used on
/// [knots[k-1], knots[k]); the first and last pieces extend to -inf / +inf.
class Spline {
 public:
  Spline(std::string name, std::vector<double> knots, std::vector<Poly> pieces)
      : name_(std::move(name)), knots_(std::move(knots)), pieces_(std::move(pieces)) {
    if (pieces_.size() != knots_.size() + 1)
      throw ConstraintViolation("spline '" + name_ + "': need knots+1 pieces");
    if (!std::is_sorted(knots_.begin(), knots_.end()))
      throw ConstraintViolation("spline '" + name_ + "': knots must be sorted");
  }

  const std::string& name() const { return name_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Poly>& pieces() const { return pieces_; }

  double operator()(double t) const { return pieces_[piece_index(t)](t); }

  std::size_t piece_index(double t) const {
    return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
  }

  std::shared_ptr<const Spline> derivative() const {
    std::call_once(derivative_once_, [this] {
      std::vector<Poly> d;
      d.reserve(pieces_.size());
      for (const auto& p : pieces_) d.push_back(p.derivative());
      derivative_ = std::make_shared<const Spline>(name_ + "'", knots_, std::move(d));
    });
    return derivative_;
  }

  /// Antiderivative with value zero at t0; continuous across knots.
  std::shared_ptr<const Spline> antiderivative(double t0, std::string name) const {
    std::vector<Poly> q;
    q.reserve(pieces_.size());
    for (const auto& p : pieces_) q.push_back(p.antiderivative());
    for (std::size_t k = 1; k < q.size(); ++k) {
      const double kt = knots_[k - 1];
      q[k].c[0] += q[k - 1](kt) - q[k](kt);
    }
    Spline tmp("tmp", knots_, q);
    const double shift = tmp(t0);
    for (auto& p : q) p.c[0] -= shift;
    return std::make_shared<const Spline>(std::move(name), knots_, std::move(q));
  }

 private:
  std::string name_;
  std::vector<double> knots_;
  std::vector<Poly> pieces_;
  mutable std::once_flag derivative_once_;
  mutable std::shared_ptr<const Spline> derivative_;
};

/// C^3 step: 0 for t <= a, 1 for t >= b, septic 35x^4-84x^5+70x^6-20x^7 in
/// between with x = (t-a)/(b-a).  Satisfies S(a+b-t) = 1 - S(t).
inline std::shared_ptr<const Spline> smoothstep(double a, double b, std::string name = "step") {
  if (!(b > a)) throw ConstraintViolation("smoothstep needs a < b");
  const double w = b - a;
  const std::array<double, 8> unit{0, 0, 0, 0, 35, -84, 70, -20};
  Poly mid{a, {}};
  for (std::size_t k = 0; k < unit.size(); ++k) mid.c.push_back(unit[k] / std::pow(w, static_cast<double>(k)));
  return std::make_shared<const Spline>(std::move(name), std::vector<double>{a, b},
                                        std::vector<Poly>{Poly{a, {0.0}}, mid, Poly{b, {1.0}}});
}

enum class Op : std::uint8_t {
  Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt, Atan2,
  Select, Spline, Opaque, FdScope, FdPartial
};

class Expr;
struct Node;
class Tape;
using NodePtr = std::shared_ptr<const Node>;

/// A user-supplied callable on ambient points, with optional analytic partials.
struct OpaqueFunction {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  std::vector<NodePtr> partials;  // empty: central differences
  double fd_step = kDefaultFdStep;
};

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  int var = -1;
  std::array<NodePtr, 3> args{};
  std::shared_ptr<const Spline> spline;
  std::shared_ptr<const OpaqueFunction> opaque;
  std::vector<int> fd_indices;  // FdPartial: sorted differentiation indices
  double fd_step = 0.0;

  mutable std::mutex cache_mutex;
  mutable std::map<int, NodePtr> diff_cache;
  mutable std::map<std::vector<int>, NodePtr> fd_cache;
  mutable std::once_flag tape_once;
  mutable std::shared_ptr<const Tape> tape;  // single-root tape of this node
};

class Expr {
 public:
  Expr() : Expr(0.0) {}
  Expr(double c) : n_(make_const(c)) {}  // NOLINT: implicit by design of the DSL-like API
  explicit Expr(NodePtr n) : n_(std::move(n)) {}

  static Expr var(int i);

  const Node& node() const { return *n_; }
  const NodePtr& ptr() const { return n_; }
  Op op() const { return n_->op; }
  bool is_const() const { return n_->op == Op::Const; }
  bool is_const(double v) const { return is_const() && n_->value == v; }
  double const_value() const { return n_->value; }
  bool same(const Expr& o) const { return n_ == o.n_; }

  /// Partial derivative with respect to ambient coordinate i.
  Expr diff(int i) const;

  /// Single-point evaluation (compiles and caches a tape on first use).
  double operator()(std::span<const double> x) const;
  double operator()(std::initializer_list<double> x) const {
    return (*this)(std::span<const double>(x.begin(), x.size()));
  }

  /// Largest variable index referenced, or -1.
  int max_var() const;

 private:
  static NodePtr make_const(double c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = c;
    return n;
  }
  NodePtr n_;
};

namespace detail {

inline NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr, NodePtr c = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b), std::move(c)};
  return n;
}

inline Expr unary(Op op, const Expr& a) { return Expr(make_node(op, a.ptr())); }
inline Expr binary(Op op, const Expr& a, const Expr& b) { return Expr(make_node(op, a.ptr(), b.ptr())); }

}  // namespace detail

inline Expr Expr::var(int i) {
  static const std::array<NodePtr, 64> cache = [] {
    std::array<NodePtr, 64> c;
    for (int k = 0; k < 64; ++k) {
      auto n = std::make_shared<Node>();
      n->op = Op::Var;
      n->var = k;
      c[static_cast<std::size_t>(k)] = n;
    }
    return c;
  }();
  if (i < 0) throw ConstraintViolation("negative variable index");
  if (i < 64) return Expr(cache[static_cast<std::size_t>(i)]);
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = i;
  return Expr(n);
}

// ---- arithmetic with light simplification ----

inline Expr operator-(const Expr& a) {
  if (a.is_const()) return Expr(-a.const_value());
  if (a.op() == Op::Neg) return Expr(a.node().args[0]);
  return detail::unary(Op::Neg, a);
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.const_value() + b.const_value());
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  return detail::binary(Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.const_value() - b.const_value());
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  if (a.same(b)) return Expr(0.0);
  return detail::binary(Op::Sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.const_value() * b.const_value());
  if (a.is_const(0.0) || b.is_const(0.0)) return Expr(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  return detail::binary(Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(a.const_value() / b.const_value());
  if (a.is_const(0.0)) return Expr(0.0);
  if (b.is_const(1.0)) return a;
  return detail::binary(Op::Div, a, b);
}

inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

inline Expr sin(const Expr& a) {
  return a.is_const() ? Expr(std::sin(a.const_value())) : detail::unary(Op::Sin, a);
}
inline Expr cos(const Expr& a) {
  return a.is_const() ? Expr(std::cos(a.const_value())) : detail::unary(Op::Cos, a);
}
inline Expr exp(const Expr& a) {
  return a.is_const() ? Expr(std::exp(a.const_value())) : detail::unary(Op::Exp, a);
}
inline Expr log(const Expr& a) {
  return a.is_const() ? Expr(std::log(a.const_value())) : detail::unary(Op::Log, a);
}
inline Expr sqrt(const Expr& a) {
  return a.is_const() ? Expr(std::sqrt(a.const_value())) : detail::unary(Op::Sqrt, a);
}
inline Expr atan2(const Expr& y, const Expr& x) {
  if (y.is_const() && x.is_const()) return Expr(std::atan2(y.const_value(), x.const_value()));
  return detail::binary(Op::Atan2, y, x);
}
inline Expr pow(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(std::pow(a.const_value(), b.const_value()));
  if (b.is_const(1.0)) return a;
  if (b.is_const(0.0)) return Expr(1.0);
  if (b.is_const(2.0)) return a * a;
  return detail::binary(Op::Pow, a, b);
}

/// cond >= 0 ? if_nonneg : if_neg.  Differentiated branch-wise, so it is
/// only smooth where both branches agree on an open overlap.
inline Expr select(const Expr& cond, const Expr& if_nonneg, const Expr& if_neg) {
  if (cond.is_const()) return cond.const_value() >= 0.0 ? if_nonneg : if_neg;
  if (if_nonneg.same(if_neg)) return if_nonneg;
  return Expr(detail::make_node(Op::Select, cond.ptr(), if_nonneg.ptr(), if_neg.ptr()));
}

inline Expr compose(std::shared_ptr<const Spline> s, const Expr& a) {
  if (a.is_const()) return Expr((*s)(a.const_value()));
  auto n = detail::make_node(Op::Spline, a.ptr());
  std::const_pointer_cast<Node>(n)->spline = std::move(s);
  return Expr(n);
}

/// Wrap a callable as a field.  Without partials, derivatives are central
/// differences with the given step.
inline Expr opaque(std::string name, std::function<double(std::span<const double>)> f,
                   std::vector<Expr> partials = {}, double fd_step = kDefaultFdStep) {
  auto fn = std::make_shared<OpaqueFunction>();
  fn->name = std::move(name);
  fn->eval = std::move(f);
  for (auto& p : partials) fn->partials.push_back(p.ptr());
  fn->fd_step = fd_step;
  auto n = std::make_shared<Node>();
  n->op = Op::Opaque;
  n->opaque = std::move(fn);
  return Expr(n);
}

/// Same values as e, but every derivative of the result is taken by central
/// differences of e with step h (mixed partials use a symmetric stencil).
inline Expr finite_difference(const Expr& e, double h = kDefaultFdStep) {
  if (e.is_const()) return e;
  auto n = detail::make_node(Op::FdScope, e.ptr());
  std::const_pointer_cast<Node>(n)->fd_step = h;
  return Expr(n);
}

namespace detail {

inline NodePtr fd_partial(const NodePtr& base, std::vector<int> indices, double h) {
  std::sort(indices.begin(), indices.end());
  std::lock_guard lock(base->cache_mutex);
  auto it = base->fd_cache.find(indices);
  if (it != base->fd_cache.end()) return it->second;
  auto n = std::make_shared<Node>();
  n->op = Op::FdPartial;
  n->args[0] = base;
  n->fd_indices = indices;
  n->fd_step = h;
  base->fd_cache.emplace(std::move(indices), n);
  return n;
}

inline Expr diff_uncached(const Expr& e, int i) {
  const Node& n = e.node();
  const auto arg = [&](int k) { return Expr(n.args[static_cast<std::size_t>(k)]); };
  switch (n.op) {
    case Op::Const:
      return Expr(0.0);
    case Op::Var:
      return Expr(n.var == i ? 1.0 : 0.0);
    case Op::Add:
      return arg(0).diff(i) + arg(1).diff(i);
    case Op::Sub:
      return arg(0).diff(i) - arg(1).diff(i);
    case Op::Mul:
      return arg(0).diff(i) * arg(1) + arg(0) * arg(1).diff(i);
    case Op::Div: {
      const Expr a = arg(0), b = arg(1);
      return a.diff(i) / b - (a * b.diff(i)) / (b * b);
    }
    case Op::Neg:
      return -arg(0).diff(i);
    case Op::Pow: {
      const Expr a = arg(0), b = arg(1);
      if (b.is_const()) return b.const_value() * pow(a, b.const_value() - 1.0) * a.diff(i);
      return e * (b.diff(i) * log(a) + b * a.diff(i) / a);
    }
    case Op::Sin:
      return cos(arg(0)) * arg(0).diff(i);
    case Op::Cos:
      return -(sin(arg(0)) * arg(0).diff(i));
    case Op::Exp:
      return e * arg(0).diff(i);
    case Op::Log:
      return arg(0).diff(i) / arg(0);
    case Op::Sqrt:
      return arg(0).diff(i) / (2.0 * e);
    case Op::Atan2: {
      const Expr y = arg(0), x = arg(1);
      return (x * y.diff(i) - y * x.diff(i)) / (x * x + y * y);
    }
    case Op::Select:
      return select(arg(0), arg(1).diff(i), arg(2).diff(i));
    case Op::Spline:
      return compose(n.spline->derivative(), arg(0)) * arg(0).diff(i);
    case Op::Opaque:
      if (!n.opaque->partials.empty()) {
        if (i >= static_cast<int>(n.opaque->partials.size())) return Expr(0.0);
        return Expr(n.opaque->partials[static_cast<std::size_t>(i)]);
      }
      return Expr(fd_partial(e.ptr(), {i}, n.opaque->fd_step));
    case Op::FdScope:
      return Expr(fd_partial(n.args[0], {i}, n.fd_step));
    case Op::FdPartial: {
      auto idx = n.fd_indices;
      idx.push_back(i);
      return Expr(fd_partial(n.args[0], std::move(idx), n.fd_step));
    }
  }
  return Expr(0.0);
}

}  // namespace detail

inline Expr Expr::diff(int i) const {
  if (is_const()) return Expr(0.0);
  {
    std::lock_guard lock(n_->cache_mutex);
    auto it = n_->diff_cache.find(i);
    if (it != n_->diff_cache.end()) return Expr(it->second);
  }
  Expr d = detail::diff_uncached(*this, i);
  std::lock_guard lock(n_->cache_mutex);
  n_->diff_cache.emplace(i, d.ptr());
  return d;
}

inline int Expr::max_var() const {
  int best = -1;
  std::unordered_map<const Node*, bool> seen;
  std::vector<const Node*> stack{n_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!n || seen[n]) continue;
    seen[n] = true;
    if (n->op == Op::Var) best = std::max(best, n->var);
    if (n->op == Op::Opaque)  // a callable may read every coordinate
      best = std::max(best, n->opaque->partials.empty() ? (1 << 20) : static_cast<int>(n->opaque->partials.size()) - 1);
    for (const auto& a : n->args)
      if (a) stack.push_back(a.get());
  }
  return best;
}

/// e with variable `var` replaced by `value`.  Opaque and finite-difference
/// nodes cannot be rewritten and are rejected if they occur.
inline Expr substitute(const Expr& e, int var, const Expr& value) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const NodePtr&)> rec = [&](const NodePtr& np) -> Expr {
    if (auto it = memo.find(np.get()); it != memo.end()) return it->second;
    const Node& n = *np;
    const auto a = [&](int k) { return rec(n.args[static_cast<std::size_t>(k)]); };
    Expr r;
    switch (n.op) {
      case Op::Const: r = Expr(np); break;
      case Op::Var: r = n.var == var ? value : Expr(np); break;
      case Op::Add: r = a(0) + a(1); break;
      case Op::Sub: r = a(0) - a(1); break;
      case Op::Mul: r = a(0) * a(1); break;
      case Op::Div: r = a(0) / a(1); break;
      case Op::Neg: r = -a(0); break;
      case Op::Pow: r = pow(a(0), a(1)); break;
      case Op::Sin: r = sin(a(0)); break;
      case Op::Cos: r = cos(a(0)); break;
      case Op::Exp: r = exp(a(0)); break;
      case Op::Log: r = log(a(0)); break;
      case Op::Sqrt: r = sqrt(a(0)); break;
      case Op::Atan2: r = atan2(a(0), a(1)); break;
      case Op::Select: r = select(a(0), a(1), a(2)); break;
      case Op::Spline: r = compose(n.spline, a(0)); break;
      case Op::Opaque:
      case Op::FdScope:
      case Op::FdPartial: throw ConstraintViolation("cannot substitute into an opaque or finite-difference field");
    }
    memo.emplace(np.get(), r);
    return r;
  };
  return rec(e.ptr());
}

/// Compiled evaluation program for a set of root expressions.
class Tape {
 public:
  Tape() = default;
  explicit Tape(std::span<const Expr> roots) {
    std::unordered_map<const Node*, int> slot;
    roots_.reserve(roots.size());
    for (const auto& r : roots) roots_.push_back(compile(r.ptr(), slot));
  }

  std::size_t size() const { return code_.size(); }
  std::size_t root_count() const { return roots_.size(); }

  /// Evaluate every root at x.  `regs` is caller-owned scratch.
  void eval(std::span<const double> x, std::vector<double>& regs, std::span<double> out) const {
    regs.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      const auto r = [&](int s) { return regs[static_cast<std::size_t>(s)]; };
      double v = 0.0;
      switch (in.op) {
        case Op::Const: v = in.node->value; break;
        case Op::Var:
          if (in.node->var >= static_cast<int>(x.size()))
            throw ConstraintViolation("variable x" + std::to_string(in.node->var) + " outside point of dimension " +
                                      std::to_string(x.size()));
          v = x[static_cast<std::size_t>(in.node->var)];
          break;
        case Op::Add: v = r(in.a) + r(in.b); break;
        case Op::Sub: v = r(in.a) - r(in.b); break;
        case Op::Mul: v = r(in.a) * r(in.b); break;
        case Op::Div: v = r(in.a) / r(in.b); break;
        case Op::Neg: v = -r(in.a); break;
        case Op::Pow: v = std::pow(r(in.a), r(in.b)); break;
        case Op::Sin: v = std::sin(r(in.a)); break;
        case Op::Cos: v = std::cos(r(in.a)); break;
        case Op::Exp: v = std::exp(r(in.a)); break;
        case Op::Log: v = std::log(r(in.a)); break;
        case Op::Sqrt: v = std::sqrt(r(in.a)); break;
        case Op::Atan2: v = std::atan2(r(in.a), r(in.b)); break;
        case Op::Select: v = r(in.a) >= 0.0 ? r(in.b) : r(in.c); break;
        case Op::Spline: v = (*in.node->spline)(r(in.a)); break;
        case Op::Opaque: v = in.node->opaque->eval(x); break;
        case Op::FdScope: v = r(in.a); break;
        case Op::FdPartial: v = fd_eval(*in.node, x); break;
      }
      regs[k] = v;
    }
    for (std::size_t k = 0; k < roots_.size(); ++k) out[k] = regs[static_cast<std::size_t>(roots_[k])];
  }

 private:
  struct Instr {
    Op op;
    int a = -1, b = -1, c = -1;
    const Node* node = nullptr;
  };

  int compile(const NodePtr& n, std::unordered_map<const Node*, int>& slot) {
    if (auto it = slot.find(n.get()); it != slot.end()) return it->second;
    Instr in{n->op};
    in.node = n.get();
    keep_.push_back(n);
    if (n->op == Op::FdPartial) {
      ensure_tape(*n->args[0], n->args[0]);
    } else {
      // FdScope's child is evaluated inline; FdPartial evaluates its base via
      // the base's own tape.
      if (n->args[0]) in.a = compile(n->args[0], slot);
      if (n->args[1]) in.b = compile(n->args[1], slot);
      if (n->args[2]) in.c = compile(n->args[2], slot);
    }
    code_.push_back(in);
    const int s = static_cast<int>(code_.size()) - 1;
    slot.emplace(n.get(), s);
    return s;
  }

  static void ensure_tape(const Node& n, const NodePtr& self) {
    std::call_once(n.tape_once, [&] {
      std::array<Expr, 1> r{Expr(self)};
      n.tape = std::make_shared<const Tape>(r);
    });
  }

  static double fd_eval(const Node& n, std::span<const double> x) {
    std::vector<double> pt(x.begin(), x.end());
    std::vector<double> regs;
    return fd_rec(*n.args[0]->tape, n.fd_indices, 0, n.fd_step, pt, regs);
  }

  static double fd_rec(const Tape& base, const std::vector<int>& idx, std::size_t k, double h,
                       std::vector<double>& pt, std::vector<double>& regs) {
    if (k == idx.size()) {
      double out = 0.0;
      base.eval(pt, regs, std::span<double>(&out, 1));
      return out;
    }
    const auto i = static_cast<std::size_t>(idx[k]);
    if (i >= pt.size()) return 0.0;
    const double x0 = pt[i];
    pt[i] = x0 + h;
    const double fp = fd_rec(base, idx, k + 1, h, pt, regs);
    pt[i] = x0 - h;
    const double fm = fd_rec(base, idx, k + 1, h, pt, regs);
    pt[i] = x0;
    return (fp - fm) / (2.0 * h);
  }

  std::vector<Instr> code_;
  std::vector<int> roots_;
  std::vector<NodePtr> keep_;
};

inline double Expr::operator()(std::span<const double> x) const {
  if (is_const()) return n_->value;
  std::call_once(n_->tape_once, [&] {
    std::array<Expr, 1> r{*this};
    n_->tape = std::make_shared<const Tape>(r);
  });
  std::vector<double> regs;
  double out = 0.0;
  n_->tape->eval(x, regs, std::span<double>(&out, 1));
  return out;
}

/// Type used for coefficient functions throughout the library.
using ScalarField = Expr;

}  // namespace cbundle
