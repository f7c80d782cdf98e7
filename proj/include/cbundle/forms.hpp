#pragma once

// Differential forms in ambient coordinates, evaluated on tangent frames.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"
#include "cbundle/linalg.hpp"
#include "cbundle/manifold.hpp"
#include "cbundle/parallel.hpp"

namespace cbundle {

using Mask = std::uint32_t;

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

/// Sign of dx_I ^ dx_J -> dx_{I u J} for disjoint I, J.
inline int merge_sign(Mask a, Mask b) {
  int swaps = 0;
  for (Mask bb = b; bb; bb &= bb - 1) {
    const int j = std::countr_zero(bb);
    swaps += std::popcount(a >> (j + 1));  // elements of a greater than j
  }
  return (swaps & 1) ? -1 : 1;
}

class BaseForm {
 public:
  BaseForm() = default;
  BaseForm(ManifoldPtr m, int degree) : m_(std::move(m)), degree_(degree) {
    if (!m_) throw ConstraintViolation("form needs a manifold");
    dim_ = m_->ambient_dim();
    if (degree < 0) throw ConstraintViolation("negative form degree");
    if (dim_ > 31) throw ConstraintViolation("ambient dimension above 31 is not supported");
  }

  static BaseForm zero(ManifoldPtr m, int degree) { return BaseForm(std::move(m), degree); }
  static BaseForm scalar(ManifoldPtr m, const Expr& f) {
    BaseForm r(std::move(m), 0);
    r.set(0, f);
    return r;
  }
  /// The coordinate 1-form dx_i.
  static BaseForm dx(ManifoldPtr m, int i) {
    BaseForm r(std::move(m), 1);
    r.set(Mask{1} << i, Expr(1.0));
    return r;
  }
  /// f dx_{i1} ^ ... ^ dx_{ik} for the given (not necessarily sorted) indices.
  static BaseForm monomial(ManifoldPtr m, const Expr& f, std::vector<int> idx) {
    BaseForm r(std::move(m), static_cast<int>(idx.size()));
    int sign = 1;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        if (idx[i] == idx[j]) return r;
        if (idx[i] > idx[j]) sign = -sign;
      }
    Mask mask = 0;
    for (int i : idx) mask |= Mask{1} << i;
    r.set(mask, sign > 0 ? f : -f);
    return r;
  }

  const ManifoldPtr& manifold() const { return m_; }
  int degree() const { return degree_; }
  int ambient_dim() const { return dim_; }
  const std::map<Mask, Expr>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  Expr coeff(Mask mask) const {
    auto it = c_.find(mask);
    return it == c_.end() ? Expr(0.0) : it->second;
  }
  Expr coeff(std::initializer_list<int> idx) const {
    Mask m = 0;
    for (int i : idx) m |= Mask{1} << i;
    return coeff(m);
  }

  void set(Mask mask, const Expr& e) {
    if (std::popcount(mask) != degree_) throw ConstraintViolation("multi-index length differs from form degree");
    if (dim_ < 32 && (mask >> dim_) != 0) throw ConstraintViolation("multi-index exceeds ambient dimension");
    if (e.is_const(0.0))
      c_.erase(mask);
    else
      c_[mask] = e;
  }
  void add(Mask mask, const Expr& e) { set(mask, coeff(mask) + e); }

  /// Applies `fn` to every coefficient (e.g. finite_difference).
  BaseForm map(const std::function<Expr(const Expr&)>& fn) const {
    BaseForm r(m_, degree_);
    for (const auto& [k, v] : c_) r.set(k, fn(v));
    return r;
  }

  void check_compatible(const BaseForm& o) const {
    if (!m_ || !o.m_) throw ConstraintViolation("form without manifold");
    if (m_ == o.m_) return;
    bool same = m_->factors().size() == o.m_->factors().size();
    for (std::size_t i = 0; same && i < m_->factors().size(); ++i)
      same = m_->factors()[i].kind == o.m_->factors()[i].kind;
    if (!same || dim_ != o.dim_) throw ConstraintViolation("forms live on different manifolds");
  }

  /// Evaluation on k ambient vectors: sum over I of c_I(p) det[v_r(I_c)].
  double eval(std::span<const double> p, const std::vector<Vec>& vs) const {
    if (static_cast<int>(vs.size()) != degree_)
      throw ConstraintViolation("form of degree " + std::to_string(degree_) + " evaluated on " +
                                std::to_string(vs.size()) + " vectors");
    double s = 0.0;
    for (const auto& [mask, e] : c_) s += e(p) * minor_det(mask, vs);
    return s;
  }
  double eval(const Frame& fr) const { return eval(fr.point, fr.vectors); }

  static double minor_det(Mask mask, const std::vector<Vec>& vs) {
    const std::size_t k = vs.size();
    if (k == 0) return 1.0;
    std::array<int, 32> idx{};
    std::size_t n = 0;
    for (Mask m = mask; m; m &= m - 1) idx[n++] = std::countr_zero(m);
    std::vector<double> a(k * k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) a[r * k + c] = vs[r][static_cast<std::size_t>(idx[c])];
    if (k == 1) return a[0];
    if (k == 2) return a[0] * a[3] - a[1] * a[2];
    return det(std::move(a), k);
  }

  friend BaseForm operator+(const BaseForm& a, const BaseForm& b) {
    a.check_compatible(b);
    if (a.degree_ != b.degree_) throw ConstraintViolation("adding forms of different degree");
    BaseForm r = a;
    for (const auto& [k, v] : b.c_) r.add(k, v);
    return r;
  }
  friend BaseForm operator-(const BaseForm& a) {
    BaseForm r(a.m_, a.degree_);
    for (const auto& [k, v] : a.c_) r.set(k, -v);
    return r;
  }
  friend BaseForm operator-(const BaseForm& a, const BaseForm& b) {
    a.check_compatible(b);
    if (a.degree_ != b.degree_) throw ConstraintViolation("subtracting forms of different degree");
    BaseForm r = a;
    for (const auto& [k, v] : b.c_) r.set(k, r.coeff(k) - v);
    return r;
  }
  friend BaseForm operator*(const Expr& f, const BaseForm& a) {
    BaseForm r(a.m_, a.degree_);
    for (const auto& [k, v] : a.c_) r.set(k, f * v);
    return r;
  }
  friend BaseForm operator*(const BaseForm& a, const Expr& f) {
    BaseForm r(a.m_, a.degree_);
    for (const auto& [k, v] : a.c_) r.set(k, v * f);
    return r;
  }
  BaseForm& operator+=(const BaseForm& b) { return *this = *this + b; }
  BaseForm& operator-=(const BaseForm& b) { return *this = *this - b; }

 private:
  ManifoldPtr m_;
  int degree_ = 0;
  int dim_ = 0;
  std::map<Mask, Expr> c_;
};

/// a ^ b.  Terms of each output coefficient are summed in an order that does
/// not depend on the argument order, so a^b and (-1)^{pq} b^a evaluate to
/// exactly the same numbers.
inline BaseForm wedge(const BaseForm& a, const BaseForm& b) {
  a.check_compatible(b);
  const int deg = a.degree() + b.degree();
  if (deg > a.ambient_dim()) return BaseForm(a.manifold(), std::min(deg, 32));
  BaseForm r(a.manifold(), deg);
  struct Term {
    Mask lo, hi;
    const Node *plo, *phi;
    int sign;
    Expr prod;
  };
  std::map<Mask, std::vector<Term>> acc;
  for (const auto& [ia, ca] : a.coeffs())
    for (const auto& [ib, cb] : b.coeffs()) {
      if (ia & ib) continue;
      const int s = merge_sign(ia, ib);
      const Node* pa = ca.ptr().get();
      const Node* pb = cb.ptr().get();
      Term t{std::min(ia, ib), std::max(ia, ib), std::min(pa, pb, std::less<>()), std::max(pa, pb, std::less<>()), s,
             ca * cb};
      if (ia > ib || (ia == ib && pa > pb)) t.prod = cb * ca;  // same value, canonical operand order
      acc[ia | ib].push_back(std::move(t));
    }
  for (auto& [mask, terms] : acc) {
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) {
      return std::tie(x.lo, x.hi, x.plo, x.phi) < std::tie(y.lo, y.hi, y.plo, y.phi);
    });
    Expr sum = terms[0].sign > 0 ? terms[0].prod : -terms[0].prod;
    for (std::size_t i = 1; i < terms.size(); ++i)
      sum = terms[i].sign > 0 ? sum + terms[i].prod : sum - terms[i].prod;
    r.set(mask, sum);
  }
  return r;
}

inline BaseForm wedge(const BaseForm& a, const BaseForm& b, const BaseForm& c) { return wedge(wedge(a, b), c); }

/// k-fold wedge power (a^0 is the constant 0-form 1).
inline BaseForm wedge_power(const BaseForm& a, int k) {
  BaseForm r = BaseForm::scalar(a.manifold(), Expr(1.0));
  for (int i = 0; i < k; ++i) r = wedge(r, a);
  return r;
}

/// Exterior derivative: sum_j d_j c_I dx_j ^ dx_I.
inline BaseForm ext_d(const BaseForm& a) {
  const int deg = a.degree() + 1;
  if (deg > a.ambient_dim()) return BaseForm(a.manifold(), deg);
  BaseForm r(a.manifold(), deg);
  std::map<Mask, std::vector<std::pair<int, Expr>>> acc;
  for (const auto& [mask, c] : a.coeffs()) {
    if (c.is_const()) continue;
    const int top = std::min(c.max_var(), a.ambient_dim() - 1);
    for (int j = 0; j <= top; ++j) {
      const Mask bit = Mask{1} << j;
      if (mask & bit) continue;
      Expr dc = c.diff(j);
      if (dc.is_const(0.0)) continue;
      acc[mask | bit].emplace_back(merge_sign(bit, mask), dc);
    }
  }
  for (auto& [mask, terms] : acc) {
    Expr sum = terms[0].first > 0 ? terms[0].second : -terms[0].second;
    for (std::size_t i = 1; i < terms.size(); ++i)
      sum = terms[i].first > 0 ? sum + terms[i].second : sum - terms[i].second;
    r.set(mask, sum);
  }
  return r;
}

/// Differential of a scalar field as a 1-form.
inline BaseForm d(ManifoldPtr m, const Expr& f) { return ext_d(BaseForm::scalar(std::move(m), f)); }

/// Coefficient-wise finite-difference mode.
inline BaseForm with_finite_differences(const BaseForm& a, double h = kDefaultFdStep) {
  return a.map([h](const Expr& e) { return finite_difference(e, h); });
}

// ---------------------------------------------------------------------------
// Batched evaluation

/// Many forms and scalars compiled into one tape.
class FormBatch {
 public:
  struct Workspace {
    std::vector<double> regs, vals;
  };

  FormBatch() = default;
  FormBatch(std::vector<BaseForm> forms, std::vector<Expr> scalars = {}) : forms_(std::move(forms)) {
    std::vector<Expr> roots;
    for (const auto& f : forms_) {
      offsets_.push_back(roots.size());
      for (const auto& [mask, e] : f.coeffs()) {
        masks_.push_back(mask);
        roots.push_back(e);
      }
    }
    offsets_.push_back(roots.size());
    scalar_offset_ = roots.size();
    for (auto& s : scalars) roots.push_back(s);
    tape_ = Tape(roots);
  }

  std::size_t form_count() const { return forms_.size(); }
  const BaseForm& form(std::size_t i) const { return forms_[i]; }

  void load(std::span<const double> p, Workspace& ws) const {
    ws.vals.resize(tape_.root_count());
    tape_.eval(p, ws.regs, ws.vals);
  }

  double form_value(std::size_t i, const std::vector<Vec>& vs, const Workspace& ws) const {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += ws.vals[k] * BaseForm::minor_det(masks_[k], vs);
    return s;
  }
  double scalar_value(std::size_t j, const Workspace& ws) const { return ws.vals[scalar_offset_ + j]; }

  /// Largest |coefficient| of form i at the loaded point.
  double max_abs_coeff(std::size_t i, const Workspace& ws) const {
    double m = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) m = std::max(m, std::abs(ws.vals[k]));
    return m;
  }

 private:
  std::vector<BaseForm> forms_;
  std::vector<Mask> masks_;
  std::vector<std::size_t> offsets_;
  std::size_t scalar_offset_ = 0;
  Tape tape_;
};

// ---------------------------------------------------------------------------
// Positivity sweeps

struct PositivityReport {
  std::string label;
  double min_value = std::numeric_limits<double>::infinity();
  Vec argmin;
  std::size_t argmin_index = 0;
  std::size_t samples = 0;
  std::vector<int> resolution;
  double tolerance = 1e-9;
  bool passed = false;
  std::string note;
};

inline std::string describe(const PositivityReport& r) {
  std::ostringstream os;
  os << (r.passed ? "pass" : "FAIL") << " " << r.label << ": min=" << r.min_value << " over " << r.samples
     << " samples (tol " << r.tolerance << ")";
  if (!r.passed && !r.argmin.empty()) {
    os << " at (";
    for (std::size_t i = 0; i < r.argmin.size(); ++i) os << (i ? ", " : "") << r.argmin[i];
    os << ")";
  }
  if (!r.note.empty()) os << " [" << r.note << "]";
  return os.str();
}

struct SweepOptions {
  double tol = 1e-9;
  /// Evaluate only where filter(p) >= filter_min.
  std::optional<Expr> filter;
  double filter_min = 0.0;
  /// -1 reverses the manifold orientation.
  int orientation = 1;
  int jobs = 0;
  std::string label;
};

namespace detail {

struct MinAcc {
  double value = std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();
  Vec point;
  std::size_t count = 0;
  void offer(double v, std::size_t i, std::span<const double> p) {
    ++count;
    if (v < value || (v == value && i < index)) {
      value = v;
      index = i;
      point.assign(p.begin(), p.end());
    }
  }
  void merge(const MinAcc& o) {
    count += o.count;
    if (o.index == std::numeric_limits<std::size_t>::max()) return;
    if (o.value < value || (o.value == value && o.index < index)) {
      value = o.value;
      index = o.index;
      point = o.point;
    }
  }
};

inline void finite_or_throw(double v, std::span<const double> p, const std::string& what) {
  if (std::isfinite(v)) return;
  std::ostringstream os;
  os << what << " is not finite at (";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  throw DomainError(os.str());
}

}  // namespace detail

/// Generic min-sweep: value(sample, workspace) -> optional<double> over every
/// grid sample, in parallel, with a deterministic (lowest index) argmin.
template <class Fn>
PositivityReport sweep_min(const ModelManifold& m, double tol, int jobs, std::string label, Fn&& fn) {
  const std::size_t n = m.sample_count();
  if (n == 0) throw ConstraintViolation("empty sample grid");
  std::vector<detail::MinAcc> acc(static_cast<std::size_t>(std::max(1, jobs <= 0 ? default_jobs() : jobs)));
  const std::size_t used = parallel_chunks(n, jobs, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    detail::MinAcc local;
    Sample s;
    for (std::size_t i = b; i < e; ++i) {
      m.sample(i, s);
      const std::optional<double> v = fn(s);
      if (!v) continue;
      local.offer(*v, i, s.point);
    }
    acc[chunk] = std::move(local);
  });
  detail::MinAcc total;
  for (std::size_t c = 0; c < used; ++c) total.merge(acc[c]);
  PositivityReport r;
  r.label = std::move(label);
  r.samples = total.count;
  r.resolution = m.resolution();
  r.tolerance = tol;
  if (total.count == 0) throw ConstraintViolation("no samples selected in sweep '" + r.label + "'");
  r.min_value = total.value;
  r.argmin = total.point;
  r.argmin_index = total.index;
  r.passed = r.min_value > tol;
  return r;
}

/// Evaluates a top-degree form on the oriented frame at every grid sample.
inline PositivityReport positivity_sweep(const BaseForm& a, const ModelManifold& m, const SweepOptions& opt = {}) {
  if (a.degree() != m.intrinsic_dim())
    throw ConstraintViolation("positivity sweep needs a form of degree " + std::to_string(m.intrinsic_dim()) +
                              ", got " + std::to_string(a.degree()));
  std::vector<Expr> scalars;
  if (opt.filter) scalars.push_back(*opt.filter);
  const FormBatch batch({a}, scalars);
  return sweep_min(m, opt.tol, opt.jobs, opt.label.empty() ? "positivity" : opt.label,
                   [&](const Sample& s) -> std::optional<double> {
                     thread_local FormBatch::Workspace ws;
                     batch.load(s.point, ws);
                     if (opt.filter && !(batch.scalar_value(0, ws) >= opt.filter_min)) return std::nullopt;
                     const Frame fr = m.frame_at(s.point);
                     const double v = opt.orientation * batch.form_value(0, fr.vectors, ws);
                     detail::finite_or_throw(v, s.point, "form value");
                     return v;
                   });
}

inline PositivityReport positivity_sweep(const BaseForm& a, const ModelManifold& m, double tol) {
  SweepOptions o;
  o.tol = tol;
  return positivity_sweep(a, m, o);
}

/// Largest |coefficient| of a form over the grid (optionally filtered).
inline double max_abs_coeff(const BaseForm& a, const ModelManifold& m, const std::optional<Expr>& filter = {},
                            double filter_min = 0.0, int jobs = 0) {
  if (a.is_zero()) return 0.0;
  std::vector<Expr> scalars;
  if (filter) scalars.push_back(*filter);
  const FormBatch batch({a}, scalars);
  const auto r = sweep_min(m, 0.0, jobs, "max-coeff", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (filter && !(batch.scalar_value(0, ws) >= filter_min)) return std::nullopt;
    const double v = batch.max_abs_coeff(0, ws);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : -v;
  });
  return -r.min_value;
}

namespace detail {
inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}
}  // namespace detail

/// Largest |a(e_I)| over the grid and over all k-subsets I of the oriented
/// orthonormal frame: the max-norm of the intrinsic coefficients.  This is the
/// meaningful size of a form on sphere factors, where ambient coefficients
/// also carry normal components.
inline double max_abs_on_tangent(const BaseForm& a, const ModelManifold& m, const std::optional<Expr>& filter = {},
                                 double filter_min = 0.0, int jobs = 0) {
  if (a.is_zero()) return 0.0;
  const auto k = static_cast<std::size_t>(a.degree());
  if (k > static_cast<std::size_t>(m.intrinsic_dim())) return 0.0;
  std::vector<Expr> scalars;
  if (filter) scalars.push_back(*filter);
  const FormBatch batch({a}, scalars);
  const auto r = sweep_min(m, 0.0, jobs, "max-tangent", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (filter && !(batch.scalar_value(0, ws) >= filter_min)) return std::nullopt;
    const Frame fr = m.frame_at(s.point);
    double worst = 0.0;
    std::vector<Vec> vs(k);
    detail::for_each_subset(fr.vectors.size(), k, [&](const std::vector<std::size_t>& idx) {
      for (std::size_t i = 0; i < k; ++i) vs[i] = fr.vectors[idx[i]];
      const double v = std::abs(batch.form_value(0, vs, ws));
      worst = std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(worst, v);
    });
    return -worst;
  });
  return -r.min_value;
}

/// Largest |a - b| on oriented frames over the grid, for top-degree forms.
inline double max_abs_diff_on_frames(const BaseForm& a, const BaseForm& b, const ModelManifold& m, int jobs = 0) {
  const FormBatch batch({a, b});
  const auto r = sweep_min(m, 0.0, jobs, "residual", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    const Frame fr = m.frame_at(s.point);
    return -std::abs(batch.form_value(0, fr.vectors, ws) - batch.form_value(1, fr.vectors, ws));
  });
  return -r.min_value;
}

// ---------------------------------------------------------------------------
// Cycle integrals

/// A map from the unit square into the ambient space.
struct Cycle2 {
  std::string name;
  std::function<Vec(double, double)> map;
  /// Optional analytic Jacobian (d/ds, d/dt); central differences otherwise.
  std::function<std::array<Vec, 2>(double, double)> jacobian;
  bool periodic_s = true;
  bool periodic_t = true;
  int resolution = 256;
};

struct CycleIntegral {
  double value = 0.0;
  int resolution = 0;
  bool degenerate = false;
  std::string warning;
};

inline CycleIntegral integrate_cycle(const BaseForm& a, const Cycle2& c, int resolution = 0) {
  if (a.degree() != 2) throw ConstraintViolation("cycle integration needs a 2-form");
  const int n = resolution > 0 ? resolution : c.resolution;
  const FormBatch batch({a});
  FormBatch::Workspace ws;
  const double h = 1e-6;
  double sum = 0.0;
  std::size_t degenerate = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = (i + 0.5) / n, t = (j + 0.5) / n;
      const Vec p = c.map(s, t);
      std::array<Vec, 2> jac;
      if (c.jacobian) {
        jac = c.jacobian(s, t);
      } else {
        const Vec sp = c.map(s + h, t), sm = c.map(s - h, t), tp = c.map(s, t + h), tm = c.map(s, t - h);
        jac[0].resize(p.size());
        jac[1].resize(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
          jac[0][k] = (sp[k] - sm[k]) / (2 * h);
          jac[1][k] = (tp[k] - tm[k]) / (2 * h);
        }
      }
      // Gram determinant of the Jacobian columns.
      const double g = dot(jac[0], jac[0]) * dot(jac[1], jac[1]) - dot(jac[0], jac[1]) * dot(jac[0], jac[1]);
      if (g < 1e-24) ++degenerate;
      batch.load(p, ws);
      sum += batch.form_value(0, {jac[0], jac[1]}, ws);
    }
  CycleIntegral r;
  r.value = sum / (static_cast<double>(n) * n);
  r.resolution = n;
  if (degenerate == static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    r.degenerate = true;
    r.warning = "cycle '" + c.name + "' has a degenerate Jacobian at every quadrature node";
  }
  return r;
}

}  // namespace cbundle
