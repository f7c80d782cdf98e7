#pragma once

// S^1-invariant forms on a principal circle bundle, stored on the base as
// pairs (a, b) standing for a + psi ^ b, where psi is a reference connection
// with curvature omega (d psi = omega).  The total space is oriented
// fiber-first, so a top form psi ^ Omega is positive iff Omega is positive
// on the base.

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/forms.hpp"

namespace cbundle {

struct BundleSpec {
  ManifoldPtr base;
  BaseForm curvature;
  std::vector<Cycle2> generators;

  BundleSpec(ManifoldPtr b, BaseForm omega, std::vector<Cycle2> gens = {})
      : base(std::move(b)), curvature(std::move(omega)), generators(std::move(gens)) {
    if (!base) throw ConstraintViolation("bundle needs a base manifold");
    if (curvature.degree() != 2) throw ConstraintViolation("curvature must be a 2-form");
    if (base->intrinsic_dim() % 2 != 0) throw ConstraintViolation("bundle base must be even-dimensional");
  }

  /// Half the base dimension.
  int n() const { return base->intrinsic_dim() / 2; }

  const Cycle2& cycle(const std::string& name) const {
    for (const auto& c : generators)
      if (c.name == name) return c;
    std::string known;
    for (const auto& c : generators) known += (known.empty() ? "" : ", ") + c.name;
    throw ConstraintViolation("unknown cycle '" + name + "' (known: " + known + ")");
  }
};

using BundlePtr = std::shared_ptr<const BundleSpec>;

/// Trivial bundle (zero curvature) over m.
inline BundlePtr trivial_bundle(ManifoldPtr m, std::vector<Cycle2> gens = {}) {
  BaseForm zero(m, 2);
  return std::make_shared<const BundleSpec>(std::move(m), std::move(zero), std::move(gens));
}

inline BundlePtr make_bundle(ManifoldPtr m, BaseForm omega, std::vector<Cycle2> gens = {}) {
  return std::make_shared<const BundleSpec>(std::move(m), std::move(omega), std::move(gens));
}

struct InvariantForm;

namespace detail {
struct GaugeStep;
}

/// a + psi ^ b.
struct InvariantForm {
  BaseForm a;
  BaseForm b;
  BundlePtr bundle;
  std::shared_ptr<const detail::GaugeStep> origin;  // set by change_gauge

  InvariantForm() = default;
  InvariantForm(BaseForm a_, BaseForm b_, BundlePtr bundle_) : a(std::move(a_)), b(std::move(b_)), bundle(std::move(bundle_)) {
    if (!bundle) throw ConstraintViolation("invariant form needs a bundle");
    if (a.degree() != b.degree() + 1) throw ConstraintViolation("invariant form needs deg a = deg b + 1");
    a.check_compatible(bundle->curvature);
    b.check_compatible(bundle->curvature);
  }

  /// alpha = beta + u psi.
  static InvariantForm one_form(const BaseForm& beta, const Expr& u, BundlePtr bundle) {
    if (beta.degree() != 1) throw ConstraintViolation("beta must be a 1-form");
    return InvariantForm(beta, BaseForm::scalar(beta.manifold(), u), std::move(bundle));
  }

  int degree() const { return a.degree(); }
};

namespace detail {
struct GaugeStep {
  InvariantForm parent;
  BaseForm gamma;
};

inline void same_bundle(const InvariantForm& x, const InvariantForm& y) {
  if (x.bundle != y.bundle) throw ConstraintViolation("invariant forms belong to different bundles");
}
}  // namespace detail

inline InvariantForm operator+(const InvariantForm& x, const InvariantForm& y) {
  detail::same_bundle(x, y);
  return InvariantForm(x.a + y.a, x.b + y.b, x.bundle);
}

inline InvariantForm operator*(const Expr& f, const InvariantForm& x) { return InvariantForm(f * x.a, f * x.b, x.bundle); }

/// (a1 + psi b1) ^ (a2 + psi b2) = a1 a2 + psi (b1 a2 + (-1)^{deg a1} a1 b2).
inline InvariantForm inv_wedge(const InvariantForm& x, const InvariantForm& y) {
  detail::same_bundle(x, y);
  BaseForm bpart = wedge(x.b, y.a);
  const BaseForm second = wedge(x.a, y.b);
  bpart = (x.a.degree() % 2) ? bpart - second : bpart + second;
  return InvariantForm(wedge(x.a, y.a), bpart, x.bundle);
}

/// d(a + psi b) = da + omega b - psi db.
inline InvariantForm inv_d(const InvariantForm& x) {
  return InvariantForm(ext_d(x.a) + wedge(x.bundle->curvature, x.b), -ext_d(x.b), x.bundle);
}

/// alpha ^ (d alpha)^n through the generic pair calculus.
inline InvariantForm contact_top_form(const InvariantForm& alpha) {
  if (alpha.degree() != 1) throw ConstraintViolation("contact check needs an invariant 1-form");
  const int n = alpha.bundle->n();
  const InvariantForm da = inv_d(alpha);
  InvariantForm p = alpha;
  for (int i = 0; i < n; ++i) p = inv_wedge(p, da);
  return p;
}

/// Omega = (d beta + u omega)^{n-1} ^ [n beta ^ du + u (d beta + u omega)].
inline BaseForm omega_volume(const BaseForm& beta, const Expr& u, const BaseForm& omega, int n) {
  if (n < 1) throw ConstraintViolation("omega_volume needs n >= 1");
  const auto& m = beta.manifold();
  if (m->intrinsic_dim() != 2 * n) throw ConstraintViolation("base dimension differs from 2n");
  const BaseForm s = ext_d(beta) + u * omega;
  const BaseForm du = d(m, u);
  const BaseForm bracket = Expr(static_cast<double>(n)) * wedge(beta, du) + u * s;
  return wedge(wedge_power(s, n - 1), bracket);
}

struct ContactReport {
  PositivityReport sweep;
  double a_component_max = 0.0;
  bool passed() const { return sweep.passed; }
};

/// Positivity of alpha ^ (d alpha)^n = psi ^ Omega, i.e. of the psi-component
/// on the base.  The horizontal component has degree 2n+1 and must vanish on
/// tangent vectors; that is asserted as an internal-consistency check.
inline ContactReport contact_check(const InvariantForm& alpha, const SweepOptions& opt = {}) {
  const InvariantForm top = contact_top_form(alpha);
  const auto& m = *alpha.bundle->base;
  ContactReport r;
  SweepOptions o = opt;
  if (o.label.empty()) o.label = "contact";
  r.sweep = positivity_sweep(top.b, m, o);
  if (!top.a.is_zero()) {
    const FormBatch batch({top.a});
    const auto res = sweep_min(m, 0.0, opt.jobs, "horizontal", [&](const Sample& s) -> std::optional<double> {
      thread_local FormBatch::Workspace ws;
      batch.load(s.point, ws);
      Frame fr = m.frame_at(s.point);
      Vec extra(fr.point.size(), 0.0);
      for (std::size_t k = 0; k < fr.vectors.size(); ++k)
        for (std::size_t i = 0; i < extra.size(); ++i) extra[i] += (0.3 + 0.1 * static_cast<double>(k)) * fr.vectors[k][i];
      fr.vectors.push_back(extra);
      // Relative to the coefficient scale: the exact value is zero.
      return -std::abs(batch.form_value(0, fr.vectors, ws)) / (1.0 + batch.max_abs_coeff(0, ws));
    });
    r.a_component_max = -res.min_value;
  }
  if (r.a_component_max > 1e-10) {
    std::ostringstream os;
    os << "horizontal part of alpha^(dalpha)^n does not vanish on tangent vectors (" << r.a_component_max << ")";
    throw CheckFailure(os.str());
  }
  return r;
}

inline ContactReport contact_check(const InvariantForm& alpha, double tol) {
  SweepOptions o;
  o.tol = tol;
  return contact_check(alpha, o);
}

/// Max over the grid of |psi-component of alpha^(dalpha)^n - Omega| on oriented
/// frames, Omega from the closed formula.
inline double identity_check_lemma_volume(const InvariantForm& alpha, int jobs = 0) {
  const InvariantForm top = contact_top_form(alpha);
  const Expr u = alpha.b.coeff(0);
  const BaseForm omega = omega_volume(alpha.a, u, alpha.bundle->curvature, alpha.bundle->n());
  return max_abs_diff_on_frames(top.b, omega, *alpha.bundle->base, jobs);
}

namespace detail {
inline bool negated(const Expr& x, const Expr& y) {
  if (x.is_const() && y.is_const()) return x.const_value() == -y.const_value();
  if (x.op() == Op::Neg && x.node().args[0] == y.ptr()) return true;
  if (y.op() == Op::Neg && y.node().args[0] == x.ptr()) return true;
  return false;
}
inline bool negated(const BaseForm& x, const BaseForm& y) {
  if (x.degree() != y.degree() || x.coeffs().size() != y.coeffs().size()) return false;
  for (const auto& [mask, e] : x.coeffs()) {
    auto it = y.coeffs().find(mask);
    if (it == y.coeffs().end() || !negated(e, it->second)) return false;
  }
  return true;
}
}  // namespace detail

/// Re-expresses a + psi b relative to psi' = psi + gamma: (a - gamma ^ b, b),
/// over the bundle with curvature omega + d gamma.  Undoing a gauge change
/// with the negated offset returns the original pair itself.
inline InvariantForm change_gauge(const InvariantForm& t, const BaseForm& gamma) {
  if (gamma.degree() != 1) throw ConstraintViolation("gauge offset must be a 1-form");
  if (t.origin && detail::negated(gamma, t.origin->gamma)) return t.origin->parent;
  const auto& old = *t.bundle;
  auto nb = make_bundle(old.base, old.curvature + ext_d(gamma), old.generators);
  InvariantForm r(t.a - wedge(gamma, t.b), t.b, nb);
  r.origin = std::make_shared<const detail::GaugeStep>(detail::GaugeStep{t, gamma});
  return r;
}

struct EulerPairing {
  std::string cycle;
  double value = 0.0;
  long nearest = 0;
  bool integral = false;
  CycleIntegral integral_info;
};

/// <e, c> = -(1/2pi) int_c omega.
inline EulerPairing euler_pairing(const BundleSpec& bundle, const std::string& cycle, int resolution = 0) {
  const Cycle2& c = bundle.cycle(cycle);
  EulerPairing p;
  p.cycle = cycle;
  p.integral_info = integrate_cycle(bundle.curvature, c, resolution);
  p.value = -p.integral_info.value / (2.0 * std::numbers::pi);
  p.nearest = std::lround(p.value);
  p.integral = std::abs(p.value - static_cast<double>(p.nearest)) <= 1e-3;
  return p;
}

/// Closedness of omega and integrality of every generator pairing.
inline void validate_bundle(const BundleSpec& bundle) {
  const double dw = max_abs_on_tangent(ext_d(bundle.curvature), *bundle.base);
  if (dw > 1e-5) throw CheckFailure("curvature is not closed (max |d omega| = " + std::to_string(dw) + ")");
  for (const auto& c : bundle.generators) {
    const auto p = euler_pairing(bundle, c.name);
    if (!p.integral)
      throw CheckFailure("Euler class pairing with '" + c.name + "' is not integral: " + std::to_string(p.value));
  }
}

struct Decomposition {
  BaseForm beta;
  Expr u;
  bool regular = true;
  Vec witness;  // a sample where u and du both (nearly) vanish
};

/// Returns (beta, u) of alpha = beta + u psi and whether 0 looks like a
/// regular value of u on the grid.
inline Decomposition decompose_alpha(const InvariantForm& alpha, double tol = 1e-8, int jobs = 0) {
  if (alpha.degree() != 1) throw ConstraintViolation("decompose_alpha needs an invariant 1-form");
  Decomposition dcmp{alpha.a, alpha.b.coeff(0)};
  const auto& m = *alpha.bundle->base;
  const BaseForm du = d(alpha.bundle->base, dcmp.u);
  const FormBatch batch({du}, {dcmp.u});
  const auto r = sweep_min(m, 0.0, jobs, "regularity", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (std::abs(batch.scalar_value(0, ws)) >= tol) return std::numeric_limits<double>::infinity();
    const Frame fr = m.frame_at(s.point);
    double g = 0.0;
    for (const auto& v : fr.vectors) {
      const double c = batch.form_value(0, {v}, ws);
      g += c * c;
    }
    return std::sqrt(g);
  });
  dcmp.regular = !(r.min_value < tol);
  if (!dcmp.regular) dcmp.witness = r.argmin;
  return dcmp;
}

}  // namespace cbundle
