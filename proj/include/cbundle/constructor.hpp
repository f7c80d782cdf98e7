#pragma once

// Building invariant contact forms from pieces: Boothby-Wang forms over
// symplectic bases, collar normalisation, gauge alignment along a collar,
// the neck over [-1,1] x Gamma, gluing, scale tuning and contactisation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"
#include "cbundle/forms.hpp"
#include "cbundle/invariant.hpp"
#include "cbundle/profiles.hpp"
#include "cbundle/splitting.hpp"

namespace cbundle {

// ---------------------------------------------------------------------------
// Boothby-Wang

/// alpha = psi if the curvature is symplectic for the base orientation,
/// alpha = -psi if its negation is.
inline InvariantForm boothby_wang(const BundlePtr& bundle, const SweepOptions& opt = {}) {
  const auto& m = bundle->base;
  const BaseForm zero = BaseForm::zero(m, 1);
  std::string why;
  for (double sign : {1.0, -1.0}) {
    InvariantForm alpha(zero, BaseForm::scalar(m, sign), bundle);
    const auto r = contact_check(alpha, opt);
    if (r.passed()) return alpha;
    why += (why.empty() ? "" : "; ") + std::string(sign > 0 ? "psi: " : "-psi: ") + describe(r.sweep);
  }
  throw CheckFailure("curvature is neither symplectic nor anti-symplectic: " + why);
}

// ---------------------------------------------------------------------------
// Collar normalisation

/// Data on a collar [0,1] x Gamma whose outer boundary is t = 1:
/// omega_plus = omega_gamma + d gamma with omega_gamma pulled back from Gamma.
struct CollarData {
  ManifoldPtr manifold;
  Expr t;                 // collar coordinate
  TransverseAxis axis;    // sampling parameter along which t varies
  BaseForm omega_plus;
  BaseForm omega_gamma;
  BaseForm gamma;
  BaseForm beta;          // contact form on the slices
  int n = 2;              // half the dimension of the collar
};

struct CollarResult {
  BaseForm omega;                          // omega_gamma + d(c gamma) + d(b K beta)
  PositivityReport sweep;                  // omega^n on the collar
  double primitive_residual = 0.0;         // |omega_plus - omega_gamma - d gamma|
  double normal_form_residual = 0.0;       // |omega - omega_gamma - d(b K beta)| on t >= c_end
  std::vector<FrameSweep> slice_w2;        // input condition on sampled slices
};

inline std::vector<double> default_collar_slices() { return {0.25, 0.5, 0.75}; }

/// Replaces omega_plus near t = 1 by omega_gamma + d(b K beta).  The input is
/// validated first: d gamma must account for omega_plus - omega_gamma, and
/// (w2) must hold on sampled slices for omega_gamma + c d gamma, c in {0, 1/2, 1}.
inline CollarResult collar_normalize(const CollarData& cd, const CollarProfile& profile, double K = 1.0,
                                     const std::vector<double>& t_slices = default_collar_slices(),
                                     double tol = 1e-9, int jobs = 0) {
  const ModelManifold& m = *cd.manifold;
  CollarResult res;
  res.primitive_residual = max_abs_on_tangent(cd.omega_plus - cd.omega_gamma - ext_d(cd.gamma), m, {}, 0.0, jobs);
  if (res.primitive_residual > 1e-5) {
    std::ostringstream os;
    os << "omega_plus - omega_gamma is not d gamma (residual " << res.primitive_residual << ")";
    throw ConstraintViolation(os.str());
  }
  const BaseForm dgamma = ext_d(cd.gamma);
  for (double ts : t_slices) {
    const auto sd = make_slice(cd.beta, Expr(ts) - cd.t, cd.axis, 0.0, jobs);
    if (sd.mesh.empty()) throw ConstraintViolation("collar slice t = " + std::to_string(ts) + " is empty");
    for (double c : {0.0, 0.5, 1.0}) {
      auto w2 = weak_filling_w2(sd, cd.omega_gamma + Expr(c) * dgamma, cd.n, default_b_samples(), tol, jobs);
      if (!w2.report.passed) {
        std::ostringstream os;
        os << "collar input fails w2 on slice t = " << ts << " with c = " << c << ": " << describe(w2.report);
        throw CheckFailure(os.str());
      }
      res.slice_w2.push_back(std::move(w2));
    }
  }

  const BaseForm kb = Expr(K) * cd.beta;
  res.omega = cd.omega_gamma + ext_d(profile.c(cd.t) * cd.gamma) + ext_d(profile.b(cd.t) * kb);
  SweepOptions o;
  o.tol = tol;
  o.jobs = jobs;
  o.label = "collar omega^n";
  res.sweep = positivity_sweep(wedge_power(res.omega, cd.n), m, o);
  if (!res.sweep.passed) {
    std::ostringstream os;
    os << "normalised collar is not symplectic (" << describe(res.sweep)
       << "); b' must be large compared with max{1, b, |c'|}: raise the slope";
    throw TuningFailure(os.str());
  }
  const BaseForm normal = cd.omega_gamma + ext_d(profile.b(cd.t) * kb);
  res.normal_form_residual =
      max_abs_on_tangent(res.omega - normal, m, cd.t - Expr(profile.params().c_end), 0.0, jobs);
  if (res.normal_form_residual > 1e-6) {
    std::ostringstream os;
    os << "collar output is not in normal form near t = 1 (residual " << res.normal_form_residual << ")";
    throw CheckFailure(os.str());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Gauge alignment

struct AlignResult {
  BaseForm gamma_slice;   // t-frozen slice representative
  Expr h;                 // gamma = gamma_slice + dh, h = 0 at the lower end
  BaseForm dh;
  BaseForm adjusted;      // gamma - d(chi h)
  double closed_residual = 0.0;
  double residual = 0.0;  // |gamma - gamma_slice - dh| on tangent frames
};

namespace detail {

/// Composite 5-point Gauss-Legendre rule for f on [a, b].
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 32) {
  static const double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640, -0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  const double hw = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * hw;
    for (int k = 0; k < 5; ++k) sum += w[k] * f(mid + 0.5 * hw * x[k]);
  }
  return 0.5 * hw * sum;
}

/// Field y -> integral over tau in [t0, y[t_coord]] of e(y with t replaced by tau).
inline Expr t_integral(const std::string& name, const Expr& e, int t_coord, double t0) {
  if (e.is_const() && e.const_value() == 0.0) return Expr(0.0);
  return opaque(name, [e, t_coord, t0](std::span<const double> p) {
    thread_local std::vector<double> q;
    q.assign(p.begin(), p.end());
    const double t = p[static_cast<std::size_t>(t_coord)];
    return gauss_legendre([&](double tau) {
      q[static_cast<std::size_t>(t_coord)] = tau;
      return e(q);
    }, t0, t);
  });
}

}  // namespace detail

/// Splits a closed 1-form gamma on a collar with coordinate x_{t_coord} into
/// a t-frozen slice part and an exact part dh, h integrated from t0.
inline AlignResult connection_align(const BaseForm& gamma, int t_coord, double t0, const Expr& chi, int jobs = 0) {
  if (gamma.degree() != 1) throw ConstraintViolation("connection_align needs a 1-form");
  const auto& mp = gamma.manifold();
  const ModelManifold& m = *mp;
  const int dim = m.ambient_dim();
  if (t_coord < 0 || t_coord >= dim) throw ConstraintViolation("collar coordinate out of range");
  AlignResult r;
  r.closed_residual = max_abs_on_tangent(ext_d(gamma), m, {}, 0.0, jobs);
  if (r.closed_residual > 1e-5) {
    std::ostringstream os;
    os << "gamma is not closed on the collar (|d gamma| = " << r.closed_residual << ")";
    throw CheckFailure(os.str());
  }
  const Expr gt = gamma.coeff({t_coord});
  r.gamma_slice = BaseForm::zero(mp, 1);
  r.dh = BaseForm::zero(mp, 1);
  std::vector<Expr> partials(static_cast<std::size_t>(dim), Expr(0.0));
  for (int i = 0; i < dim; ++i) {
    if (i == t_coord) {
      partials[static_cast<std::size_t>(i)] = gt;
      r.dh = r.dh + BaseForm::monomial(mp, gt, {i});
      continue;
    }
    const Expr gi = gamma.coeff({i});
    if (gi.is_const() && gi.const_value() == 0.0 && gt.diff(i).is_const() && gt.diff(i).const_value() == 0.0) continue;
    r.gamma_slice = r.gamma_slice + BaseForm::monomial(mp, substitute(gi, t_coord, Expr(t0)), {i});
    const Expr dhi = detail::t_integral("dh/dx" + std::to_string(i), gt.diff(i), t_coord, t0);
    partials[static_cast<std::size_t>(i)] = dhi;
    r.dh = r.dh + BaseForm::monomial(mp, dhi, {i});
  }
  const Expr h_int = detail::t_integral("h", gt, t_coord, t0);
  r.h = h_int.is_const() ? h_int
                         : opaque("h", [h_int](std::span<const double> p) { return h_int(p); }, partials);
  r.residual = max_abs_on_tangent(gamma - r.gamma_slice - r.dh, m, {}, 0.0, jobs);
  r.adjusted = gamma - chi * r.dh - r.h * d(mp, chi);
  return r;
}

// ---------------------------------------------------------------------------
// Neck

/// Data for alpha = f(t) beta + g(t) psi_t over [-1,1] x Gamma, where
/// psi_t = psi_ref + gamma_t and gamma_t = (1 - tau(t)) gamma_plus + tau(t) gamma_minus.
/// beta, gamma_plus, gamma_minus and omega_ref are forms on Gamma; the bundle's
/// curvature is omega_ref on the neck.
struct NeckAssembly {
  BundlePtr bundle;
  Expr t;                                 // neck coordinate
  BaseForm beta;
  BaseForm gamma_plus, gamma_minus;
  BaseForm omega_ref;
  ProfileParams profile;
  double tau_width = 0.4;                 // gamma_t is frozen for |t| >= tau_width; keep below g_width
  std::optional<Expr> region;             // samples with region >= 0 belong to the neck
  SweepOptions sweep;                     // tolerance and jobs for the contact sweep
};

struct NeckResult {
  InvariantForm alpha;
  ContactReport contact;
  ProfileParams profile;                  // after escalation
  ProfileValidation validation;
  int escalations = 0;
  double oracle_residual = 0.0;           // relative, where |Omega| > 1e-8
  double frozen_residual = 0.0;           // |d gamma_t / dt| on |t| >= tau_width
};

namespace detail {

inline std::shared_ptr<const Spline> neck_tau(double width) { return smoothstep(-width, width, "tau"); }

inline BaseForm gamma_path(const NeckAssembly& na, const Expr& tau) {
  return (1.0 - tau) * na.gamma_plus + tau * na.gamma_minus;
}

}  // namespace detail

/// Omega from the expansion n dt ^ ((f'g - fg') beta + g^2 d gamma_t/dt) ^
/// (f d beta + g (omega_ref + d gamma_t))^{n-1}, with d/dt taken by
/// fourth-order central differences of the profiles and of tau.
inline BaseForm neck_oracle(const NeckAssembly& na, const ProfilePair& pp, double h = 1e-4) {
  const auto& mp = na.bundle->base;
  const int n = na.bundle->n();
  const Expr& t = na.t;
  const auto tau = detail::neck_tau(na.tau_width);
  const auto ddt = [&](const std::function<Expr(const Expr&)>& fn) {
    return (8.0 * (fn(t + h) - fn(t - h)) - (fn(t + 2.0 * h) - fn(t - 2.0 * h))) / (12.0 * h);
  };
  const Expr f = pp.f(t), g = pp.g(t);
  const Expr fp = ddt([&](const Expr& x) { return pp.f(x); });
  const Expr gp = ddt([&](const Expr& x) { return pp.g(x); });
  const Expr taup = ddt([&](const Expr& x) { return compose(tau, x); });
  const BaseForm dgt_dt = taup * (na.gamma_minus - na.gamma_plus);
  const BaseForm gamma_t = detail::gamma_path(na, compose(tau, t));
  const BaseForm first = (fp * g - f * gp) * na.beta + (g * g) * dgt_dt;
  const BaseForm second = f * ext_d(na.beta) + g * (na.omega_ref + ext_d(gamma_t));
  return Expr(static_cast<double>(n)) * wedge(d(mp, t), first, wedge_power(second, n - 1));
}

namespace detail {

inline double oracle_residual(const BaseForm& engine, const BaseForm& oracle, const ModelManifold& m,
                              const std::optional<Expr>& region, int jobs) {
  std::vector<Expr> scalars;
  if (region) scalars.push_back(*region);
  const FormBatch batch({engine, oracle}, scalars);
  const auto r = sweep_min(m, 0.0, jobs, "neck-oracle", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (region && !(batch.scalar_value(0, ws) >= 0.0)) return std::nullopt;
    const Frame fr = m.frame_at(s.point);
    const double a = batch.form_value(0, fr.vectors, ws), b = batch.form_value(1, fr.vectors, ws);
    if (std::abs(a) <= 1e-8 && std::abs(b) <= 1e-8) return 0.0;
    return -std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  });
  return -r.min_value;
}

}  // namespace detail

/// alpha = (f beta + g gamma_t, g).  If the contact sweep fails the plateau
/// height doubles and its transition width halves until it passes (height
/// capped at 2^20, width floored at 1e-3).
inline NeckResult assemble_neck(const NeckAssembly& na) {
  if (!na.bundle) throw ConstraintViolation("neck needs a bundle");
  if (!(na.tau_width > 0) || na.tau_width >= 1.0) throw ConstraintViolation("tau width must lie in (0, 1)");
  const auto& mp = na.bundle->base;
  const ModelManifold& m = *mp;
  const auto tau = detail::neck_tau(na.tau_width);
  const Expr tau_t = compose(tau, na.t);
  const BaseForm gamma_t = detail::gamma_path(na, tau_t);

  NeckResult res;
  {
    // gamma_t is locally constant in t near the ends: tau' = 0 there.
    const Expr taup = compose(tau->derivative(), na.t);
    const Expr frozen = select(na.t * na.t - na.tau_width * na.tau_width, Expr(1.0), Expr(-1.0));
    const Expr filt = na.region ? select(*na.region, frozen, Expr(-1.0)) : frozen;
    res.frozen_residual = max_abs_coeff(taup * (na.gamma_minus - na.gamma_plus), m, filt, 0.0, na.sweep.jobs);
    if (res.frozen_residual > 1e-12) throw ConstraintViolation("gamma_t is not frozen near the ends of the neck");
  }

  ProfileParams pp_params = na.profile;
  SweepOptions o = na.sweep;
  if (na.region) {
    o.filter = *na.region;
    o.filter_min = 0.0;
  }
  if (o.label.empty()) o.label = "neck contact";
  for (;;) {
    const ProfilePair pp = make_profiles(pp_params, &res.validation);
    const Expr f = pp.f(na.t), g = pp.g(na.t);
    InvariantForm alpha(f * na.beta + g * gamma_t, BaseForm::scalar(mp, g), na.bundle);
    auto cr = contact_check(alpha, o);
    if (cr.passed()) {
      res.alpha = std::move(alpha);
      res.contact = std::move(cr);
      res.profile = pp_params;
      res.oracle_residual = detail::oracle_residual(contact_top_form(res.alpha).b, neck_oracle(na, pp), m,
                                                    na.region, na.sweep.jobs);
      if (res.oracle_residual > 1e-4) {
        std::ostringstream os;
        os << "neck volume disagrees with its expansion (relative residual " << res.oracle_residual << ")";
        throw CheckFailure(os.str());
      }
      return res;
    }
    if (pp_params.plateau_height * 2.0 > std::ldexp(1.0, 20)) {
      throw CheckFailure("neck is not contact even with plateau height " + std::to_string(pp_params.plateau_height) +
                         ": " + describe(cr.sweep));
    }
    pp_params.plateau_height *= 2.0;
    pp_params.transition_width = std::max(1e-3, 0.5 * pp_params.transition_width);
    ++res.escalations;
  }
}

// ---------------------------------------------------------------------------
// Gluing

/// Selectors for the pieces: a sample belongs to B+ where plus_sel >= 0, to B-
/// where minus_sel >= 0 and to the neck otherwise.  The overlap fields select
/// samples where the two adjacent representations must agree.
struct GlueSpec {
  Expr plus_sel;
  Expr minus_sel;
  std::optional<Expr> plus_overlap;
  std::optional<Expr> minus_overlap;
  int jobs = 0;
};

struct GlueResult {
  InvariantForm alpha;
  double seam_residual = 0.0;
  Vec seam_witness;
};

namespace detail {

/// Max over overlap samples of |x - y| over pair coefficients and their first
/// ambient derivatives.
inline std::pair<double, Vec> seam_mismatch(const InvariantForm& x, const InvariantForm& y, const Expr& overlap,
                                            int jobs) {
  const auto& m = *x.bundle->base;
  const int dim = m.ambient_dim();
  std::vector<Expr> diffs;
  const auto collect = [&](const BaseForm& a, const BaseForm& b) {
    const BaseForm dd = a - b;
    for (const auto& [mask, c] : dd.coeffs()) {
      (void)mask;
      diffs.push_back(c);
      for (int i = 0; i < dim; ++i) diffs.push_back(c.diff(i));
    }
  };
  collect(x.a, y.a);
  collect(x.b, y.b);
  if (diffs.empty()) return {0.0, {}};
  std::vector<Expr> scalars{overlap};
  scalars.insert(scalars.end(), diffs.begin(), diffs.end());
  const FormBatch batch({}, scalars);
  const auto r = sweep_min(m, 0.0, jobs, "seam", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (!(batch.scalar_value(0, ws) >= 0.0)) return 0.0;
    double worst = 0.0;
    for (std::size_t j = 1; j < scalars.size(); ++j) worst = std::max(worst, std::abs(batch.scalar_value(j, ws)));
    return -worst;
  });
  return {-r.min_value, r.argmin};
}

inline BaseForm select_form(const Expr& cond, const BaseForm& a, const BaseForm& b) {
  BaseForm out = BaseForm::zero(a.manifold(), a.degree());
  std::vector<Mask> masks;
  for (const auto& [mask, c] : a.coeffs()) masks.push_back(mask);
  for (const auto& [mask, c] : b.coeffs()) masks.push_back(mask);
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  for (Mask mk : masks) out.set(mk, select(cond, a.coeff(mk), b.coeff(mk)));
  return out;
}

inline InvariantForm select_pair(const Expr& cond, const InvariantForm& x, const InvariantForm& y) {
  return InvariantForm(select_form(cond, x.a, y.a), select_form(cond, x.b, y.b), x.bundle);
}

}  // namespace detail

/// One invariant form from alpha_+ on B+, the neck and alpha_- on B-.  Without
/// a neck the result is b_plus itself.
inline GlueResult assemble_global(const InvariantForm& b_plus, const std::optional<InvariantForm>& neck,
                                  const InvariantForm& b_minus, const GlueSpec& spec) {
  GlueResult res;
  if (!neck) {
    res.alpha = b_plus;
    return res;
  }
  detail::same_bundle(b_plus, *neck);
  detail::same_bundle(b_minus, *neck);
  for (const auto& [side, overlap, piece] :
       {std::tuple{"B+", spec.plus_overlap, &b_plus}, std::tuple{"B-", spec.minus_overlap, &b_minus}}) {
    if (!overlap) continue;
    const auto [mis, at] = detail::seam_mismatch(*piece, *neck, *overlap, spec.jobs);
    if (mis > res.seam_residual) {
      res.seam_residual = mis;
      res.seam_witness = at;
    }
    if (mis > 1e-10) {
      std::ostringstream os;
      os << "seam mismatch between " << side << " and the neck: " << mis << " at " << detail::point_string(at);
      throw CheckFailure(os.str());
    }
  }
  res.alpha = detail::select_pair(spec.plus_sel, b_plus, detail::select_pair(spec.minus_sel, b_minus, *neck));
  return res;
}

// ---------------------------------------------------------------------------
// Scale tuning

struct ScaleTuneResult {
  double K = 0.0;
  std::vector<PositivityReport> sweeps;  // one per tested K
  std::vector<FrameSweep> w1;
};

/// Smallest K in 1, 2, 4, ... with (sigma + K d lambda)^n positive on the
/// region and (w1) on the slice.
inline ScaleTuneResult scale_tune(const BaseForm& sigma, const BaseForm& lambda, const ContactSliceData& slice, int n,
                                  const SweepOptions& opt = {}) {
  const ModelManifold& m = *lambda.manifold();
  const BaseForm dl = ext_d(lambda);
  ScaleTuneResult res;
  for (int e = 0; e <= 30; ++e) {
    const double K = std::ldexp(1.0, e);
    const BaseForm w = sigma + Expr(K) * dl;
    SweepOptions o = opt;
    if (o.label.empty()) o.label = "(sigma + K dlambda)^n";
    auto rep = positivity_sweep(wedge_power(w, n), m, o);
    const bool ok = rep.passed;
    res.sweeps.push_back(std::move(rep));
    if (!ok) continue;
    auto w1 = weak_filling_w1(slice, w, n, opt.tol, opt.jobs);
    const bool ok1 = w1.report.passed;
    res.w1.push_back(std::move(w1));
    if (ok1) {
      res.K = K;
      return res;
    }
  }
  throw TuningFailure("no K <= 2^30 makes sigma + K d lambda symplectic and weakly filling: " +
                      describe(res.sweeps.back()));
}

// ---------------------------------------------------------------------------
// Contactisation

struct ContactiseOptions {
  std::optional<TransverseAxis> axis;  // for the boundary {u = 0}; none when u has no zeros
  std::optional<Expr> domain;          // samples with domain >= 0 must have u >= 0
  double eps = 0.05;                   // interior check on {u >= eps}
  double tol = 1e-9;
  int jobs = 0;
};

struct ContactiseResult {
  InvariantForm alpha;
  std::optional<PositivityReport> boundary;
  PositivityReport interior;
  ContactReport contact;
};

/// alpha = u lambda + u psi, with the extension u lambda supplied directly.
inline ContactiseResult contactise(const Expr& u, const BaseForm& ulambda, const BundlePtr& bundle,
                                   const ContactiseOptions& opt = {}) {
  const auto& mp = bundle->base;
  const ModelManifold& m = *mp;
  const int n = bundle->n();
  const auto neg = sweep_min(m, 0.0, opt.jobs, "u", [&](const Sample& s) -> std::optional<double> {
    if (opt.domain && !((*opt.domain)(s.point) >= 0.0)) return std::nullopt;
    return u(s.point);
  });
  if (neg.min_value < -1e-12)
    throw ConstraintViolation("u is negative on the domain at " + detail::point_string(neg.argmin));

  ContactiseResult res;
  if (opt.axis) {
    const auto ds = dividing_set(u, mp, *opt.axis, 0.0, opt.jobs);
    if (!ds.empty()) {
      res.boundary = gamma_contact_check(ulambda, ds, n, opt.tol, opt.jobs);
      if (!res.boundary->passed)
        throw CheckFailure("u lambda does not restrict to a contact form on the boundary: " + describe(*res.boundary));
    }
  }
  SweepOptions o;
  o.tol = opt.tol;
  o.jobs = opt.jobs;
  o.filter = u;
  o.filter_min = opt.eps;
  o.label = "(d lambda + omega)^n";
  const BaseForm w = ext_d((1.0 / u) * ulambda) + bundle->curvature;
  res.interior = positivity_sweep(wedge_power(w, n), m, o);
  if (!res.interior.passed) throw CheckFailure("d lambda + omega is not symplectic inside: " + describe(res.interior));

  res.alpha = InvariantForm(ulambda, BaseForm::scalar(mp, u), bundle);
  SweepOptions oc;
  oc.tol = opt.tol;
  oc.jobs = opt.jobs;
  oc.label = "contactisation";
  res.contact = contact_check(res.alpha, oc);
  if (!res.contact.passed()) throw CheckFailure("contactisation is not contact: " + describe(res.contact.sweep));
  return res;
}

// ---------------------------------------------------------------------------
// Interpolation

struct InterpolationOptions {
  std::optional<TransverseAxis> axis;  // for the kernel comparison on {u = 0}
  double eps = 0.05;                   // |u| >= eps for the d(beta/u) comparison
  int t_samples = 11;
  double tol = 1e-9;
  int jobs = 0;
};

/// Contact check of ((1-t) beta0 + t beta1, u) at equispaced t in [0, 1].
inline std::vector<ContactReport> interpolation_check(const BaseForm& beta0, const BaseForm& beta1, const Expr& u,
                                                      const BundlePtr& bundle, const InterpolationOptions& opt = {}) {
  const auto& mp = bundle->base;
  const ModelManifold& m = *mp;
  const Expr au = select(u, u, -u);
  const double dres = max_abs_on_tangent(ext_d((1.0 / u) * (beta0 - beta1)), m, au, opt.eps, opt.jobs);
  if (dres > 1e-5) {
    std::ostringstream os;
    os << "beta0 and beta1 induce different symplectic forms (|d(beta0/u) - d(beta1/u)| = " << dres << ")";
    throw ConstraintViolation(os.str());
  }
  if (opt.axis) {
    const auto ds = dividing_set(u, mp, *opt.axis, 0.0, opt.jobs);
    for (const auto& z : ds.zeros) {
      double aa = 0, bb = 0, ab = 0;
      for (const auto& v : z.gamma_frame) {
        const double a = beta0.eval(z.point, {v}), b = beta1.eval(z.point, {v});
        aa += a * a;
        bb += b * b;
        ab += a * b;
      }
      if (!(ab > 0.0) || aa * bb - ab * ab > 1e-10 * aa * bb)
        throw ConstraintViolation("beta0 and beta1 have different kernels on {u = 0} at " +
                                  detail::point_string(z.point));
    }
  }
  if (opt.t_samples < 2) throw ConstraintViolation("interpolation needs at least two t samples");
  std::vector<ContactReport> out;
  for (int i = 0; i < opt.t_samples; ++i) {
    const double t = static_cast<double>(i) / (opt.t_samples - 1);
    InvariantForm alpha(Expr(1.0 - t) * beta0 + Expr(t) * beta1, BaseForm::scalar(mp, u), bundle);
    SweepOptions o;
    o.tol = opt.tol;
    o.jobs = opt.jobs;
    o.label = "interpolation t=" + std::to_string(t);
    out.push_back(contact_check(alpha, o));
  }
  return out;
}

}  // namespace cbundle
