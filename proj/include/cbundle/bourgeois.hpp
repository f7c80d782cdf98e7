#pragma once

// Contact forms on N x T^2 from an open book on N: alpha_N - x dphi + y dtheta,
// with (x, y) = rho(r) (cos, sin) of the page angle.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"
#include "cbundle/forms.hpp"
#include "cbundle/invariant.hpp"
#include "cbundle/manifold.hpp"
#include "cbundle/splitting.hpp"

namespace cbundle {

/// An open book on N given through Cartesian coordinates (bx, by) of the D^2
/// factor of a binding neighbourhood B_N x D^2: r = |(bx, by)| and the page
/// angle is arg(bx + i by).  B is N x S^1 with the circle coordinate last.
struct OpenBookSpec {
  ManifoldPtr N;
  ManifoldPtr B;
  BaseForm alpha_N;  // on N
  Expr bx, by;
  double r0 = 0.5;
  TransverseAxis page_axis{1};  // global sampling parameter of N along which the page angle turns
  /// Points and positive tangent frames of B_N x {z}, for the smallness check.
  std::function<std::vector<Frame>(double zx, double zy)> binding_slice;
};

/// rho(r) = r (1 - S(r)) + S(r), S a smooth step on [a, b].
class CutoffRho {
 public:
  CutoffRho(double r0, double a, double b) : r0_(r0), a_(a), b_(b) {
    if (!(a > 0) || !(b > a) || !(r0 > b)) throw ConstraintViolation("cutoff transition must lie in (0, r0)");
    if (b >= 1.0) throw ConstraintViolation("cutoff transition must end below r = 1");
    step_ = smoothstep(a, b, "rho-step");
  }
  double r0() const { return r0_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double operator()(double r) const {
    const double s = (*step_)(r);
    return r * (1.0 - s) + s;
  }
  double derivative(double r) const {
    const double s = (*step_)(r), ds = (*step_->derivative())(r);
    return (1.0 - s) + ds * (1.0 - r);
  }
  Expr rho(const Expr& r) const {
    const Expr s = compose(step_, r);
    return select(r - a_, r * (1.0 - s) + s, r);
  }
  /// rho(r)/r, equal to 1 on r <= a so that no division by r happens there.
  Expr ratio(const Expr& r) const {
    const Expr s = compose(step_, r);
    return select(r - a_, (1.0 - s) + s / r, Expr(1.0));
  }

 private:
  double r0_, a_, b_;
  std::shared_ptr<const Spline> step_;
};

/// The three cutoff conditions on an n-point grid of [0, 1.5 r0].
inline void validate_cutoff(const CutoffRho& c, int n = 10000) {
  const double hi = 1.5 * c.r0();
  for (int i = 0; i < n; ++i) {
    const double r = hi * (i + 0.5) / n;
    const double v = c(r), dv = c.derivative(r);
    if (r <= c.a() && v != r) throw ValidationError("rho(r) = r near 0", r, "rho = " + std::to_string(v));
    if (dv < 0.0) throw ValidationError("rho' >= 0", r, "rho' = " + std::to_string(dv));
    if (r >= c.b() && v != 1.0) throw ValidationError("rho = 1 near r0", r, "rho = " + std::to_string(v));
  }
}

inline CutoffRho make_cutoff(double r0 = 0.5, double a = 0.1, double b = 0.4) {
  CutoffRho c(r0, a, b);
  validate_cutoff(c);
  return c;
}

struct XYFields {
  Expr x, y, rho, r;
  double identity_residual = 0.0;  // |x dy - y dx - rho^2 dphi| away from the binding
};

namespace detail {

/// Copy of a form on a manifold whose ambient coordinates extend those of its own.
inline BaseForm transfer(const BaseForm& f, const ManifoldPtr& target) {
  if (target->ambient_dim() < f.ambient_dim()) throw ConstraintViolation("target manifold has fewer coordinates");
  BaseForm out = BaseForm::zero(target, f.degree());
  for (const auto& [mask, c] : f.coeffs()) out.set(mask, c);
  return out;
}

}  // namespace detail

inline XYFields xy_fields(const OpenBookSpec& ob, const CutoffRho& rho, int jobs = 0) {
  XYFields xy;
  xy.r = sqrt(ob.bx * ob.bx + ob.by * ob.by);
  const Expr q = rho.ratio(xy.r);
  xy.x = q * ob.bx;
  xy.y = q * ob.by;
  xy.rho = rho.rho(xy.r);
  const auto& m = ob.N;
  const Expr r2 = ob.bx * ob.bx + ob.by * ob.by;
  const BaseForm dphi = (ob.bx / r2) * d(m, ob.by) - (ob.by / r2) * d(m, ob.bx);
  const BaseForm lhs = xy.x * d(m, xy.y) - xy.y * d(m, xy.x);
  xy.identity_residual = max_abs_on_tangent(lhs - (xy.rho * xy.rho) * dphi, *m, xy.r - 0.05, 0.0, jobs);
  return xy;
}

struct OpenBookReport {
  PositivityReport contact;   // alpha_N ^ (d alpha_N)^{n-1} on N
  PositivityReport pages;     // (d alpha_N)^{n-1} on positive page frames, r >= r_min
  PositivityReport binding;   // alpha_N ^ (d alpha_N)^{n-2} on B_N x {z}, |z| <= r0
  bool passed() const { return contact.passed && pages.passed && binding.passed; }
};

/// Sampled check that alpha_N is supported by the open book.
inline OpenBookReport validate_open_book(const OpenBookSpec& ob, double r_min = 0.05, double tol = 1e-9,
                                         int jobs = 0) {
  const ModelManifold& m = *ob.N;
  const int dimN = m.intrinsic_dim();
  if (dimN < 3 || dimN % 2 == 0) throw ConstraintViolation("open book needs an odd-dimensional N of dimension >= 3");
  const int n = (dimN + 1) / 2;  // dim N = 2n - 1
  const BaseForm da = ext_d(ob.alpha_N);
  OpenBookReport rep;
  SweepOptions o;
  o.tol = tol;
  o.jobs = jobs;
  o.label = "alpha_N contact";
  rep.contact = positivity_sweep(wedge(ob.alpha_N, wedge_power(da, n - 1)), m, o);

  const Expr r2 = ob.bx * ob.bx + ob.by * ob.by;
  const BaseForm dphi = (ob.bx / r2) * d(ob.N, ob.by) - (ob.by / r2) * d(ob.N, ob.bx);
  const BaseForm page_form = wedge_power(da, n - 1);
  const FormBatch batch({page_form, dphi}, {r2});
  rep.pages = sweep_min(m, tol, jobs, "pages", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (!(batch.scalar_value(0, ws) >= r_min * r_min)) return std::nullopt;
    // (grad phi, page frame) positive: level frame of u = -phi.
    const auto z = detail::level_frame(m, -1.0 * dphi, s.params, s.point);
    return batch.form_value(0, z.gamma_frame, ws);
  });

  if (!ob.binding_slice) throw ConstraintViolation("open book needs binding slices for the smallness check");
  const BaseForm slice_form = wedge(ob.alpha_N, wedge_power(da, n - 2));
  detail::MinAcc acc;
  std::size_t idx = 0;
  const int nr = 6, nth = 12;
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j < (i == 0 ? 1 : nth); ++j) {
      const double rr = ob.r0 * i / nr, th = 2.0 * std::numbers::pi * j / nth;
      for (const auto& fr : ob.binding_slice(rr * std::cos(th), rr * std::sin(th))) {
        const double v = slice_form.eval(fr);
        detail::finite_or_throw(v, fr.point, "binding slice");
        acc.offer(v, idx++, fr.point);
      }
    }
  rep.binding.label = "binding slices";
  rep.binding.min_value = acc.value;
  rep.binding.argmin = acc.point;
  rep.binding.argmin_index = acc.index;
  rep.binding.samples = acc.count;
  rep.binding.tolerance = tol;
  rep.binding.passed = acc.count > 0 && acc.value > tol;
  return rep;
}

struct BourgeoisResult {
  InvariantForm alpha;  // (alpha_N - x dphi_coord, y) on the trivial bundle over B
  ContactReport contact;
};

inline BourgeoisResult bourgeois_form(const OpenBookSpec& ob, const XYFields& xy, const SweepOptions& opt = {}) {
  const auto& B = ob.B;
  const int phi_coord = ob.N->ambient_dim();
  if (B->ambient_dim() != phi_coord + 1) throw ConstraintViolation("B must be N x S^1");
  const auto bundle = trivial_bundle(B);
  BourgeoisResult res;
  const BaseForm beta = detail::transfer(ob.alpha_N, B) - xy.x * BaseForm::dx(B, phi_coord);
  res.alpha = InvariantForm::one_form(beta, xy.y, bundle);
  SweepOptions o = opt;
  if (o.label.empty()) o.label = "bourgeois contact";
  res.contact = contact_check(res.alpha, o);
  if (!res.contact.passed()) throw CheckFailure("Bourgeois form is not contact: " + describe(res.contact.sweep));
  return res;
}

struct BourgeoisSplitting {
  DividingSetMesh dividing;
  PositivityReport gamma_contact;
  SymplecticPieces pieces;
  std::size_t hemisphere_mismatch = 0;  // samples where sign(y) differs from the side of the page angle
  bool passed() const { return !dividing.empty() && gamma_contact.passed && pieces.passed() && hemisphere_mismatch == 0; }
};

/// Dividing set {y = 0}, the contact condition for beta_0 on it and the
/// symplectic pieces +-d(alpha_N/y - (x/y) dphi) on {+-y >= eps}.
inline BourgeoisSplitting bourgeois_splitting(const OpenBookSpec& ob, const BourgeoisResult& br, double eps = 0.0,
                                              double tol = 1e-9, int jobs = 0) {
  BourgeoisSplitting sp;
  const Expr& u = br.alpha.b.coeff(0);
  const int n = br.alpha.bundle->n();
  sp.dividing = dividing_set(u, ob.B, ob.page_axis, 0.0, jobs);
  if (sp.dividing.empty()) throw CheckFailure("y has no zeros on the sample grid");
  sp.gamma_contact = gamma_contact_check(br.alpha.a, sp.dividing, n, tol, jobs);
  sp.pieces = symplectic_pieces(br.alpha.a, u, br.alpha.bundle->curvature, n, eps, tol, jobs);
  const ModelManifold& m = *ob.B;
  Sample s;
  for (std::size_t i = 0; i < m.sample_count(); ++i) {
    m.sample(i, s);
    const double uy = u(s.point), side = ob.by(s.point);
    if ((uy > 0) != (side > 0) || (uy < 0) != (side < 0)) ++sp.hemisphere_mismatch;
  }
  return sp;
}

}  // namespace cbundle
