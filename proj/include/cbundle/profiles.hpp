#pragma once

// One-variable profile functions: the neck pair (f, g) and the collar pair
// (b, c).  All are built from polynomial splines so derivatives are exact.

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"

namespace cbundle {

namespace detail {

/// Septic rise from 0 at a to 1 at b (the middle piece of smoothstep).
inline Poly septic_rise(double a, double b) { return smoothstep(a, b)->pieces()[1]; }

inline Poly one_minus(const Poly& p) {
  Poly q = p;
  for (auto& c : q.c) c = -c;
  q.c[0] += 1.0;
  return q;
}

}  // namespace detail

struct ProfileParams {
  double eps = 0.1;               // domain is (-1-eps, 1+eps)
  double plateau_height = 50.0;   // H
  double transition_width = 0.2;  // width of the plateau's rising edge, starting at t = -0.9
  double bump_start = 0.9;        // plateau support is |t| < bump_start
  double exp_blend = 0.25;        // e^{t+1} and e^{1-t} are blended on |t| < exp_blend
  double g_width = 0.5;           // g goes from 1 to -1 on |t| < g_width
};

/// f = E + H P and g, with E(t) = e^{t+1}(1 - s(t)) + e^{1-t} s(t) even and
/// equal to e^{t+1} for t <= -exp_blend, P an even plateau bump, and g an odd
/// step from 1 to -1.
class ProfilePair {
 public:
  explicit ProfilePair(ProfileParams p = {}) : p_(p) {
    if (!(p.eps > 0) || !(p.transition_width > 0) || !(p.g_width > 0) || !(p.exp_blend > 0))
      throw ConstraintViolation("profile widths must be positive");
    if (p.bump_start - p.transition_width < p.g_width)
      throw ConstraintViolation("the plateau must cover the support of g'");
    if (p.bump_start >= 1.0 - 1e-12) throw ConstraintViolation("the plateau must stay inside (-1, 1)");
    blend_ = smoothstep(-p.exp_blend, p.exp_blend, "blend");
    const double a = -p.bump_start, b = a + p.transition_width;
    const Poly rise = detail::septic_rise(a, b);
    const Poly fall = detail::one_minus(detail::septic_rise(-b, -a));
    bump_ = std::make_shared<const Spline>("bump", std::vector<double>{a, b, -b, -a},
                                           std::vector<Poly>{Poly{a, {0.0}}, rise, Poly{b, {1.0}}, fall, Poly{-a, {0.0}}});
    gstep_ = smoothstep(-p.g_width, p.g_width, "gstep");
  }

  const ProfileParams& params() const { return p_; }
  double eps() const { return p_.eps; }
  double delta() const { return 1.0 - p_.bump_start; }

  Expr f(const Expr& t) const {
    const Expr s = compose(blend_, t);
    return exp(t + 1.0) * (1.0 - s) + exp(1.0 - t) * s + p_.plateau_height * compose(bump_, t);
  }
  Expr g(const Expr& t) const { return 1.0 - 2.0 * compose(gstep_, t); }

  double f(double t) const { return f(Expr(t)).const_value(); }
  double g(double t) const { return g(Expr(t)).const_value(); }
  double df(double t) const {
    const double s = (*blend_)(t), ds = (*blend_->derivative())(t);
    return std::exp(t + 1.0) * (1.0 - s) - std::exp(1.0 - t) * s + ds * (std::exp(1.0 - t) - std::exp(t + 1.0)) +
           p_.plateau_height * (*bump_->derivative())(t);
  }
  double dg(double t) const { return -2.0 * (*gstep_->derivative())(t); }
  double wronskian(double t) const { return df(t) * g(t) - f(t) * dg(t); }

  std::shared_ptr<const Spline> bump() const { return bump_; }

 private:
  ProfileParams p_;
  std::shared_ptr<const Spline> blend_, bump_, gstep_;
};

struct ProfileValidation {
  double f_min = 0.0;  // min f where |g'| > 1e-9
  double w_min = 0.0;  // min f'g - fg' where |g'| > 1e-9
  int sign_changes = 0;
  std::size_t grid = 0;
};

/// Checks the four defining conditions of a neck profile pair on an n-point
/// cell-centred grid of (-1-eps, 1+eps); throws ValidationError naming the
/// violated condition and a witness t.
inline ProfileValidation validate_profiles(const ProfilePair& pp, int n = 10000) {
  const double eps = pp.eps(), delta = pp.delta();
  const double lo = -1.0 - eps, width = 2.0 + 2.0 * eps;
  ProfileValidation v;
  v.grid = static_cast<std::size_t>(n);
  v.f_min = v.w_min = std::numeric_limits<double>::infinity();
  double prev_g = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = lo + width * (i + 0.5) / n;
    const double f = pp.f(t), g = pp.g(t), fm = pp.f(-t), gm = pp.g(-t);
    std::ostringstream os;
    // (1) f even, nowhere zero, f = e^{t+1} near the left end.
    if (std::abs(f - fm) > 1e-12 * (1.0 + std::abs(f))) {
      os << "f(t) = " << f << ", f(-t) = " << fm;
      throw ValidationError("f even", t, os.str());
    }
    if (!(f > 0.0)) {
      os << "f(t) = " << f;
      throw ValidationError("f nowhere zero", t, os.str());
    }
    if (t <= -1.0 + delta && std::abs(f - std::exp(t + 1.0)) > 1e-12) {
      os << "f(t) - e^{t+1} = " << f - std::exp(t + 1.0);
      throw ValidationError("f = e^{t+1} near the left end", t, os.str());
    }
    // (2) g odd, 1 near the left end, a single zero.
    if (std::abs(g + gm) > 1e-12) {
      os << "g(t) + g(-t) = " << g + gm;
      throw ValidationError("g odd", t, os.str());
    }
    if (t <= -1.0 + delta && g != 1.0) {
      os << "g(t) = " << g;
      throw ValidationError("g = 1 near the left end", t, os.str());
    }
    if (i > 0 && ((prev_g > 0) != (g > 0) || g == 0.0)) ++v.sign_changes;
    prev_g = g;
    // (3) f'g - fg' > 0.
    const double w = pp.wronskian(t);
    if (!(w > 0.0)) {
      os << "f'g - fg' = " << w;
      throw ValidationError("f'g - fg' > 0", t, os.str());
    }
    // (4) f and f'g - fg' large where g' != 0.
    if (std::abs(pp.dg(t)) > 1e-9) {
      v.f_min = std::min(v.f_min, f);
      v.w_min = std::min(v.w_min, w);
    }
  }
  if (v.sign_changes != 1)
    throw ValidationError("g has a single zero", 0.0, std::to_string(v.sign_changes) + " sign changes on the grid");
  if (!(v.f_min > 1.0) || !(v.w_min > 1.0)) {
    std::ostringstream os;
    os << "F_min = " << v.f_min << ", W_min = " << v.w_min << " (both must exceed 1)";
    throw ValidationError("f >> 1 and f'g - fg' >> 1 where g' != 0", 0.0, os.str());
  }
  return v;
}

/// Default-family profiles; only validated pairs are returned.
inline ProfilePair make_profiles(const ProfileParams& p = {}, ProfileValidation* out = nullptr) {
  ProfilePair pp(p);
  const auto v = validate_profiles(pp);
  if (out) *out = v;
  return pp;
}

struct CollarParams {
  double eps = 0.1;
  double slope = 8.0;     // b' for t >= eps/2
  double c_end = 0.9;     // c = 0 for t >= c_end
};

/// b: [0,1] -> [0, inf) increasing, 0 on [0, eps/4], b' = slope on [eps/2, 1];
/// c: 1 on [0, eps], 0 on [c_end, 1].
class CollarProfile {
 public:
  explicit CollarProfile(CollarParams p = {}) : p_(p) {
    if (!(p.eps > 0) || !(p.c_end > p.eps) || p.c_end >= 1.0) throw ConstraintViolation("invalid collar parameters");
    ramp_ = smoothstep(p.eps / 4.0, p.eps / 2.0, "bramp")->antiderivative(0.0, "b");
    cstep_ = smoothstep(p.eps, p.c_end, "cstep");
  }
  const CollarParams& params() const { return p_; }
  Expr b(const Expr& t) const { return p_.slope * compose(ramp_, t); }
  Expr c(const Expr& t) const { return 1.0 - compose(cstep_, t); }
  double b(double t) const { return p_.slope * (*ramp_)(t); }
  double db(double t) const { return p_.slope * (*ramp_->derivative())(t); }
  double c(double t) const { return 1.0 - (*cstep_)(t); }
  double dc(double t) const { return -(*cstep_->derivative())(t); }

 private:
  CollarParams p_;
  std::shared_ptr<const Spline> ramp_, cstep_;
};

/// Conditions on (b, c) on an n-point grid of [0, 1].
inline void validate_collar(const CollarProfile& cp, int n = 10000) {
  const double eps = cp.params().eps;
  double prev_b = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    const double b = cp.b(t), c = cp.c(t);
    if (b < prev_b) throw ValidationError("b monotone", t, "b decreases");
    prev_b = b;
    if (t <= eps / 4.0 && b != 0.0) throw ValidationError("b = 0 near 0", t, "b = " + std::to_string(b));
    if (t > eps / 2.0 && !(cp.db(t) > 0.0)) throw ValidationError("b' > 0 for t > eps/2", t, "b' = " + std::to_string(cp.db(t)));
    if (t <= eps && c != 1.0) throw ValidationError("c = 1 on [0, eps]", t, "c = " + std::to_string(c));
    if (t >= cp.params().c_end && c != 0.0) throw ValidationError("c = 0 near 1", t, "c = " + std::to_string(c));
    if (c < 0.0 || c > 1.0) throw ValidationError("c in [0, 1]", t, "c = " + std::to_string(c));
  }
}

}  // namespace cbundle
