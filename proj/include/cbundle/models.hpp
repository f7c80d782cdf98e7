#pragma once

// Concrete bases, bundles and forms used by the gallery, the tests and the
// acceptance runner.  Circle parameters run over [0, 1); sphere points are
// ambient unit vectors.

#include <cmath>
#include <numbers>
#include <optional>

#include "cbundle/bourgeois.hpp"
#include "cbundle/constructor.hpp"
#include "cbundle/expr.hpp"
#include "cbundle/forms.hpp"
#include "cbundle/invariant.hpp"
#include "cbundle/manifold.hpp"
#include "cbundle/splitting.hpp"

namespace cbundle::models {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Cycle2 sphere_cycle(std::string name, std::function<Vec(const Vec&)> embed, int resolution = 400) {
  Cycle2 c{std::move(name), [embed = std::move(embed)](double s, double t) {
             const double th = kPi * s, ph = kTwoPi * t;
             return embed(Vec{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
           }};
  c.periodic_s = false;
  c.resolution = resolution;
  return c;
}

/// x dy ^ dz + y dz ^ dx + z dx ^ dy in ambient coordinates (i, i+1, i+2).
inline BaseForm sphere_area(const ManifoldPtr& m, int i = 0) {
  const Expr x = Expr::var(i), y = Expr::var(i + 1), z = Expr::var(i + 2);
  return BaseForm::monomial(m, x, {i + 1, i + 2}) + BaseForm::monomial(m, y, {i + 2, i}) +
         BaseForm::monomial(m, z, {i, i + 1});
}

// ---------------------------------------------------------------------------

/// T^3 = T^2 x S^1 with alpha = cos(2 pi y) dx + sin(2 pi y) psi.
struct Lutz {
  ManifoldPtr m;
  BundlePtr bundle;
  BaseForm beta;
  Expr u;
  InvariantForm alpha;
  TransverseAxis axis{1};
};

inline Lutz lutz_t3(int resolution = 24) {
  Lutz L;
  L.m = make_manifold({ModelFactor::circle(resolution), ModelFactor::circle(resolution)});
  Cycle2 t2{"T2", [](double s, double t) { return Vec{s, t}; }};
  L.bundle = trivial_bundle(L.m, {t2});
  const Expr y = Expr::var(1);
  L.beta = cos(kTwoPi * y) * BaseForm::dx(L.m, 0);
  L.u = sin(kTwoPi * y);
  L.alpha = InvariantForm::one_form(L.beta, L.u, L.bundle);
  return L;
}

/// S^3 -> S^2 with curvature half the area form, so |<e, [S^2]>| = 1.
struct Hopf {
  ManifoldPtr m;
  BundlePtr bundle;
};

inline Hopf hopf(int resolution = 16) {
  Hopf h;
  h.m = make_manifold({ModelFactor::sphere2(resolution)});
  h.bundle = make_bundle(h.m, 0.5 * sphere_area(h.m), {sphere_cycle("S2", [](const Vec& p) { return p; })});
  return h;
}

// ---------------------------------------------------------------------------

/// Collar [0,1] x T^3 of the annulus model: r = (1 + t)/2, x + iy = r e^{2 pi i phi},
/// beta = cos(2 pi phi) d theta1 - sin(2 pi phi) d theta2,
/// omega_plus = dx ^ d theta1 - dy ^ d theta2 = d(r beta), omega_gamma = d beta,
/// gamma = (r - 1) beta.
struct Collar {
  CollarData data;
  BaseForm lambda;  // r beta
  Expr r;
};

inline Collar collar_t2_annulus(int resolution = 12) {
  Collar c;
  auto m = make_manifold({ModelFactor::interval(0.0, 1.0, resolution), ModelFactor::circle(resolution),
                          ModelFactor::circle(resolution), ModelFactor::circle(resolution)});
  const Expr t = Expr::var(0), phi = Expr::var(3);
  c.r = 0.5 + 0.5 * t;
  const BaseForm beta = cos(kTwoPi * phi) * BaseForm::dx(m, 1) - sin(kTwoPi * phi) * BaseForm::dx(m, 2);
  c.lambda = c.r * beta;
  c.data.manifold = m;
  c.data.t = t;
  c.data.axis = {0};
  c.data.beta = beta;
  c.data.omega_plus = ext_d(c.lambda);
  c.data.omega_gamma = ext_d(beta);
  c.data.gamma = (c.r - 1.0) * beta;
  c.data.n = 2;
  return c;
}

// ---------------------------------------------------------------------------

/// [-span, span] x T^3 with the standard contact form on T^3 and a trivial
/// bundle; t is the first coordinate.
struct ProductNeck {
  ManifoldPtr m;
  BundlePtr bundle;
  Expr t;
  BaseForm beta;
};

inline ProductNeck product_neck(double span = 1.1, int t_resolution = 16, int resolution = 10) {
  ProductNeck p;
  p.m = make_manifold({ModelFactor::interval(-span, span, t_resolution), ModelFactor::circle(resolution),
                       ModelFactor::circle(resolution), ModelFactor::circle(resolution)});
  p.bundle = trivial_bundle(p.m);
  p.t = Expr::var(0);
  const Expr phi = Expr::var(3);
  p.beta = cos(kTwoPi * phi) * BaseForm::dx(p.m, 1) - sin(kTwoPi * phi) * BaseForm::dx(p.m, 2);
  return p;
}

inline NeckAssembly product_neck_assembly(const ProductNeck& p, const BaseForm& gamma_plus,
                                          const BaseForm& gamma_minus) {
  NeckAssembly na;
  na.bundle = p.bundle;
  na.t = p.t;
  na.beta = p.beta;
  na.gamma_plus = gamma_plus;
  na.gamma_minus = gamma_minus;
  na.omega_ref = BaseForm::zero(p.m, 2);
  return na;
}

// ---------------------------------------------------------------------------

/// T^2 x D^2 in polar coordinates (theta1, theta2, r, phi), r in [0, 1.05] so
/// that the boundary r = 1 lies inside the sampled range.  u = 1 - r^2 and
/// u lambda = x d theta1 - y d theta2.  The curvature is c d theta1 ^ d theta2.
struct T2D2 {
  ManifoldPtr m;
  BundlePtr bundle;
  Expr u;
  BaseForm ulambda;
  TransverseAxis axis{2};
  Expr domain;  // r <= 1
  Expr x, y;
};

inline T2D2 t2d2(double c = 0.0, int resolution = 12) {
  T2D2 d;
  d.m = make_manifold({ModelFactor::circle(resolution), ModelFactor::circle(resolution),
                       ModelFactor::interval(0.0, 1.05, 21), ModelFactor::circle(resolution)});
  const Expr r = Expr::var(2), phi = Expr::var(3);
  d.x = r * cos(kTwoPi * phi);
  d.y = r * sin(kTwoPi * phi);
  d.u = 1.0 - r * r;
  d.ulambda = d.x * BaseForm::dx(d.m, 0) - d.y * BaseForm::dx(d.m, 1);
  d.domain = 1.0 - r;
  Cycle2 t2{"T2", [](double s, double t) { return Vec{s, t, 0.5, 0.0}; }};
  d.bundle = make_bundle(d.m, Expr(c) * wedge(BaseForm::dx(d.m, 0), BaseForm::dx(d.m, 1)), {t2});
  return d;
}

// ---------------------------------------------------------------------------

/// T^2 x S^2 with the bundle of Euler number k on the sphere factor,
/// coordinates (theta1, theta2, X, Y, Z).  Gamma = {Z = 0} = T^3, B+ = {Z > 0}.
/// The neck coordinate t(Z) is odd and decreasing, equal to -2Z near the
/// equator and to log(rho/rho0) - 1 for Z >= 0.45, so that e^{t+1} beta is
/// the cap form lambda = (X d theta1 - Y d theta2)/rho0 there.  The curvature
/// k dW ^ dphi is supported in 0.7 <= Z <= 0.9; psi_+ = psi + k(1 - W) dphi is
/// flat on the upper cap.
struct T2S2 {
  int k = 0;
  ManifoldPtr m;
  BundlePtr bundle;
  Expr X, Y, Z, rho, t;
  BaseForm beta, lambda, dphi, gamma_plus_cap;
  NeckAssembly neck;
  InvariantForm cap_plus, cap_minus;
  GlueSpec glue;
  TransverseAxis axis{2};
  double z0 = 0.5;
};

inline T2S2 t2s2(int k, int circle_resolution = 12, int sphere_resolution = 16) {
  T2S2 s;
  s.k = k;
  s.m = make_manifold({ModelFactor::circle(circle_resolution), ModelFactor::circle(circle_resolution),
                       ModelFactor::sphere2(sphere_resolution)});
  const auto& m = s.m;
  s.X = Expr::var(2);
  s.Y = Expr::var(3);
  s.Z = Expr::var(4);
  const Expr& X = s.X;
  const Expr& Y = s.Y;
  const Expr& Z = s.Z;
  const Expr rho2 = X * X + Y * Y;
  s.rho = sqrt(rho2);
  const double rho0 = std::sqrt(1.0 - s.z0 * s.z0);

  const auto blend = smoothstep(0.25, 0.45, "t-blend");
  // Written with rho rather than Z so that e^{t+1} beta reproduces lambda exactly.
  const auto tc_rho = [&] { return 0.5 * log(rho2 / (rho0 * rho0)) - 1.0; };
  const Expr sbp = compose(blend, Z), sbm = compose(blend, -Z);
  const Expr tp = (1.0 - sbp) * (-2.0 * Z) + sbp * tc_rho();
  const Expr tm = -((1.0 - sbm) * (2.0 * Z) + sbm * tc_rho());
  s.t = select(Z, tp, tm);

  const BaseForm dt1 = BaseForm::dx(m, 0), dt2 = BaseForm::dx(m, 1);
  s.beta = (X / s.rho) * dt1 - (Y / s.rho) * dt2;
  s.lambda = (X / rho0) * dt1 - (Y / rho0) * dt2;
  s.dphi = (X / rho2) * BaseForm::dx(m, 3) - (Y / rho2) * BaseForm::dx(m, 2);
  const Expr W = compose(smoothstep(0.7, 0.9, "W"), Z);
  const double kk = static_cast<double>(k);
  const BaseForm omega = kk * wedge(d(m, W), s.dphi);
  s.gamma_plus_cap = (kk * (1.0 - W)) * s.dphi;

  Cycle2 sph = sphere_cycle("S2", [](const Vec& p) { return Vec{0.0, 0.0, p[0], p[1], p[2]}; });
  Cycle2 tor{"T2", [](double a, double b) { return Vec{a, b, 1.0, 0.0, 0.0}; }};
  s.bundle = make_bundle(m, omega, {sph, tor});

  s.neck.bundle = s.bundle;
  s.neck.t = s.t;
  s.neck.beta = s.beta;
  s.neck.gamma_plus = kk * s.dphi;
  s.neck.gamma_minus = BaseForm::zero(m, 1);
  s.neck.omega_ref = omega;
  s.neck.region = s.z0 * s.z0 - Z * Z;

  s.cap_plus = InvariantForm(s.lambda + s.gamma_plus_cap, BaseForm::scalar(m, 1.0), s.bundle);
  s.cap_minus = InvariantForm(s.lambda, BaseForm::scalar(m, -1.0), s.bundle);

  s.glue.plus_sel = Z - s.z0;
  s.glue.minus_sel = -Z - s.z0;
  s.glue.plus_overlap = (Z - 0.45) * (0.7 - Z);
  s.glue.minus_overlap = -Z - 0.45;
  return s;
}

// ---------------------------------------------------------------------------

/// S^3 in C^2 with the standard contact form and the open book with binding
/// {z1 = 0} and page angle arg z1; B = S^3 x S^1.
struct BourgeoisS3 {
  OpenBookSpec ob;
  CutoffRho cutoff = make_cutoff();
};

inline BourgeoisS3 bourgeois_s3(int resolution = 8, int circle_resolution = 16, double r0 = 0.5, double a = 0.1,
                                double b = 0.4) {
  BourgeoisS3 s{{}, make_cutoff(r0, a, b)};
  auto& ob = s.ob;
  ob.N = make_manifold({ModelFactor::sphere3(resolution)});
  ob.B = make_manifold({ModelFactor::sphere3(resolution), ModelFactor::circle(circle_resolution)});
  const Expr x1 = Expr::var(0), y1 = Expr::var(1), x2 = Expr::var(2), y2 = Expr::var(3);
  const auto& N = ob.N;
  ob.alpha_N = x1 * BaseForm::dx(N, 1) - y1 * BaseForm::dx(N, 0) + x2 * BaseForm::dx(N, 3) - y2 * BaseForm::dx(N, 2);
  ob.bx = x1;
  ob.by = y1;
  ob.r0 = r0;
  ob.page_axis = {1};
  ob.binding_slice = [](double zx, double zy) {
    const double s2 = std::sqrt(std::max(0.0, 1.0 - zx * zx - zy * zy));
    std::vector<Frame> out;
    for (int j = 0; j < 16; ++j) {
      const double xi = kTwoPi * (j + 0.5) / 16;
      Frame fr;
      fr.point = {zx, zy, s2 * std::cos(xi), s2 * std::sin(xi)};
      fr.vectors = {Vec{0.0, 0.0, -std::sin(xi), std::cos(xi)}};
      out.push_back(std::move(fr));
    }
    return out;
  };
  return s;
}

}  // namespace cbundle::models
