#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cbundle/splitting.hpp"

using namespace cbundle;

namespace {

const double kPi = std::numbers::pi;
const double kTwoPi = 2.0 * kPi;

struct Lutz {
  ManifoldPtr m = make_manifold({ModelFactor::circle(24), ModelFactor::circle(24)});
  Expr t2 = Expr::var(1);
  BaseForm beta = cos(kTwoPi * t2) * BaseForm::dx(m, 0);
  Expr u = sin(kTwoPi * t2);
  BaseForm omega = BaseForm::zero(m, 2);
};

}  // namespace

TEST(DividingSet, LutzTwoCircles) {
  Lutz L;
  const auto ds = dividing_set(L.u, L.m, {1});
  ASSERT_EQ(ds.zeros.size(), 48u);
  int at0 = 0, at_half = 0;
  for (const auto& z : ds.zeros) {
    EXPECT_LE(std::abs(L.u(z.point)), 1e-10);
    if (std::abs(z.point[1]) < 1e-9 || std::abs(z.point[1] - 1.0) < 1e-9) ++at0;
    if (std::abs(z.point[1] - 0.5) < 1e-9) ++at_half;
  }
  EXPECT_EQ(at0, 24);
  EXPECT_EQ(at_half, 24);
  EXPECT_EQ(ds.positive_samples(), ds.negative_samples());
}

TEST(DividingSet, EmptyForPositiveU) {
  Lutz L;
  const auto ds = dividing_set(Expr(1.0) + 0.0 * L.t2, L.m, {0});
  EXPECT_TRUE(ds.empty());
  EXPECT_EQ(ds.positive_samples(), L.m->sample_count());
}

TEST(DividingSet, TangentialZeroIsDegenerate) {
  Lutz L;
  // (t2 - 0.3)^3 changes sign but has vanishing derivative at its zero.
  const Expr c = L.t2 - 0.3;
  EXPECT_THROW(dividing_set(c * c * c, L.m, {1}), DegeneracyError);
}

TEST(GammaContact, LutzPasses) {
  Lutz L;
  const auto ds = dividing_set(L.u, L.m, {1});
  const auto r = gamma_contact_check(L.beta, ds, 1);
  EXPECT_TRUE(r.passed);
  // beta_0 = +-dtheta1 on the two circles, evaluated on boundary-oriented frames.
  EXPECT_NEAR(r.min_value, 1.0, 1e-9);
  EXPECT_TRUE(gamma_orientation_check(L.beta, ds, 1).passed);
}

TEST(GammaContact, ConformalInvariance) {
  Lutz L;
  const auto ds = dividing_set(L.u, L.m, {1});
  for (double c : {0.5, 2.0}) EXPECT_TRUE(gamma_contact_check(c * L.beta, ds, 1).passed);
  EXPECT_FALSE(gamma_contact_check(-1.0 * L.beta, ds, 1).passed);
}

TEST(SymplecticPieces, LutzBothPieces) {
  Lutz L;
  const auto sp = symplectic_pieces(L.beta, L.u, L.omega, 1, 0.1);
  EXPECT_TRUE(sp.plus.passed);
  EXPECT_TRUE(sp.minus.passed);
  EXPECT_LE(sp.closed_residual, 1e-5);
  EXPECT_LE(sp.volume_residual, 1e-5);
  EXPECT_TRUE(sp.passed());
}

TEST(SymplecticPieces, BoothbyWangCollapse) {
  const auto m = make_manifold({ModelFactor::circle(8), ModelFactor::circle(8)});
  const BaseForm w = wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1));
  const Expr one = Expr(1.0) + 0.0 * Expr::var(0);
  EXPECT_THROW(symplectic_pieces(BaseForm::zero(m, 1), 1.0, w, 1), ConstraintViolation);  // B- is empty
  SweepOptions o;
  const auto r = positivity_sweep(w, *m, o);
  EXPECT_TRUE(r.passed);
  (void)one;
}

TEST(SymplecticPieces, LargestPassingEps) {
  Lutz L;
  EXPECT_EQ(largest_passing_eps(L.beta, L.u, L.omega, 1), 0.2);
}

TEST(WeakFilling, DimensionOneIsVacuous) {
  Lutz L;
  const auto sd = make_slice(L.beta, L.u, {1});
  const auto w1 = weak_filling_w1(sd, L.omega, 1);
  EXPECT_TRUE(w1.report.passed);
  EXPECT_EQ(w1.report.min_value, 1.0);
  EXPECT_TRUE(weak_filling_w2(sd, L.omega, 1).report.passed);
}

TEST(WeakFilling, ZeroOmegaFailsAtKZero) {
  // T^3 x [interval]: Gamma = {t = 0} x T^3 with the standard tight form.
  const auto m = make_manifold({ModelFactor::interval(-1, 1, 8), ModelFactor::circle(8), ModelFactor::circle(8),
                                ModelFactor::circle(8)});
  const Expr phi = kTwoPi * Expr::var(3);
  const BaseForm beta = cos(phi) * BaseForm::dx(m, 1) - sin(phi) * BaseForm::dx(m, 2);
  const auto sd = make_slice(beta, -Expr::var(0), {0});
  ASSERT_FALSE(sd.mesh.empty());
  EXPECT_TRUE(gamma_contact_check(beta, sd.mesh, 2).passed);
  const auto w1 = weak_filling_w1(sd, BaseForm::zero(m, 2), 2);
  EXPECT_FALSE(w1.report.passed);
  EXPECT_EQ(w1.worst_k, 0);
}

TEST(WeakFilling, NegativeMultipleOfDBetaFailsW2) {
  const auto m = make_manifold({ModelFactor::interval(-1, 1, 8), ModelFactor::circle(8), ModelFactor::circle(8),
                                ModelFactor::circle(8)});
  const Expr phi = kTwoPi * Expr::var(3);
  const BaseForm beta = cos(phi) * BaseForm::dx(m, 1) - sin(phi) * BaseForm::dx(m, 2);
  const auto sd = make_slice(beta, -Expr::var(0), {0});
  const auto w2 = weak_filling_w2(sd, -1.0 * ext_d(beta), 2, {1.0});
  EXPECT_FALSE(w2.report.passed);
  EXPECT_NEAR(w2.report.min_value, 0.0, 1e-12);
}

TEST(Slices, LutzFamily) {
  Lutz L;
  const auto res = slice_contact_family(L.beta, L.u, {1}, {-0.2, 0.0, 0.2}, 1);
  ASSERT_EQ(res.size(), 3u);
  for (const auto& r : res) EXPECT_TRUE(r.passed()) << r.error;
  const auto bad = slice_contact_family(L.beta, L.u, {1}, {1.5}, 1);
  EXPECT_FALSE(bad[0].passed());
  EXPECT_FALSE(bad[0].error.empty());
}
