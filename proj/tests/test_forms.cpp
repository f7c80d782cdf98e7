#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cbundle/forms.hpp"

using namespace cbundle;

namespace {

const double kPi = std::numbers::pi;
const double kTwoPi = 2.0 * kPi;

ManifoldPtr torus2(int res = 12) { return make_manifold({ModelFactor::circle(res), ModelFactor::circle(res)}); }
ManifoldPtr sphere2(int res = 16) { return make_manifold({ModelFactor::sphere2(res)}); }

BaseForm sphere_area(const ManifoldPtr& m) {
  const Expr x = Expr::var(0), y = Expr::var(1), z = Expr::var(2);
  return BaseForm::monomial(m, x, {1, 2}) + BaseForm::monomial(m, y, {2, 0}) + BaseForm::monomial(m, z, {0, 1});
}

}  // namespace

TEST(Frames, FlatTorusFrameIsCoordinateFrame) {
  const auto m = torus2();
  const Frame fr = m->frame_at(std::vector<double>{0.25, 0.5});
  ASSERT_EQ(fr.vectors.size(), 2u);
  EXPECT_EQ(fr.vectors[0], (Vec{1.0, 0.0}));
  EXPECT_EQ(fr.vectors[1], (Vec{0.0, 1.0}));
  EXPECT_TRUE(fr.oriented);
}

TEST(Frames, SphereNorthPoleOutwardNormalFirst) {
  const auto m = sphere2();
  const Frame fr = m->frame_at(std::vector<double>{0.0, 0.0, 1.0});
  ASSERT_EQ(fr.vectors.size(), 2u);
  EXPECT_NEAR(fr.vectors[0][2], 0.0, 1e-15);
  EXPECT_NEAR(fr.vectors[1][2], 0.0, 1e-15);
  EXPECT_NEAR(dot(fr.vectors[0], fr.vectors[1]), 0.0, 1e-15);
  std::vector<double> mat{0, 0, 1, fr.vectors[0][0], fr.vectors[0][1], fr.vectors[0][2],
                          fr.vectors[1][0], fr.vectors[1][1], fr.vectors[1][2]};
  EXPECT_GT(det(mat, 3), 0.5);
}

TEST(Frames, SphereTimesCircleProductOrientation) {
  const auto m = make_manifold({ModelFactor::sphere2(8), ModelFactor::circle(8)});
  const double s = 1.0 / std::sqrt(3.0);
  const Frame fr = m->frame_at(std::vector<double>{s, s, s, 0.3});
  ASSERT_EQ(fr.vectors.size(), 3u);
  // Positive frame of S^2 x S^1: det[n, e1, e2] > 0 in R^3 and e3 = d/dtheta.
  const Vec n{s, s, s, 0.0};
  std::vector<double> mat;
  for (const auto& v : {n, fr.vectors[0], fr.vectors[1], fr.vectors[2]}) mat.insert(mat.end(), v.begin(), v.end());
  EXPECT_GT(det(mat, 4), 0.5);
  for (const auto& v : fr.vectors) EXPECT_LT(std::abs(dot(v, n)), 1e-10);
}

TEST(Frames, OffSpherePointRejected) {
  const auto m = sphere2();
  EXPECT_THROW(m->frame_at(std::vector<double>{0.0, 0.0, 1.1}), ConstraintViolation);
  EXPECT_THROW(m->frame_at(std::vector<double>{0.0, 1.0}), ConstraintViolation);
}

TEST(Frames, SphereThreeQuaternionFrameOrthonormalAndPositive) {
  const auto m = make_manifold({ModelFactor::sphere3(4)});
  Sample s;
  for (std::size_t i = 0; i < m->sample_count(); i += 7) {
    m->sample(i, s);
    const Frame fr = m->frame_at(s.point);
    std::vector<double> mat(s.point.begin(), s.point.end());
    for (const auto& v : fr.vectors) {
      mat.insert(mat.end(), v.begin(), v.end());
      EXPECT_LT(std::abs(dot(v, s.point)), 1e-12);
    }
    EXPECT_NEAR(det(mat, 4), 1.0, 1e-12);
  }
}

TEST(Wedge, CoordinateAreaForm) {
  const auto m = torus2();
  const BaseForm w = wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1));
  const Frame fr = m->frame_at(std::vector<double>{0.1, 0.2});
  EXPECT_DOUBLE_EQ(w.eval(fr), 1.0);
  const BaseForm w2 = wedge(BaseForm::dx(m, 1), BaseForm::dx(m, 0));
  EXPECT_DOUBLE_EQ(w2.eval(fr), -1.0);
}

TEST(Wedge, OneFormSquaredVanishes) {
  const auto m = torus2();
  const Expr a = Expr::var(0), b = Expr::var(1);
  const BaseForm f = sin(kTwoPi * a) * BaseForm::dx(m, 0) + cos(kTwoPi * b) * BaseForm::dx(m, 1);
  EXPECT_EQ(max_abs_coeff(wedge(f, f), *m), 0.0);
}

TEST(Wedge, DegreeOverflowGivesZeroForm) {
  const auto m = torus2();
  const BaseForm w = wedge(BaseForm::dx(m, 0), wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)));
  EXPECT_TRUE(w.is_zero());
}

TEST(ExtD, SineDerivativeMatchesAnalytic) {
  const auto m = torus2(40);
  const Expr t1 = Expr::var(0);
  const BaseForm exact = d(m, sin(kTwoPi * t1));
  const BaseForm fd = d(m, finite_difference(sin(kTwoPi * t1), 1e-5));
  const BaseForm oracle = (kTwoPi * cos(kTwoPi * t1)) * BaseForm::dx(m, 0);
  EXPECT_LE(max_abs_coeff(exact - oracle, *m), 1e-12);
  EXPECT_LE(max_abs_coeff(fd - oracle, *m), 1e-6);
}

TEST(ExtD, ConstantCoefficientResult) {
  const auto m = sphere2();
  const BaseForm a = Expr::var(0) * BaseForm::dx(m, 1);
  const BaseForm da = ext_d(a);
  ASSERT_EQ(da.coeffs().size(), 1u);
  EXPECT_TRUE(da.coeff({0, 1}).is_const(1.0));
}

TEST(ExtD, SquareVanishes) {
  const auto m = torus2();
  const Expr a = Expr::var(0), b = Expr::var(1);
  const Expr f = sin(kTwoPi * a) * cos(kTwoPi * b) + sin(kTwoPi * (a + b));
  EXPECT_LE(max_abs_coeff(ext_d(d(m, f)), *m), 1e-6);
  EXPECT_EQ(max_abs_coeff(ext_d(d(m, finite_difference(f))), *m), 0.0);
}

TEST(Eval, SphereAreaFormOnOutwardFrame) {
  const auto m = sphere2();
  const BaseForm area = sphere_area(m);
  EXPECT_DOUBLE_EQ(area.eval(std::vector<double>{0, 0, 1}, {Vec{1, 0, 0}, Vec{0, 1, 0}}), 1.0);
  const auto r = positivity_sweep(area, *m);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.min_value, 1.0, 1e-12);
}

TEST(Eval, ZeroFormAndSwap) {
  const auto m = sphere2();
  const BaseForm z = BaseForm::zero(m, 2);
  const Frame fr = m->frame_at(std::vector<double>{0, 1, 0});
  EXPECT_EQ(z.eval(fr), 0.0);
  const BaseForm area = sphere_area(m);
  EXPECT_DOUBLE_EQ(area.eval(fr.point, {fr.vectors[1], fr.vectors[0]}), -area.eval(fr));
}

TEST(Eval, ArityMismatchThrows) {
  const auto m = torus2();
  EXPECT_THROW(BaseForm::dx(m, 0).eval(std::vector<double>{0, 0}, {}), ConstraintViolation);
}

TEST(Sweep, ConstantAreaFormPasses) {
  const auto m = torus2();
  const auto r = positivity_sweep(kTwoPi * wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)), *m);
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.min_value, kTwoPi);
}

TEST(Sweep, SignChangeFails) {
  const auto m = torus2();
  const auto r = positivity_sweep(sin(kTwoPi * Expr::var(0)) * wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)), *m);
  EXPECT_FALSE(r.passed);
  EXPECT_LT(r.min_value, 0.0);
}

TEST(Sweep, ResultIndependentOfJobCount) {
  const auto m = torus2(20);
  const Expr a = Expr::var(0), b = Expr::var(1);
  const BaseForm w = (2.0 + sin(kTwoPi * a) * cos(kTwoPi * b)) * wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1));
  SweepOptions o1, o4;
  o1.jobs = 1;
  o4.jobs = 4;
  const auto r1 = positivity_sweep(w, *m, o1), r4 = positivity_sweep(w, *m, o4);
  EXPECT_EQ(r1.min_value, r4.min_value);
  EXPECT_EQ(r1.argmin_index, r4.argmin_index);
}

TEST(Sweep, NonFiniteValueIsDomainError) {
  const auto m = torus2();
  const BaseForm w = log(Expr::var(0) - 0.5) * wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1));
  EXPECT_THROW(positivity_sweep(w, *m), DomainError);
}

TEST(Sweep, OrientationReversalFlipsSign) {
  const auto m = sphere2(8);
  SweepOptions o;
  o.orientation = -1;
  const auto r = positivity_sweep(sphere_area(m), *m, o);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.min_value, -1.0, 1e-12);
}

TEST(Cycles, FundamentalTorus) {
  const auto m = torus2();
  Cycle2 c{"T2", [](double s, double t) { return Vec{s, t}; }};
  const auto r = integrate_cycle(wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)), c, 32);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
  EXPECT_FALSE(r.degenerate);
}

TEST(Cycles, SphereAreaConverges) {
  const auto m = sphere2();
  Cycle2 c{"S2", [](double s, double t) {
             const double th = kPi * s, ph = kTwoPi * t;
             return Vec{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
           }};
  c.periodic_s = false;
  const double v1 = integrate_cycle(sphere_area(m), c, 200).value;
  const double v2 = integrate_cycle(sphere_area(m), c, 400).value;
  EXPECT_NEAR(v2, 4 * kPi, 4 * kPi * 1e-3);
  EXPECT_LT(std::abs(v2 - v1) / std::abs(v2), 1e-3);
}

TEST(Cycles, ExactFormIntegratesToZero) {
  const auto m = torus2();
  const Expr a = Expr::var(0), b = Expr::var(1);
  const BaseForm gamma = sin(kTwoPi * a) * cos(kTwoPi * b) * BaseForm::dx(m, 1) + cos(kTwoPi * b) * BaseForm::dx(m, 0);
  Cycle2 c{"T2", [](double s, double t) { return Vec{s, t}; }};
  EXPECT_NEAR(integrate_cycle(ext_d(gamma), c, 64).value, 0.0, 1e-10);
}

TEST(Cycles, DegenerateCycleWarns) {
  const auto m = torus2();
  Cycle2 c{"point", [](double, double) { return Vec{0.5, 0.5}; }};
  const auto r = integrate_cycle(wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)), c, 8);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Properties, GradedCommutativityIsExact) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto m = make_manifold({ModelFactor::circle(4), ModelFactor::circle(4), ModelFactor::sphere2(4)});
  const auto random_form = [&](int deg) {
    BaseForm f(m, deg);
    for (Mask mask = 0; mask < (1u << 5); ++mask) {
      if (std::popcount(mask) != deg) continue;
      const Expr e = coef(rng) + coef(rng) * sin(kTwoPi * Expr::var(0) + coef(rng)) * Expr::var(3) +
                     coef(rng) * cos(kTwoPi * Expr::var(1)) * Expr::var(2) * Expr::var(4);
      f.set(mask, e);
    }
    return f;
  };
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 4 - p; ++q) {
      const BaseForm a = random_form(p), b = random_form(q);
      const BaseForm ab = wedge(a, b), ba = wedge(b, a);
      const double sign = ((p * q) % 2) ? -1.0 : 1.0;
      Sample s;
      for (std::size_t i = 0; i < m->sample_count(); i += 5) {
        m->sample(i, s);
        for (const auto& [mask, e] : ab.coeffs()) EXPECT_EQ(e(s.point), sign * ba.coeff(mask)(s.point));
      }
    }
}
