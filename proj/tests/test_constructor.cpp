#include <gtest/gtest.h>

#include <cmath>

#include "cbundle/constructor.hpp"
#include "cbundle/models.hpp"

using namespace cbundle;
using models::kTwoPi;

namespace {

BundlePtr torus4_bundle(double sign) {
  auto m = make_manifold({ModelFactor::circle(8), ModelFactor::circle(8), ModelFactor::circle(8),
                          ModelFactor::circle(8)});
  const BaseForm w = wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 1)) +
                     Expr(sign) * wedge(BaseForm::dx(m, 2), BaseForm::dx(m, 3));
  return make_bundle(m, w);
}

double coeff_at(const BaseForm& f, Mask mask, std::initializer_list<double> p) { return f.coeff(mask)(p); }

}  // namespace

// ---------------------------------------------------------------------------

TEST(BoothbyWang, Hopf) {
  const auto h = models::hopf();
  const InvariantForm a = boothby_wang(h.bundle);
  EXPECT_TRUE(a.a.is_zero());
  EXPECT_TRUE(contact_check(a).passed());
  EXPECT_NEAR(std::abs(a.b.coeff(0).const_value()), 1.0, 0.0);
}

TEST(BoothbyWang, ZeroCurvatureFails) {
  const auto L = models::lutz_t3(8);
  EXPECT_THROW(boothby_wang(L.bundle), CheckFailure);
}

TEST(BoothbyWang, NegativeCaseUsesMinusPsi) {
  const InvariantForm plus = boothby_wang(torus4_bundle(1.0));
  EXPECT_EQ(plus.b.coeff(0).const_value(), 1.0);
  const InvariantForm minus = boothby_wang(torus4_bundle(-1.0));
  EXPECT_EQ(minus.b.coeff(0).const_value(), -1.0);
  EXPECT_TRUE(contact_check(minus).passed());
}

// ---------------------------------------------------------------------------

TEST(CollarNormalize, AnnulusModelPasses) {
  const auto c = models::collar_t2_annulus();
  const auto res = collar_normalize(c.data, CollarProfile{});
  EXPECT_TRUE(res.sweep.passed);
  EXPECT_GT(res.sweep.min_value, 0.0);
  EXPECT_LE(res.primitive_residual, 1e-12);
  EXPECT_LE(res.normal_form_residual, 1e-12);
  EXPECT_EQ(res.slice_w2.size(), 9u);
}

TEST(CollarNormalize, AgreesWithInputNearInnerEnd) {
  // c = 1 and b = 0 on [0, eps/4]: the output is omega_plus there.
  const auto c = models::collar_t2_annulus();
  const auto res = collar_normalize(c.data, CollarProfile{});
  const auto& m = *c.data.manifold;
  for (double t : {0.005, 0.015, 0.024})
    for (double phi : {0.1, 0.35, 0.8}) {
      const Frame fr = m.frame_at(Vec{t, 0.3, 0.6, phi});
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
          const std::vector<Vec> vs{fr.vectors[i], fr.vectors[j]};
          EXPECT_NEAR(res.omega.eval(fr.point, vs), c.data.omega_plus.eval(fr.point, vs), 1e-12);
        }
    }
}

TEST(CollarNormalize, NormalFormIsFixed) {
  auto c = models::collar_t2_annulus();
  const CollarProfile cp;
  c.data.gamma = cp.b(c.data.t) * c.data.beta;
  c.data.omega_plus = c.data.omega_gamma + ext_d(c.data.gamma);
  const auto res = collar_normalize(c.data, cp);
  const double r = max_abs_on_tangent(res.omega - c.data.omega_plus, *c.data.manifold,
                                      c.data.t - Expr(cp.params().c_end), 0.0);
  EXPECT_LE(r, 1e-8);
}

TEST(CollarNormalize, ZeroSlopeIsTuningFailure) {
  const auto c = models::collar_t2_annulus();
  CollarParams p;
  p.slope = 0.0;
  EXPECT_THROW(collar_normalize(c.data, CollarProfile(p)), TuningFailure);
}

TEST(CollarNormalize, WrongPrimitiveRejected) {
  auto c = models::collar_t2_annulus();
  c.data.gamma = c.r * c.data.beta;
  EXPECT_THROW(collar_normalize(c.data, CollarProfile{}), ConstraintViolation);
}

TEST(CollarNormalize, NormalisedCollarPassesW1) {
  const auto c = models::collar_t2_annulus();
  const auto res = collar_normalize(c.data, CollarProfile{});
  for (double ts : {0.5, 0.95}) {
    const auto sd = make_slice(c.data.beta, Expr(ts) - c.data.t, c.data.axis);
    const auto w1 = weak_filling_w1(sd, res.omega, 2);
    EXPECT_TRUE(w1.report.passed) << ts << ": " << describe(w1.report);
  }
}

// ---------------------------------------------------------------------------

TEST(ConnectionAlign, ExactForm) {
  const auto c = models::collar_t2_annulus(8);
  const auto& m = c.data.manifold;
  const Expr t = Expr::var(0), th1 = Expr::var(1);
  const Expr h = 0.2 * t * sin(kTwoPi * th1) + t * t;
  const BaseForm gamma = d(m, h);
  const auto r = connection_align(gamma, 0, 0.0, Expr(0.0));
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_LE(max_abs_coeff(r.gamma_slice, *m), 1e-14);
  for (std::initializer_list<double> p : {std::initializer_list<double>{0.3, 0.2, 0.1, 0.7}, {0.9, 0.65, 0.4, 0.1}})
    EXPECT_NEAR(r.h(p), h(p), 1e-10);
}

TEST(ConnectionAlign, SliceForm) {
  const auto c = models::collar_t2_annulus(8);
  const auto& m = c.data.manifold;
  const BaseForm gamma = 0.3 * BaseForm::dx(m, 1) + 0.1 * BaseForm::dx(m, 3);
  const auto r = connection_align(gamma, 0, 0.0, Expr(0.0));
  EXPECT_TRUE(r.h.is_const(0.0));
  EXPECT_LE(max_abs_coeff(r.gamma_slice - gamma, *m), 0.0);
  EXPECT_LE(r.residual, 1e-14);
}

TEST(ConnectionAlign, CollarData) {
  const auto c = models::collar_t2_annulus(8);
  const auto& m = c.data.manifold;
  const Expr t = Expr::var(0), th1 = Expr::var(1);
  const BaseForm gamma = kTwoPi * BaseForm::dx(m, 3) + d(m, 0.2 * t * sin(kTwoPi * th1));
  const Expr chi = compose(smoothstep(0.2, 0.8), t);
  const auto r = connection_align(gamma, 0, 0.0, chi);
  EXPECT_LE(r.residual, 1e-5);
  EXPECT_LE(max_abs_coeff(r.gamma_slice - kTwoPi * BaseForm::dx(m, 3), *m), 1e-14);
  // chi = 1 near t = 1: the adjusted offset is the slice representative there.
  EXPECT_LE(max_abs_on_tangent(r.adjusted - r.gamma_slice, *m, t - 0.8, 0.0), 1e-8);
  // chi = 0 near t = 0: unchanged.
  EXPECT_LE(max_abs_on_tangent(r.adjusted - gamma, *m, 0.2 - t, 0.0), 1e-12);
}

TEST(ConnectionAlign, NonClosedRejected) {
  const auto c = models::collar_t2_annulus(8);
  const auto& m = c.data.manifold;
  const BaseForm gamma = Expr::var(0) * BaseForm::dx(m, 1);
  EXPECT_THROW(connection_align(gamma, 0, 0.0, Expr(0.0)), CheckFailure);
}

// ---------------------------------------------------------------------------

TEST(Neck, ConstantGamma) {
  const auto p = models::product_neck();
  const auto zero = BaseForm::zero(p.m, 1);
  const auto res = assemble_neck(models::product_neck_assembly(p, zero, zero));
  EXPECT_TRUE(res.contact.passed());
  EXPECT_GT(res.contact.sweep.min_value, 1e-9);
  EXPECT_EQ(res.escalations, 0);
  EXPECT_LE(res.oracle_residual, 1e-4);
}

TEST(Neck, ConstantGammaOracleIsReducedFormula) {
  // With gamma_t constant and omega_ref = 0 the expansion is
  // n (f'g - fg') dt ^ beta ^ (f d beta)^{n-1}.
  const auto p = models::product_neck();
  const auto zero = BaseForm::zero(p.m, 1);
  const auto na = models::product_neck_assembly(p, zero, zero);
  const ProfilePair pp = make_profiles();
  const Expr f = pp.f(p.t), g = pp.g(p.t);
  const Expr w = f.diff(0) * g - f * g.diff(0);
  const BaseForm reduced = Expr(2.0) * wedge(d(p.m, p.t), w * p.beta, f * ext_d(p.beta));
  const BaseForm oracle = neck_oracle(na, pp);
  const auto& m = *p.m;
  for (std::size_t i = 0; i < m.sample_count(); i += 97) {
    const auto s = m.sample(i);
    const Frame fr = m.frame_at(s.point);
    const double a = reduced.eval(fr), b = oracle.eval(fr);
    EXPECT_NEAR(a, b, 1e-6 * (1.0 + std::abs(a)));
  }
}

TEST(Neck, LinearGaugePath) {
  const auto p = models::product_neck();
  const BaseForm gp = 0.5 * BaseForm::dx(p.m, 1) + 0.3 * BaseForm::dx(p.m, 3);
  const auto res = assemble_neck(models::product_neck_assembly(p, gp, BaseForm::zero(p.m, 1)));
  EXPECT_TRUE(res.contact.passed());
  EXPECT_LE(res.oracle_residual, 1e-4);
  EXPECT_LE(res.frozen_residual, 1e-12);
}

TEST(Neck, PlateauEscalation) {
  const auto p = models::product_neck();
  auto na = models::product_neck_assembly(p, 40.0 * BaseForm::dx(p.m, 1), BaseForm::zero(p.m, 1));
  na.profile.plateau_height = 2.0;
  const auto res = assemble_neck(na);
  EXPECT_GT(res.escalations, 0);
  EXPECT_GT(res.profile.plateau_height, 2.0);
  EXPECT_TRUE(res.contact.passed());
  EXPECT_LE(res.oracle_residual, 1e-4);
}

TEST(Neck, InvalidProfilesRejected) {
  const auto p = models::product_neck();
  const auto zero = BaseForm::zero(p.m, 1);
  auto na = models::product_neck_assembly(p, zero, zero);
  na.profile.plateau_height = -1.0;
  EXPECT_THROW(assemble_neck(na), ValidationError);
}

// ---------------------------------------------------------------------------

namespace {

struct ProductGlue {
  models::ProductNeck p = models::product_neck(1.6, 16, 8);
  BaseForm gp = 0.5 * BaseForm::dx(p.m, 1);
  NeckResult neck = assemble_neck(models::product_neck_assembly(p, gp, BaseForm::zero(p.m, 1)));
  InvariantForm plus = InvariantForm(exp(p.t + 1.0) * p.beta + gp, BaseForm::scalar(p.m, 1.0), p.bundle);
  InvariantForm minus = InvariantForm(exp(1.0 - p.t) * p.beta, BaseForm::scalar(p.m, -1.0), p.bundle);
  GlueSpec spec() const {
    GlueSpec g;
    g.plus_sel = -1.0 - p.t;
    g.minus_sel = p.t - 1.0;
    g.plus_overlap = -0.9 - p.t;
    g.minus_overlap = p.t - 0.9;
    return g;
  }
};

}  // namespace

TEST(Glue, ProductPipeline) {
  ProductGlue G;
  const auto res = assemble_global(G.plus, G.neck.alpha, G.minus, G.spec());
  EXPECT_LE(res.seam_residual, 1e-10);
  const auto cr = contact_check(res.alpha);
  EXPECT_TRUE(cr.passed()) << describe(cr.sweep);
  const auto ds = dividing_set(res.alpha.b.coeff(0), G.p.m, {0});
  ASSERT_FALSE(ds.empty());
  for (const auto& z : ds.zeros) EXPECT_LE(std::abs(z.point[0]), 1e-9);
}

TEST(Glue, NoNeckReturnsPlus) {
  ProductGlue G;
  const auto res = assemble_global(G.plus, std::nullopt, G.minus, G.spec());
  EXPECT_TRUE(res.alpha.a.coeff(2).same(G.plus.a.coeff(2)));
  EXPECT_TRUE(res.alpha.b.coeff(0).same(G.plus.b.coeff(0)));
}

TEST(Glue, MismatchedGammaRejected) {
  ProductGlue G;
  const InvariantForm bad(G.plus.a + 0.1 * BaseForm::dx(G.p.m, 2), G.plus.b, G.p.bundle);
  EXPECT_THROW(assemble_global(bad, G.neck.alpha, G.minus, G.spec()), CheckFailure);
}

// ---------------------------------------------------------------------------

namespace {

struct TuneData {
  models::Collar c = models::collar_t2_annulus(8);
  ContactSliceData slice = make_slice(c.data.beta, Expr(0.5) - c.data.t, c.data.axis);
  BaseForm sigma(double A) const {
    const auto& m = c.data.manifold;
    return Expr(A) * (wedge(BaseForm::dx(m, 0), BaseForm::dx(m, 3)) - wedge(BaseForm::dx(m, 1), BaseForm::dx(m, 2)));
  }
};

}  // namespace

TEST(ScaleTune, ZeroSigma) {
  TuneData T;
  const auto r = scale_tune(BaseForm::zero(T.c.data.manifold, 2), T.c.lambda, T.slice, 2);
  EXPECT_EQ(r.K, 1.0);
  EXPECT_EQ(r.sweeps.size(), 1u);
}

TEST(ScaleTune, MonotoneInSigma) {
  TuneData T;
  const auto r1 = scale_tune(T.sigma(3.0), T.c.lambda, T.slice, 2);
  const auto r10 = scale_tune(T.sigma(30.0), T.c.lambda, T.slice, 2);
  EXPECT_GT(r1.K, 1.0);
  EXPECT_GE(r10.K, r1.K);
  EXPECT_LE(r10.K, 1024.0);
  // Deterministic.
  EXPECT_EQ(scale_tune(T.sigma(30.0), T.c.lambda, T.slice, 2).K, r10.K);
}

// ---------------------------------------------------------------------------

TEST(Contactise, T2D2) {
  const auto d = models::t2d2();
  ContactiseOptions o;
  o.axis = d.axis;
  o.domain = d.domain;
  const auto res = contactise(d.u, d.ulambda, d.bundle, o);
  ASSERT_TRUE(res.boundary.has_value());
  EXPECT_TRUE(res.boundary->passed);
  EXPECT_TRUE(res.interior.passed);
  EXPECT_TRUE(res.contact.passed());
  EXPECT_GT(res.contact.sweep.min_value, 1e-9);
  // Boundary form: x d theta1 - y d theta2 at r = 1.
  EXPECT_NEAR(coeff_at(res.alpha.a, 1u, {0.1, 0.2, 1.0, 0.125}), std::cos(kTwoPi * 0.125), 1e-15);
}

TEST(Contactise, GeneralCurvature) {
  const auto d = models::t2d2(-kTwoPi);
  EXPECT_NEAR(euler_pairing(*d.bundle, "T2").value, 1.0, 1e-3);
  ContactiseOptions o;
  o.axis = d.axis;
  o.domain = d.domain;
  EXPECT_TRUE(contactise(d.u, d.ulambda, d.bundle, o).contact.passed());
}

TEST(Contactise, ClosedCaseMatchesBoothbyWang) {
  const auto d0 = models::t2d2();
  const BaseForm w = kTwoPi * wedge(BaseForm::dx(d0.m, 0), BaseForm::dx(d0.m, 1)) +
                     wedge(d(d0.m, d0.x), d(d0.m, d0.y));
  const auto bundle = make_bundle(d0.m, w);
  const auto res = contactise(Expr(1.0), BaseForm::zero(d0.m, 1), bundle);
  const auto bw = boothby_wang(bundle);
  EXPECT_TRUE(res.alpha.a.is_zero());
  EXPECT_TRUE(bw.a.is_zero());
  EXPECT_TRUE(res.alpha.b.coeff(0).is_const(1.0));
  EXPECT_TRUE(bw.b.coeff(0).is_const(1.0));
}

TEST(Contactise, NegativeURejected) {
  const auto d = models::t2d2();
  EXPECT_THROW(contactise(d.u, d.ulambda, d.bundle), ConstraintViolation);
}

// ---------------------------------------------------------------------------

TEST(Interpolation, GaugePathOnLutz) {
  const auto L = models::lutz_t3();
  const BaseForm gamma = 0.1 * BaseForm::dx(L.m, 0);
  const InvariantForm moved = change_gauge(L.alpha, gamma);
  InterpolationOptions o;
  o.axis = L.axis;
  const auto reps = interpolation_check(L.beta, moved.a, L.u, L.bundle, o);
  ASSERT_EQ(reps.size(), 11u);
  for (const auto& r : reps) EXPECT_TRUE(r.passed()) << describe(r.sweep);
}

TEST(Interpolation, IdenticalForms) {
  const auto L = models::lutz_t3(12);
  const auto reps = interpolation_check(L.beta, L.beta, L.u, L.bundle);
  for (const auto& r : reps) EXPECT_TRUE(r.passed());
}

TEST(Interpolation, DoubledFormRejected) {
  const auto L = models::lutz_t3(12);
  EXPECT_THROW(interpolation_check(L.beta, 2.0 * L.beta, L.u, L.bundle), ConstraintViolation);
}
