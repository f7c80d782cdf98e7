#include <gtest/gtest.h>

#include <cmath>

#include "cbundle/profiles.hpp"

using namespace cbundle;

TEST(Profiles, DefaultFamilyValidates) {
  ProfileValidation v;
  const ProfilePair pp = make_profiles({}, &v);
  EXPECT_EQ(v.grid, 10000u);
  EXPECT_EQ(v.sign_changes, 1);
  EXPECT_GT(v.f_min, 1.0);
  EXPECT_GT(v.w_min, 1.0);
  EXPECT_DOUBLE_EQ(pp.params().plateau_height, 50.0);
}

TEST(Profiles, LeftEndValues) {
  const ProfilePair pp = make_profiles();
  EXPECT_EQ(pp.f(-1.0), 1.0);
  EXPECT_EQ(pp.g(-1.0), 1.0);
  for (double t : {-1.05, -0.97, -0.93}) EXPECT_NEAR(pp.f(t), std::exp(t + 1.0), 1e-12);
}

TEST(Profiles, Symmetry) {
  const ProfilePair pp = make_profiles();
  EXPECT_EQ(pp.g(0.0), 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double t = -1.1 + 2.2 * i / 100.0;
    EXPECT_NEAR(pp.g(-t), -pp.g(t), 1e-12) << t;
    EXPECT_NEAR(pp.f(-t), pp.f(t), 1e-12 * pp.f(t)) << t;
  }
}

TEST(Profiles, SymbolicAndDoubleAgree) {
  const ProfilePair pp = make_profiles();
  const Expr t = Expr::var(0);
  const Expr f = pp.f(t), g = pp.g(t);
  const Expr df = f.diff(0), dg = g.diff(0);
  for (double x : {-1.05, -0.8, -0.3, 0.0, 0.2, 0.6, 0.95}) {
    EXPECT_NEAR(f({x}), pp.f(x), 1e-12 * pp.f(x));
    EXPECT_NEAR(df({x}), pp.df(x), 1e-10 * (1.0 + std::abs(pp.df(x))));
    EXPECT_NEAR(dg({x}), pp.dg(x), 1e-12);
  }
}

TEST(Profiles, DerivativeMatchesFiniteDifference) {
  const ProfilePair pp = make_profiles();
  const double h = 1e-6;
  for (double x : {-0.85, -0.4, 0.1, 0.45, 0.8}) {
    EXPECT_NEAR(pp.df(x), (pp.f(x + h) - pp.f(x - h)) / (2 * h), 1e-5 * (1.0 + std::abs(pp.df(x))));
    EXPECT_NEAR(pp.dg(x), (pp.g(x + h) - pp.g(x - h)) / (2 * h), 1e-6);
  }
}

TEST(Profiles, NegativePlateauBreaksWronskian) {
  ProfileParams p;
  p.plateau_height = -1.0;
  try {
    make_profiles(p);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("f'g - fg'"), std::string::npos) << e.what();
  }
}

TEST(Profiles, InvalidParamsRejected) {
  ProfileParams p;
  p.g_width = 0.8;  // g would vary outside the plateau
  EXPECT_THROW(ProfilePair{p}, ConstraintViolation);
  p = {};
  p.bump_start = 1.0;
  EXPECT_THROW(ProfilePair{p}, ConstraintViolation);
}

TEST(Collar, DefaultValidates) {
  const CollarProfile cp;
  EXPECT_NO_THROW(validate_collar(cp));
  EXPECT_EQ(cp.b(0.02), 0.0);
  EXPECT_EQ(cp.c(0.05), 1.0);
  EXPECT_EQ(cp.c(0.95), 0.0);
  EXPECT_NEAR(cp.db(0.5), 8.0, 1e-12);
}

TEST(Collar, ZeroSlopeRejected) {
  CollarParams p;
  p.slope = 0.0;
  EXPECT_THROW(validate_collar(CollarProfile(p)), ValidationError);
}
