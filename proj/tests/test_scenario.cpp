#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "cbundle/gallery.hpp"
#include "cbundle/scenario.hpp"

using namespace cbundle;

namespace {

std::string scenario_file(const std::string& name) { return std::string(CBUNDLE_SCENARIO_DIR) + "/" + name + ".json"; }

ordered_json minimal() {
  return ordered_json::parse(R"json({
    "schema": 1,
    "name": "t",
    "recipe": "verify-contact",
    "manifold": {"factors": [{"kind": "circle", "resolution": 8}, {"kind": "circle", "resolution": 8}]},
    "form": {"beta": [{"coeff": "cos(2*pi*x1)", "indices": [0]}], "u": "sin(2*pi*x1)"}
  })json");
}

std::string error_pointer(const ordered_json& j) {
  try {
    parse_scenario(j);
  } catch (const ScenarioError& e) {
    return e.pointer();
  }
  return "<no error>";
}

std::string without_wall_time(const Report& r) {
  auto j = r.to_json();
  j["provenance"].erase("wall_time_s");
  return j.dump();
}

}  // namespace

TEST(Scenario, ShippedT2S2K1) {
  const Scenario s = load_scenario(scenario_file("t2s2-k1"));
  EXPECT_EQ(s.recipe, "construct");
  EXPECT_EQ(s.parameters["k"].get<int>(), 1);
  EXPECT_EQ(s.factors.size(), 3u);
}

TEST(Scenario, EveryShippedFileLoads) {
  for (const char* n : {"lutz-t3", "hopf", "t2s2-k0", "t2s2-k1", "t2s2-k2", "t2s2-k2-euler", "bourgeois-s3",
                        "contactise-t2d2", "t2s2-k1-broken-profile"})
    EXPECT_NO_THROW(load_scenario(scenario_file(n))) << n;
}

TEST(Scenario, MissingManifold) {
  auto j = minimal();
  j.erase("manifold");
  EXPECT_EQ(error_pointer(j), "/manifold");
}

TEST(Scenario, UnknownKeysRejected) {
  auto j = minimal();
  j["colour"] = "blue";
  EXPECT_EQ(error_pointer(j), "/colour");
  j = minimal();
  j["form"]["beta"][0]["weight"] = 1;
  EXPECT_EQ(error_pointer(j), "/form/beta/0/weight");
  j = minimal();
  j["parameters"] = {{"plateau_height", 3}};
  EXPECT_EQ(error_pointer(j), "/parameters/plateau_height");
  j = minimal();
  j["checks"] = {"lemma-volume", "teleport"};
  EXPECT_EQ(error_pointer(j), "/checks/1");
}

TEST(Scenario, OutOfRangeCoordinateDoesNotResolve) {
  auto j = minimal();
  j["manifold"]["factors"] = ordered_json::parse(R"([{"kind": "sphere2"}, {"kind": "sphere2"}])");
  j["form"]["beta"][0]["coeff"] = "x6";
  EXPECT_EQ(error_pointer(j), "/form/beta/0/coeff");
  j["form"]["beta"][0]["coeff"] = "1";
  j["bundle"] = ordered_json::parse(R"({"curvature": [{"coeff": "x9", "indices": [0, 1]}]})");
  try {
    parse_scenario(j);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.pointer(), "/bundle/curvature/0/coeff");
    EXPECT_NE(std::string(e.what()).find("does not resolve"), std::string::npos);
  }
  j["bundle"]["curvature"][0]["coeff"] = "1";
  j["bundle"]["curvature"][0]["indices"] = {0, 6};
  EXPECT_EQ(error_pointer(j), "/bundle/curvature/0/indices/1");
}

TEST(Scenario, ParseErrorsCarryFieldNames) {
  auto j = minimal();
  j["form"]["u"] = "2*+3";
  try {
    parse_scenario(j);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.pointer(), "/form/u");
    EXPECT_NE(std::string(e.what()).find("offset 2"), std::string::npos) << e.what();
  }
}

TEST(Scenario, SchemaTypes) {
  auto j = minimal();
  j["schema"] = 2;
  EXPECT_EQ(error_pointer(j), "/schema");
  j = minimal();
  j["recipe"] = "paint";
  EXPECT_EQ(error_pointer(j), "/recipe");
  j = minimal();
  j["manifold"]["factors"][1]["kind"] = "torus";
  EXPECT_EQ(error_pointer(j), "/manifold/factors/1/kind");
  j = minimal();
  j["parameters"] = {{"axis", 7}};
  EXPECT_EQ(error_pointer(j), "/parameters/axis");
  j = minimal();
  j["bundle"] = ordered_json::parse(R"({"cycles": [{"name": "T2", "map": ["s", "x0"]}]})");
  EXPECT_EQ(error_pointer(j), "/bundle/cycles/0/map/1");
  j = minimal();
  j["form"].erase("u");
  EXPECT_EQ(error_pointer(j), "/form");
}

TEST(Run, LutzIsContactWithMinTwoPi) {
  const Report r = run(load_scenario(scenario_file("lutz-t3")));
  EXPECT_TRUE(r.passed()) << r.summary();
  const auto* c = r.find("contact");
  ASSERT_NE(c, nullptr);
  EXPECT_NEAR(c->value, 2.0 * std::numbers::pi, 1e-9);
}

TEST(Run, EulerOnT2S2K2) {
  const Report r = run(load_scenario(scenario_file("t2s2-k2-euler")));
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_NEAR(r.values()["euler"]["S2"].get<double>(), 2.0, 1e-3);
  EXPECT_NEAR(r.values()["euler"]["T2"].get<double>(), 0.0, 1e-3);
}

TEST(Run, BrokenProfilesAreReported) {
  const Report r = run(load_scenario(scenario_file("t2s2-k1-broken-profile")));
  EXPECT_FALSE(r.passed());
  const auto* e = r.find("error");
  ASSERT_NE(e, nullptr);
  EXPECT_NE(e->message.find("f'g - fg'"), std::string::npos) << e->message;
}

TEST(Run, DomainErrorNamesTheField) {
  auto j = minimal();
  j["form"]["u"] = "log(x1 - 0.5)";
  const Report r = run(parse_scenario(j));
  EXPECT_FALSE(r.passed());
  const auto* e = r.find("error");
  ASSERT_NE(e, nullptr);
  EXPECT_NE(e->message.find("/form/u"), std::string::npos) << e->message;
}

TEST(Run, NonContactFormFails) {
  auto j = minimal();
  j["form"]["u"] = "0";
  const Report r = run(parse_scenario(j));
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.find("contact")->passed);
}

TEST(Run, FiniteDifferenceFieldsAgree) {
  auto j = minimal();
  j["form"]["derivatives"] = "finite-difference";
  const Report fd = run(parse_scenario(j));
  const Report sym = run(parse_scenario(minimal()));
  EXPECT_TRUE(fd.passed());
  EXPECT_NEAR(fd.find("contact")->value, sym.find("contact")->value, 1e-6);
}

TEST(Run, ReportsAreDeterministic) {
  const Scenario s = load_scenario(scenario_file("contactise-t2d2"));
  RunOptions one, four;
  one.jobs = 1;
  four.jobs = 4;
  const Report a = run(s, one), b = run(s, four), c = run(s, one);
  EXPECT_EQ(without_wall_time(a), without_wall_time(c));
  EXPECT_EQ(without_wall_time(a), without_wall_time(b));
}

TEST(Run, ToleranceOverride) {
  RunOptions ro;
  ro.tol = 10.0;  // above the Lutz minimum 2 pi
  EXPECT_FALSE(run(load_scenario(scenario_file("lutz-t3")), ro).passed());
}

TEST(Gallery, UnknownNameListsValidNames) {
  try {
    gallery("klein-bottle");
    FAIL();
  } catch (const ConstraintViolation& e) {
    EXPECT_NE(std::string(e.what()).find("bourgeois-s3"), std::string::npos);
  }
}

TEST(Gallery, T2S2K1PairingIsOne) {
  const Report r = gallery("t2s2-k1");
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_NEAR(r.values()["euler"]["S2"].get<double>(), 1.0, 1e-3);
}

TEST(Gallery, BourgeoisS3Passes) { EXPECT_TRUE(gallery("bourgeois-s3").passed()); }

TEST(Gallery, ContactiseT2D2Passes) { EXPECT_TRUE(gallery("contactise-t2d2").passed()); }

TEST(Gallery, ScenarioFileMatchesNativeRun) {
  // Same checks and minima from the expression-language scenario and the
  // natively registered gallery entry.
  const Report file = run(load_scenario(scenario_file("contactise-t2d2")));
  const Report native = gallery("contactise-t2d2");
  ASSERT_EQ(file.checks().size(), native.checks().size());
  for (std::size_t i = 0; i < file.checks().size(); ++i) {
    EXPECT_EQ(file.checks()[i].name, native.checks()[i].name);
    EXPECT_NEAR(file.checks()[i].value, native.checks()[i].value, 1e-9 * (1 + std::abs(native.checks()[i].value)));
  }
}
