#pragma once

// Check sequences shared by the gallery and the scenario runner.  Each recipe
// appends its entries to a Report; errors raised by the modules propagate and
// are turned into error entries by the caller.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbundle/bourgeois.hpp"
#include "cbundle/constructor.hpp"
#include "cbundle/invariant.hpp"
#include "cbundle/models.hpp"
#include "cbundle/profiles.hpp"
#include "cbundle/report.hpp"
#include "cbundle/splitting.hpp"

namespace cbundle {

struct RunOptions {
  double resolution_scale = 1.0;
  std::optional<double> tol;  // positivity tolerance override
  int jobs = 0;

  double sweep_tol() const { return tol.value_or(1e-9); }
  int scaled(int n) const { return std::max(2, static_cast<int>(std::lround(n * resolution_scale))); }
  SweepOptions sweep(std::string label = {}) const {
    SweepOptions o;
    o.tol = sweep_tol();
    o.jobs = jobs;
    o.label = std::move(label);
    return o;
  }
};

inline const char* factor_name(FactorKind k) {
  switch (k) {
    case FactorKind::Circle: return "circle";
    case FactorKind::Interval: return "interval";
    case FactorKind::Sphere2: return "sphere2";
    case FactorKind::Sphere3: return "sphere3";
  }
  return "?";
}

inline ordered_json factors_json(const ModelManifold& m) {
  ordered_json a = ordered_json::array();
  for (const auto& f : m.factors()) {
    ordered_json j;
    j["kind"] = factor_name(f.kind);
    if (f.kind == FactorKind::Interval) {
      j["lo"] = f.lo;
      j["hi"] = f.hi;
    }
    j["resolution"] = f.resolution;
    a.push_back(std::move(j));
  }
  return a;
}

namespace recipes {

struct LemmaCheck {
  double tolerance = 1e-5;
};

inline void verify_contact(Report& rep, const InvariantForm& alpha, const RunOptions& ro,
                           std::optional<LemmaCheck> lemma = LemmaCheck{}) {
  rep.resolutions()["base"] = factors_json(*alpha.bundle->base);
  const ContactReport cr = contact_check(alpha, ro.sweep("contact"));
  rep.add_positivity("contact", cr.sweep);
  if (lemma) rep.add_residual("lemma volume identity", identity_check_lemma_volume(alpha, ro.jobs), lemma->tolerance);
}

/// Pairings against every generator; expected values checked when given,
/// integrality otherwise.
inline void euler(Report& rep, const BundleSpec& bundle, const std::map<std::string, double>& expected,
                  double tolerance = 1e-3, bool magnitude = false) {
  validate_bundle(bundle);
  for (const auto& c : bundle.generators) {
    const EulerPairing p = euler_pairing(bundle, c.name);
    const double v = magnitude ? std::abs(p.value) : p.value;
    rep.values()["euler"][c.name] = p.value;
    const std::string name = std::string(magnitude ? "|<e, [" : "<e, [") + c.name + (magnitude ? "]>|" : "]>");
    if (auto it = expected.find(c.name); it != expected.end())
      rep.add_value(name, v, it->second, tolerance);
    else
      rep.add_value(name, v, static_cast<double>(p.nearest), tolerance);
  }
}

struct SplitParams {
  TransverseAxis axis;
  std::vector<double> levels{0.5};  // level sets {u = +-s} for the weak filling checks
  double eps = 0.0;                 // symplectic pieces on {+-u >= eps}; 0 picks 5% of max|u|
};

inline void split(Report& rep, const InvariantForm& alpha, const SplitParams& sp, const RunOptions& ro) {
  const auto dec = decompose_alpha(alpha, 1e-8, ro.jobs);
  const int n = alpha.bundle->n();
  const double tol = ro.sweep_tol();
  const BaseForm& omega = alpha.bundle->curvature;
  const auto mesh = dividing_set(dec.u, alpha.bundle->base, sp.axis, 0.0, ro.jobs);
  if (mesh.empty()) {
    rep.add_error("dividing set", "u has no sampled zeros");
    return;
  }
  rep.values()["dividing_set_zeros"] = mesh.zeros.size();
  rep.add_positivity("beta0 contact on dividing set", gamma_contact_check(dec.beta, mesh, n, tol, ro.jobs));
  const SymplecticPieces pieces = symplectic_pieces(dec.beta, dec.u, omega, n, sp.eps, tol, ro.jobs);
  rep.add_positivity("omega+ symplectic", pieces.plus);
  rep.add_positivity("omega- symplectic", pieces.minus);
  rep.add_residual("d omega+- closed", pieces.closed_residual, 1e-5);
  rep.add_residual("omega+- volume identity", pieces.volume_residual, 1e-5);

  const BaseForm wp = ext_d((1.0 / dec.u) * dec.beta) + omega;
  for (double s : sp.levels) {
    char lvl[32];
    std::snprintf(lvl, sizeof lvl, "%g", s);
    struct Side {
      const char* name;
      ContactSliceData sd;
      BaseForm w;
    };
    std::vector<Side> sides;
    sides.push_back({"B+", make_slice(dec.beta, dec.u, sp.axis, s, ro.jobs), wp});
    sides.push_back({"B-", reversed(make_slice(dec.beta, -1.0 * dec.u, sp.axis, s, ro.jobs)), -1.0 * wp});
    for (auto& side : sides) {
      const std::string tag = std::string(side.name) + " {|u| = " + lvl + "}";
      if (side.sd.mesh.empty()) {
        rep.add_error(tag, "level set has no sampled points");
        continue;
      }
      const FrameSweep w1 = weak_filling_w1(side.sd, side.w, n, tol, ro.jobs);
      const FrameSweep w2 = weak_filling_w2(side.sd, side.w, n, default_b_samples(), tol, ro.jobs);
      rep.add_positivity("w1 " + tag, w1.report);
      rep.add_positivity("w2 " + tag, w2.report);
      rep.add_value("w1 implies w2 " + tag, (w1.report.passed && !w2.report.passed) ? 1.0 : 0.0, 0.0, 0.0);
    }
  }
}

struct ConstructT2S2 {
  int k = 1;
  ProfileParams profile;
  int circle_resolution = 12;
  int sphere_resolution = 16;
  std::vector<double> levels{0.5, 0.9};
};

/// Existence pipeline on T^2 x S^2: caps, neck, gluing, contact check,
/// dividing set, Euler pairings and the weak filling checks.
inline void construct_t2s2(Report& rep, const ConstructT2S2& p, const RunOptions& ro) {
  const int cres = ro.scaled(p.circle_resolution), sres = ro.scaled(p.sphere_resolution);
  auto s = models::t2s2(p.k, cres, sres);
  rep.parameters()["k"] = p.k;
  rep.parameters()["plateau_height"] = p.profile.plateau_height;
  rep.parameters()["transition_width"] = p.profile.transition_width;
  rep.resolutions()["base"] = factors_json(*s.m);
  euler(rep, *s.bundle, {{"S2", static_cast<double>(p.k)}, {"T2", 0.0}});

  s.neck.profile = p.profile;
  s.neck.sweep = ro.sweep("neck contact");
  const NeckResult neck = assemble_neck(s.neck);
  rep.values()["neck"]["escalations"] = neck.escalations;
  rep.values()["neck"]["plateau_height"] = neck.profile.plateau_height;
  rep.add_positivity("neck contact", neck.contact.sweep);
  rep.add_residual("neck oracle (relative)", neck.oracle_residual, 1e-4);
  rep.add_residual("neck frozen gauge", neck.frozen_residual, 1e-12);

  GlueSpec glue = s.glue;
  glue.jobs = ro.jobs;
  const GlueResult g = assemble_global(s.cap_plus, neck.alpha, s.cap_minus, glue);
  rep.add_residual("seam", g.seam_residual, 1e-10);
  verify_contact(rep, g.alpha, ro);

  const Expr u = g.alpha.b.coeff(0);
  const auto ds = dividing_set(u, s.m, s.axis, 0.0, ro.jobs);
  if (ds.empty()) {
    rep.add_error("dividing set", "no sampled zeros");
  } else {
    double worst = 0.0;
    for (const auto& z : ds.zeros) worst = std::max(worst, std::abs(s.t(z.point)));
    rep.add_residual("dividing set max |t|", worst, 1.0 / cres);
  }
  SplitParams sp;
  sp.axis = s.axis;
  sp.levels = p.levels;
  split(rep, g.alpha, sp, ro);
}

struct BourgeoisParams {
  int resolution = 8;
  int circle_resolution = 16;
  double r0 = 0.5, a = 0.1, b = 0.4;
};

inline void bourgeois(Report& rep, const BourgeoisParams& p, const RunOptions& ro) {
  rep.parameters()["r0"] = p.r0;
  rep.parameters()["cutoff_a"] = p.a;
  rep.parameters()["cutoff_b"] = p.b;
  const auto s = models::bourgeois_s3(ro.scaled(p.resolution), ro.scaled(p.circle_resolution), p.r0, p.a, p.b);
  rep.resolutions()["base"] = factors_json(*s.ob.B);
  const OpenBookReport ob = validate_open_book(s.ob, 0.05, ro.sweep_tol(), ro.jobs);
  rep.add_positivity("open book: alpha_N contact", ob.contact);
  rep.add_positivity("open book: pages", ob.pages);
  rep.add_positivity("open book: binding slices", ob.binding);
  const XYFields xy = xy_fields(s.ob, s.cutoff, ro.jobs);
  rep.add_residual("x dy - y dx = rho^2 dphi", xy.identity_residual, 1e-8);
  const BourgeoisResult br = bourgeois_form(s.ob, xy, ro.sweep("contact"));
  rep.add_positivity("contact", br.contact.sweep);
  rep.add_residual("lemma volume identity", identity_check_lemma_volume(br.alpha, ro.jobs), 1e-5);
  const BourgeoisSplitting sp = bourgeois_splitting(s.ob, br, 0.0, ro.sweep_tol(), ro.jobs);
  rep.values()["dividing_set_zeros"] = sp.dividing.zeros.size();
  rep.add_positivity("beta0 contact on dividing set", sp.gamma_contact);
  rep.add_positivity("omega+ symplectic", sp.pieces.plus);
  rep.add_positivity("omega- symplectic", sp.pieces.minus);
  rep.add_residual("d omega+- closed", sp.pieces.closed_residual, 1e-5);
  rep.add_value("sign(y) matches page side", static_cast<double>(sp.hemisphere_mismatch), 0.0, 0.0);
}

inline void contactise(Report& rep, const Expr& u, const BaseForm& ulambda, const BundlePtr& bundle,
                       ContactiseOptions opt, const RunOptions& ro) {
  rep.resolutions()["base"] = factors_json(*bundle->base);
  rep.parameters()["eps"] = opt.eps;
  opt.tol = ro.sweep_tol();
  opt.jobs = ro.jobs;
  const ContactiseResult r = contactise(u, ulambda, bundle, opt);
  if (r.boundary) rep.add_positivity("boundary contact", *r.boundary);
  rep.add_positivity("interior symplectic", r.interior);
  rep.add_positivity("contact", r.contact.sweep);
}

}  // namespace recipes
}  // namespace cbundle
