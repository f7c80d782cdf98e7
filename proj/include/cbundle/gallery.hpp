#pragma once

// Built-in examples with natively registered fields.

#include <chrono>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "cbundle/models.hpp"
#include "cbundle/recipes.hpp"

namespace cbundle {

inline const std::vector<std::string>& gallery_names() {
  static const std::vector<std::string> names{"lutz-t3",      "hopf",         "t2s2-k0",        "t2s2-k1",
                                              "t2s2-k2",      "bourgeois-s3", "contactise-t2d2"};
  return names;
}

/// Runs body, turning any library error into an error entry, and records the wall time.
inline Report run_captured(Report rep, const RunOptions& ro, const std::function<void(Report&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  rep.set_tolerance(ro.sweep_tol());
  rep.parameters()["resolution_scale"] = ro.resolution_scale;
  try {
    body(rep);
  } catch (const std::exception& e) {
    rep.add_error("error", e.what());
  }
  rep.set_wall_time(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return rep;
}

inline Report gallery(const std::string& name, const RunOptions& ro = {}) {
  if (name == "lutz-t3")
    return run_captured(Report(name, "verify-contact"), ro, [&](Report& rep) {
      const auto L = models::lutz_t3(ro.scaled(24));
      recipes::verify_contact(rep, L.alpha, ro, recipes::LemmaCheck{1e-8});
      recipes::split(rep, L.alpha, {L.axis, {0.5}, 0.0}, ro);
    });
  if (name == "hopf")
    return run_captured(Report(name, "euler"), ro, [&](Report& rep) {
      const auto h = models::hopf(ro.scaled(16));
      recipes::euler(rep, *h.bundle, {{"S2", 1.0}}, 1e-3, true);
      recipes::verify_contact(rep, boothby_wang(h.bundle, ro.sweep("boothby-wang")), ro);
    });
  if (name.rfind("t2s2-k", 0) == 0 && name.size() == 7 && name[6] >= '0' && name[6] <= '2')
    return run_captured(Report(name, "construct"), ro, [&](Report& rep) {
      recipes::ConstructT2S2 p;
      p.k = name[6] - '0';
      recipes::construct_t2s2(rep, p, ro);
    });
  if (name == "bourgeois-s3")
    return run_captured(Report(name, "bourgeois"), ro,
                        [&](Report& rep) { recipes::bourgeois(rep, recipes::BourgeoisParams{}, ro); });
  if (name == "contactise-t2d2")
    return run_captured(Report(name, "contactise"), ro, [&](Report& rep) {
      const auto d = models::t2d2(0.0, ro.scaled(12));
      ContactiseOptions opt;
      opt.axis = d.axis;
      opt.domain = d.domain;
      recipes::contactise(rep, d.u, d.ulambda, d.bundle, opt, ro);
    });
  std::string known;
  for (const auto& n : gallery_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConstraintViolation("unknown gallery example '" + name + "' (valid: " + known + ")");
}

}  // namespace cbundle
