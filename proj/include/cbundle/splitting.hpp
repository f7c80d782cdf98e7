#pragma once

// Dividing sets {u = 0}, the induced contact forms on them, weak-filling
// conditions, and the symplectic forms on the two pieces B+ and B-.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/forms.hpp"
#include "cbundle/invariant.hpp"

namespace cbundle {

/// Global sampling parameter along which level sets are bracketed.
struct TransverseAxis {
  int param = 0;
};

struct ZeroPoint {
  Vec point;
  Vec params;
  std::vector<Vec> gamma_frame;  // positive frame of T(level set), boundary orientation of {u >= s}
  Vec normal;                    // outward normal of {u >= s}: -grad u / |grad u|
  double grad_norm = 0.0;
};

struct DividingSetMesh {
  ManifoldPtr manifold;
  Expr u;
  double level = 0.0;
  TransverseAxis axis;
  std::vector<ZeroPoint> zeros;
  std::vector<std::int8_t> sign_regions;  // per grid sample: +1 on {u > s}, -1 on {u < s}, 0 on the level

  bool empty() const { return zeros.empty(); }
  std::size_t positive_samples() const {
    return static_cast<std::size_t>(std::count(sign_regions.begin(), sign_regions.end(), std::int8_t{1}));
  }
  std::size_t negative_samples() const {
    return static_cast<std::size_t>(std::count(sign_regions.begin(), sign_regions.end(), std::int8_t{-1}));
  }
};

namespace detail {

inline std::string point_string(std::span<const double> p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

/// Positive frame of the level set through p, oriented as the boundary of
/// {u >= level}: (outward normal, frame) is positive on the base.
inline ZeroPoint level_frame(const ModelManifold& m, const BaseForm& du, Vec params, Vec point) {
  const Frame fr = m.frame_at(point);
  Vec g(point.size(), 0.0);
  double g2 = 0.0;
  for (const auto& v : fr.vectors) {
    const double c = du.eval(point, {v});
    g2 += c * c;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * v[i];
  }
  ZeroPoint z;
  z.grad_norm = std::sqrt(g2);
  if (z.grad_norm < 1e-12) throw DegeneracyError("gradient of u vanishes on the level set at " + point_string(point));
  Vec nrm(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) nrm[i] = -g[i] / z.grad_norm;
  auto basis = complete_basis(nrm, fr.vectors, fr.vectors.size());
  if (basis.size() != fr.vectors.size()) throw DegeneracyError("could not complete a level-set frame at " + point_string(point));
  if (det_in_basis(basis, fr.vectors) < 0.0) {
    if (basis.size() < 2) throw DegeneracyError("orientation flip needs a 2-dimensional base");
    for (auto& x : basis[1]) x = -x;
  }
  z.normal = basis[0];
  z.gamma_frame.assign(basis.begin() + 1, basis.end());
  z.params = std::move(params);
  z.point = std::move(point);
  return z;
}

}  // namespace detail

/// Level set {u = level} by bisection along the transverse sampling parameter.
inline DividingSetMesh dividing_set(const Expr& u, ManifoldPtr mp, TransverseAxis axis, double level = 0.0,
                                    int jobs = 0) {
  const ModelManifold& m = *mp;
  if (axis.param < 0 || axis.param >= m.param_count()) throw ConstraintViolation("transverse axis out of range");
  DividingSetMesh ds;
  ds.manifold = mp;
  ds.u = u;
  ds.level = level;
  ds.axis = axis;
  const std::size_t n = m.sample_count();
  std::vector<double> vals(n);
  parallel_chunks(n, jobs, [&](std::size_t, std::size_t b, std::size_t e) {
    Sample s;
    for (std::size_t i = b; i < e; ++i) {
      m.sample(i, s);
      vals[i] = u(s.point) - level;
      detail::finite_or_throw(vals[i], s.point, "u");
    }
  });
  ds.sign_regions.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.sign_regions[i] = vals[i] > 0 ? 1 : (vals[i] < 0 ? -1 : 0);

  const auto [factor, local] = m.param_owner(axis.param);
  const ModelFactor& f = m.factors()[factor];
  const bool periodic = f.param_periodic(local);
  const double period = f.param_hi(local) - f.param_lo(local);
  const int len = m.grid_shape()[static_cast<std::size_t>(axis.param)];
  const BaseForm du = d(mp, u);

  // Directional derivative of u along the sampling parameter, per unit length.
  const auto directional = [&](const Vec& prm, const Vec& pt) {
    const Vec t = m.param_tangent(axis.param, prm);
    const double tn = norm(t);
    return tn > 0 ? du.eval(pt, {t}) / tn : 0.0;
  };

  std::vector<std::pair<Vec, Vec>> roots;  // (params, point)
  const auto record = [&](Vec prm) {
    Vec pt = m.point_from_params(prm);
    const double slope = directional(prm, pt);
    if (std::abs(slope) < 1e-6)
      throw DegeneracyError("tangential zero of u (directional derivative " + std::to_string(slope) + ") at " +
                            detail::point_string(pt));
    roots.emplace_back(std::move(prm), std::move(pt));
  };

  Sample s0;
  for (std::size_t i = 0; i < n; ++i) {
    auto mi = m.multi_index(i);
    const int k = mi[static_cast<std::size_t>(axis.param)];
    if (vals[i] == 0.0) {
      m.sample(i, s0);
      record(s0.params);
      continue;
    }
    if (k + 1 >= len && !periodic) continue;
    auto mj = mi;
    mj[static_cast<std::size_t>(axis.param)] = (k + 1) % len;
    const std::size_t j = m.flat_index(mj);
    if (!(vals[i] * vals[j] < 0.0)) continue;
    m.sample(i, s0);
    Vec prm = s0.params;
    double lo = prm[static_cast<std::size_t>(axis.param)];
    double hi = m.param_value(axis.param, (k + 1) % len);
    if (hi <= lo) hi += period;
    double flo = vals[i];
    Vec mid_pt;
    double x = lo;
    for (int it = 0; it < 200; ++it) {
      x = 0.5 * (lo + hi);
      prm[static_cast<std::size_t>(axis.param)] = x;
      mid_pt = m.point_from_params(prm);
      const double fm = u(mid_pt) - level;
      if (std::abs(fm) <= 1e-10) break;
      if ((fm < 0) == (flo < 0)) {
        lo = x;
        flo = fm;
      } else {
        hi = x;
      }
      if (it == 199) throw DegeneracyError("bisection did not converge near " + detail::point_string(mid_pt));
    }
    if (periodic && x >= f.param_hi(local)) x -= period;
    prm[static_cast<std::size_t>(axis.param)] = x;
    record(prm);
  }
  for (auto& [prm, pt] : roots) ds.zeros.push_back(detail::level_frame(m, du, prm, pt));
  return ds;
}

struct FrameSweep {
  PositivityReport report;
  int worst_k = -1;  // filling checks: which condition attained the minimum
  double worst_b = 0.0;
};

namespace detail {

/// Min of value(i) over zero points (sequential order decides ties).
template <class Fn>
PositivityReport min_over_zeros(const DividingSetMesh& ds, double tol, std::string label, int jobs, Fn&& fn) {
  const std::size_t n = ds.zeros.size();
  if (n == 0) throw ConstraintViolation("empty level set in '" + label + "'");
  std::vector<MinAcc> acc(static_cast<std::size_t>(std::max(1, jobs <= 0 ? default_jobs() : jobs)));
  const std::size_t used = parallel_chunks(n, jobs, [&](std::size_t c, std::size_t b, std::size_t e) {
    MinAcc local;
    for (std::size_t i = b; i < e; ++i) local.offer(fn(i), i, ds.zeros[i].point);
    acc[c] = std::move(local);
  });
  MinAcc total;
  for (std::size_t c = 0; c < used; ++c) total.merge(acc[c]);
  PositivityReport r;
  r.label = std::move(label);
  r.samples = total.count;
  r.min_value = total.value;
  r.argmin = total.point;
  r.argmin_index = total.index;
  r.resolution = ds.manifold->resolution();
  r.tolerance = tol;
  r.passed = r.min_value > tol;
  return r;
}

}  // namespace detail

/// beta ^ (d beta)^{n-1} on positive frames of the level set.
inline PositivityReport gamma_contact_check(const BaseForm& beta, const DividingSetMesh& ds, int n, double tol = 1e-9,
                                            int jobs = 0) {
  const BaseForm top = wedge(beta, wedge_power(ext_d(beta), n - 1));
  const FormBatch batch({top});
  return detail::min_over_zeros(ds, tol, "gamma-contact", jobs, [&](std::size_t i) {
    thread_local FormBatch::Workspace ws;
    const auto& z = ds.zeros[i];
    batch.load(z.point, ws);
    const double v = batch.form_value(0, z.gamma_frame, ws);
    detail::finite_or_throw(v, z.point, "beta^(dbeta)^(n-1)");
    return v;
  });
}

/// -du ^ beta ^ (d beta)^{n-1} on positive base frames at the level-set points.
inline PositivityReport gamma_orientation_check(const BaseForm& beta, const DividingSetMesh& ds, int n,
                                                double tol = 1e-9) {
  const BaseForm top = wedge(-d(ds.manifold, ds.u), wedge(beta, wedge_power(ext_d(beta), n - 1)));
  return detail::min_over_zeros(ds, tol, "gamma-orientation", 1, [&](std::size_t i) {
    const auto& z = ds.zeros[i];
    return top.eval(ds.manifold->frame_at(z.point));
  });
}

/// A level set Gamma_s with the form beta whose restriction is studied.
struct ContactSliceData {
  double s = 0.0;
  DividingSetMesh mesh;
  BaseForm beta;
};

inline ContactSliceData make_slice(const BaseForm& beta, const Expr& u, TransverseAxis axis, double s = 0.0,
                                   int jobs = 0) {
  return {s, dividing_set(u, beta.manifold(), axis, s, jobs), beta};
}

/// The same slice with the base orientation reversed, as for the boundary of
/// B- swept with its reversed orientation.
inline ContactSliceData reversed(ContactSliceData sd) {
  for (auto& z : sd.mesh.zeros) {
    if (z.gamma_frame.empty()) continue;
    for (auto& x : z.gamma_frame[0]) x = -x;
  }
  return sd;
}

namespace detail {

/// Positive frame of eta = ker(beta_0) in T Gamma: (R, F) positive on Gamma
/// where beta(R) > 0.
inline std::vector<Vec> eta_frame(const BaseForm& beta, const ZeroPoint& z) {
  Vec r(z.point.size(), 0.0);
  double rn = 0.0;
  for (const auto& v : z.gamma_frame) {
    const double c = beta.eval(z.point, {v});
    rn += c * c;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * v[i];
  }
  if (std::sqrt(rn) < 1e-12) throw DegeneracyError("beta_0 vanishes on the slice at " + point_string(z.point));
  auto basis = complete_basis(r, z.gamma_frame, z.gamma_frame.size());
  if (basis.size() != z.gamma_frame.size()) throw DegeneracyError("could not complete an eta frame");
  // With dim Gamma = 1, eta is zero-dimensional and the conditions are vacuous.
  if (basis.size() >= 2 && det_in_basis(basis, z.gamma_frame) < 0.0)
    for (auto& x : basis[1]) x = -x;
  return {basis.begin() + 1, basis.end()};
}

inline FrameSweep eta_sweep(const ContactSliceData& sd, const std::vector<BaseForm>& forms,
                            const std::vector<double>& tags, const std::string& label, double tol, int jobs) {
  const FormBatch batch(forms);
  std::vector<int> which(sd.mesh.zeros.size(), 0);
  auto rep = min_over_zeros(sd.mesh, tol, label, jobs, [&](std::size_t i) {
    thread_local FormBatch::Workspace ws;
    const auto& z = sd.mesh.zeros[i];
    const auto f = eta_frame(sd.beta, z);
    batch.load(z.point, ws);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < forms.size(); ++k) {
      const double v = f.empty() ? batch.form_value(k, {}, ws) : batch.form_value(k, f, ws);
      detail::finite_or_throw(v, z.point, label);
      if (v < best) {
        best = v;
        which[i] = static_cast<int>(k);
      }
    }
    return best;
  });
  FrameSweep out;
  out.worst_k = which[rep.argmin_index];
  out.worst_b = tags.empty() ? 0.0 : tags[static_cast<std::size_t>(out.worst_k)];
  out.report = std::move(rep);
  return out;
}

}  // namespace detail

/// (w1): (d beta_0)^k ^ omega^{n-1-k} > 0 on eta for k = 0..n-1.
inline FrameSweep weak_filling_w1(const ContactSliceData& sd, const BaseForm& omega, int n, double tol = 1e-9,
                                  int jobs = 0) {
  const BaseForm db = ext_d(sd.beta);
  std::vector<BaseForm> forms;
  std::vector<double> ks;
  for (int k = 0; k < n; ++k) {
    forms.push_back(wedge(wedge_power(db, k), wedge_power(omega, n - 1 - k)));
    ks.push_back(k);
  }
  return detail::eta_sweep(sd, forms, ks, "w1", tol, jobs);
}

inline const std::vector<double>& default_b_samples() {
  static const std::vector<double> b{0.0, 0.1, 1.0, 10.0, 100.0};
  return b;
}

/// (w2): (b d beta_0 + omega)^{n-1} > 0 on eta for each sampled constant b >= 0.
inline FrameSweep weak_filling_w2(const ContactSliceData& sd, const BaseForm& omega, int n,
                                  const std::vector<double>& b_samples = default_b_samples(), double tol = 1e-9,
                                  int jobs = 0) {
  const BaseForm db = ext_d(sd.beta);
  std::vector<BaseForm> forms;
  for (double b : b_samples) {
    if (b < 0) throw ConstraintViolation("w2 needs nonnegative b samples");
    forms.push_back(wedge_power(Expr(b) * db + omega, n - 1));
  }
  auto r = detail::eta_sweep(sd, forms, b_samples, "w2", tol, jobs);
  r.worst_k = -1;
  return r;
}

struct SymplecticPieces {
  PositivityReport plus, minus;
  double eps = 0.0;
  double closed_residual = 0.0;  // max |d omega_+-| on the sampled pieces
  double volume_residual = 0.0;  // max |Omega - u^{n+1}(d(beta/u)+omega)^n| / (1 + |Omega|)
  bool passed() const { return plus.passed && minus.passed && closed_residual <= 1e-5 && volume_residual <= 1e-5; }
};

inline double max_abs_u(const Expr& u, const ModelManifold& m, int jobs = 0) {
  const auto r = sweep_min(m, 0.0, jobs, "max|u|", [&](const Sample& s) -> std::optional<double> {
    return -std::abs(u(s.point));
  });
  return -r.min_value;
}

/// omega_+- = +-(d(beta/u) + omega) on {+-u >= eps}; B- is swept with the
/// reversed orientation.  eps <= 0 selects 0.05 max|u|.
inline SymplecticPieces symplectic_pieces(const BaseForm& beta, const Expr& u, const BaseForm& omega, int n,
                                          double eps = 0.0, double tol = 1e-9, int jobs = 0) {
  const auto mp = beta.manifold();
  const ModelManifold& m = *mp;
  if (eps <= 0) eps = 0.05 * max_abs_u(u, m, jobs);
  if (!(eps > 0)) throw ConstraintViolation("u vanishes identically; no symplectic pieces");
  SymplecticPieces sp;
  sp.eps = eps;
  const BaseForm w = ext_d((1.0 / u) * beta) + omega;
  const BaseForm wn = wedge_power(w, n);
  const double sign_n = (n % 2) ? -1.0 : 1.0;  // omega_-^n = (-1)^n w^n

  SweepOptions op;
  op.tol = tol;
  op.filter = u;
  op.filter_min = eps;
  op.jobs = jobs;
  op.label = "omega+^n";
  sp.plus = positivity_sweep(wn, m, op);

  SweepOptions om = op;
  om.filter = -u;
  om.orientation = -1;
  om.label = "omega-^n";
  sp.minus = positivity_sweep(Expr(sign_n) * wn, m, om);

  const Expr au = select(u, u, -u);
  sp.closed_residual = max_abs_on_tangent(ext_d(w), m, au, eps, jobs);

  const BaseForm omega_vol = omega_volume(beta, u, omega, n);
  Expr un1 = 1.0;
  for (int i = 0; i <= n; ++i) un1 = un1 * u;
  const BaseForm rhs = un1 * wn;
  const FormBatch batch({omega_vol, rhs}, {au});
  const auto rr = sweep_min(m, 0.0, jobs, "volume-residual", [&](const Sample& s) -> std::optional<double> {
    thread_local FormBatch::Workspace ws;
    batch.load(s.point, ws);
    if (!(batch.scalar_value(0, ws) >= eps)) return std::nullopt;
    const Frame fr = m.frame_at(s.point);
    const double a = batch.form_value(0, fr.vectors, ws), b = batch.form_value(1, fr.vectors, ws);
    return -std::abs(a - b) / (1.0 + std::abs(a));
  });
  sp.volume_residual = -rr.min_value;
  return sp;
}

/// Largest eps (as a fraction of max|u|) from the candidates for which both
/// pieces pass; 0 when none does.
inline double largest_passing_eps(const BaseForm& beta, const Expr& u, const BaseForm& omega, int n,
                                  std::vector<double> fractions = {0.2, 0.1, 0.05, 0.025}, int jobs = 0) {
  std::sort(fractions.begin(), fractions.end(), std::greater<>());
  const double mu = max_abs_u(u, *beta.manifold(), jobs);
  for (double f : fractions) {
    try {
      if (symplectic_pieces(beta, u, omega, n, f * mu, 1e-9, jobs).passed()) return f;
    } catch (const ConstraintViolation&) {
      // empty piece at this eps
    }
  }
  return 0.0;
}

struct SliceResult {
  double s = 0.0;
  std::optional<PositivityReport> report;
  std::string error;
  bool passed() const { return report && report->passed; }
};

/// gamma_contact_check on each level set {u = s}.
inline std::vector<SliceResult> slice_contact_family(const BaseForm& beta, const Expr& u, TransverseAxis axis,
                                                     const std::vector<double>& s_values, int n, double tol = 1e-9,
                                                     int jobs = 0) {
  std::vector<SliceResult> out;
  for (double s : s_values) {
    SliceResult r;
    r.s = s;
    try {
      const auto ds = dividing_set(u, beta.manifold(), axis, s, jobs);
      if (ds.empty()) throw ConstraintViolation("empty slice: u never takes the value " + std::to_string(s));
      r.report = gamma_contact_check(beta, ds, n, tol, jobs);
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cbundle
