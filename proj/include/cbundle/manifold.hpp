#pragma once

// Model base manifolds: ordered products of circles, intervals and unit
// spheres, embedded factor-wise in Euclidean ambient coordinates.
//
// Ambient coordinates of the factors are concatenated in factor order.  A
// circle contributes one periodic coordinate of period 1, an interval one
// coordinate in [lo, hi], S^2 three and S^3 four.  Sampling grids are
// cell-centred in every parameter, so sphere grids never touch the poles
// (S^2) or the two degenerate Hopf circles (S^3).

#include <array>
#include <memory>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/error.hpp"
#include "cbundle/linalg.hpp"

namespace cbundle {

enum class FactorKind { Circle, Interval, Sphere2, Sphere3 };

inline std::string to_string(FactorKind k) {
  switch (k) {
    case FactorKind::Circle: return "circle";
    case FactorKind::Interval: return "interval";
    case FactorKind::Sphere2: return "sphere2";
    case FactorKind::Sphere3: return "sphere3";
  }
  return "?";
}

struct ModelFactor {
  FactorKind kind = FactorKind::Circle;
  double lo = 0.0;  // interval endpoints
  double hi = 1.0;
  int resolution = 12;

  static ModelFactor circle(int res = 12) { return {FactorKind::Circle, 0.0, 1.0, res}; }
  static ModelFactor interval(double a, double b, int res = 12) {
    if (!(b > a)) throw ConstraintViolation("interval factor needs lo < hi");
    return {FactorKind::Interval, a, b, res};
  }
  static ModelFactor sphere2(int res = 16) { return {FactorKind::Sphere2, 0.0, 1.0, res}; }
  static ModelFactor sphere3(int res = 8) { return {FactorKind::Sphere3, 0.0, 1.0, res}; }

  int ambient_dim() const {
    switch (kind) {
      case FactorKind::Circle:
      case FactorKind::Interval: return 1;
      case FactorKind::Sphere2: return 3;
      case FactorKind::Sphere3: return 4;
    }
    return 0;
  }
  int intrinsic_dim() const {
    switch (kind) {
      case FactorKind::Circle:
      case FactorKind::Interval: return 1;
      case FactorKind::Sphere2: return 2;
      case FactorKind::Sphere3: return 3;
    }
    return 0;
  }

  /// Grid sizes per sampling parameter.  S^2: (polar, azimuth) = (N, 2N);
  /// S^3 Hopf coordinates (eta, xi1, xi2) = (N, 2N, 2N).
  std::vector<int> grid_shape() const {
    const int n = std::max(1, resolution);
    switch (kind) {
      case FactorKind::Circle:
      case FactorKind::Interval: return {n};
      case FactorKind::Sphere2: return {n, 2 * n};
      case FactorKind::Sphere3: return {n, 2 * n, 2 * n};
    }
    return {};
  }

  bool param_periodic(int k) const {
    switch (kind) {
      case FactorKind::Circle: return true;
      case FactorKind::Interval: return false;
      case FactorKind::Sphere2: return k == 1;
      case FactorKind::Sphere3: return k >= 1;
    }
    return false;
  }

  double param_lo(int k) const {
    if (kind == FactorKind::Interval) return lo;
    (void)k;
    return 0.0;
  }
  double param_hi(int k) const {
    switch (kind) {
      case FactorKind::Circle: return 1.0;
      case FactorKind::Interval: return hi;
      case FactorKind::Sphere2: return k == 0 ? std::numbers::pi : 2.0 * std::numbers::pi;
      case FactorKind::Sphere3: return k == 0 ? std::numbers::pi / 2.0 : 2.0 * std::numbers::pi;
    }
    return 1.0;
  }

  double param_value(int k, int idx) const {
    const int n = grid_shape()[static_cast<std::size_t>(k)];
    return param_lo(k) + (param_hi(k) - param_lo(k)) * (idx + 0.5) / n;
  }

  void point(std::span<const double> prm, std::span<double> out) const {
    switch (kind) {
      case FactorKind::Circle: {
        double c = prm[0] - std::floor(prm[0]);
        if (c >= 1.0) c = 0.0;
        out[0] = c;
        break;
      }
      case FactorKind::Interval: out[0] = prm[0]; break;
      case FactorKind::Sphere2: {
        const double th = prm[0], ph = prm[1];
        out[0] = std::sin(th) * std::cos(ph);
        out[1] = std::sin(th) * std::sin(ph);
        out[2] = std::cos(th);
        break;
      }
      case FactorKind::Sphere3: {
        const double eta = prm[0], x1 = prm[1], x2 = prm[2];
        out[0] = std::cos(eta) * std::cos(x1);
        out[1] = std::cos(eta) * std::sin(x1);
        out[2] = std::sin(eta) * std::cos(x2);
        out[3] = std::sin(eta) * std::sin(x2);
        break;
      }
    }
  }

  /// d point / d param_k.
  void param_tangent(int k, std::span<const double> prm, std::span<double> out) const {
    for (auto& v : out) v = 0.0;
    switch (kind) {
      case FactorKind::Circle:
      case FactorKind::Interval: out[0] = 1.0; break;
      case FactorKind::Sphere2: {
        const double th = prm[0], ph = prm[1];
        if (k == 0) {
          out[0] = std::cos(th) * std::cos(ph);
          out[1] = std::cos(th) * std::sin(ph);
          out[2] = -std::sin(th);
        } else {
          out[0] = -std::sin(th) * std::sin(ph);
          out[1] = std::sin(th) * std::cos(ph);
        }
        break;
      }
      case FactorKind::Sphere3: {
        const double eta = prm[0], x1 = prm[1], x2 = prm[2];
        if (k == 0) {
          out[0] = -std::sin(eta) * std::cos(x1);
          out[1] = -std::sin(eta) * std::sin(x1);
          out[2] = std::cos(eta) * std::cos(x2);
          out[3] = std::cos(eta) * std::sin(x2);
        } else if (k == 1) {
          out[0] = -std::cos(eta) * std::sin(x1);
          out[1] = std::cos(eta) * std::cos(x1);
        } else {
          out[2] = -std::sin(eta) * std::sin(x2);
          out[3] = std::sin(eta) * std::cos(x2);
        }
        break;
      }
    }
  }

  void check_point(std::span<const double> p) const {
    if (kind == FactorKind::Sphere2 || kind == FactorKind::Sphere3) {
      const double r2 = dot(p, p);
      if (std::abs(r2 - 1.0) > 1e-10) {
        std::ostringstream os;
        os << to_string(kind) << " point off the unit sphere (|x|^2 = " << r2 << ")";
        throw ConstraintViolation(os.str());
      }
    } else if (kind == FactorKind::Interval) {
      const double tol = 1e-9 * (1.0 + std::abs(hi - lo));
      if (p[0] < lo - tol || p[0] > hi + tol) throw ConstraintViolation("interval coordinate outside [lo, hi]");
    }
  }

  /// Positive orthonormal tangent frame at an ambient point of this factor.
  /// Spheres are oriented outward-normal-first: det[n, e1, ...] > 0.
  std::vector<Vec> frame(std::span<const double> p) const {
    check_point(p);
    switch (kind) {
      case FactorKind::Circle:
      case FactorKind::Interval: return {Vec{1.0}};
      case FactorKind::Sphere2: {
        const double x = p[0], y = p[1], z = p[2];
        Vec a{-y, x, 0.0};
        double na = norm(a);
        if (na < 1e-8) {
          a = {1.0 - x * x, -x * y, -x * z};
          na = norm(a);
        }
        for (auto& v : a) v /= na;
        Vec b{y * a[2] - z * a[1], z * a[0] - x * a[2], x * a[1] - y * a[0]};  // n x e1
        return {a, b};
      }
      case FactorKind::Sphere3: {
        // Left multiplication by the quaternion units i, j, k.
        const double a = p[0], b = p[1], c = p[2], d = p[3];
        return {Vec{-b, a, -d, c}, Vec{-c, d, a, -b}, Vec{-d, -c, b, a}};
      }
    }
    return {};
  }
};

/// Oriented tangent frame at an ambient point.
struct Frame {
  Vec point;
  std::vector<Vec> vectors;
  bool oriented = true;
};

/// One grid sample: sampling parameters (concatenated over factors), the
/// ambient point and the flat grid index.
struct Sample {
  std::size_t index = 0;
  Vec params;
  Vec point;
};

class ModelManifold {
 public:
  ModelManifold() = default;
  explicit ModelManifold(std::vector<ModelFactor> factors) : factors_(std::move(factors)) {
    int a = 0, p = 0, d = 0;
    for (const auto& f : factors_) {
      ambient_offset_.push_back(a);
      param_offset_.push_back(p);
      a += f.ambient_dim();
      p += static_cast<int>(f.grid_shape().size());
      d += f.intrinsic_dim();
      for (int s : f.grid_shape()) shape_.push_back(s);
    }
    ambient_dim_ = a;
    intrinsic_dim_ = d;
  }

  const std::vector<ModelFactor>& factors() const { return factors_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  int ambient_offset(std::size_t f) const { return ambient_offset_.at(f); }
  int param_offset(std::size_t f) const { return param_offset_.at(f); }
  int param_count() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& grid_shape() const { return shape_; }

  std::vector<int> resolution() const {
    std::vector<int> r;
    for (const auto& f : factors_) r.push_back(f.resolution);
    return r;
  }

  std::size_t sample_count() const {
    std::size_t n = 1;
    for (int s : shape_) n *= static_cast<std::size_t>(s);
    return factors_.empty() ? 0 : n;
  }

  /// Same factors with resolutions multiplied by `scale` (at least 1).
  ModelManifold scaled(double scale) const {
    auto f = factors_;
    for (auto& x : f) x.resolution = std::max(1, static_cast<int>(std::lround(x.resolution * scale)));
    return ModelManifold(std::move(f));
  }

  /// Grid multi-index of flat index (last parameter fastest).
  std::vector<int> multi_index(std::size_t idx) const {
    std::vector<int> mi(shape_.size());
    for (std::size_t k = shape_.size(); k-- > 0;) {
      mi[k] = static_cast<int>(idx % static_cast<std::size_t>(shape_[k]));
      idx /= static_cast<std::size_t>(shape_[k]);
    }
    return mi;
  }

  std::size_t flat_index(const std::vector<int>& mi) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) idx = idx * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(mi[k]);
    return idx;
  }

  /// Locates global parameter p: (factor, local parameter).
  std::pair<std::size_t, int> param_owner(int p) const {
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const int lo = param_offset_[f], n = static_cast<int>(factors_[f].grid_shape().size());
      if (p >= lo && p < lo + n) return {f, p - lo};
    }
    throw ConstraintViolation("parameter index out of range");
  }

  double param_value(int p, int idx) const {
    const auto [f, k] = param_owner(p);
    return factors_[f].param_value(k, idx);
  }

  void point_from_params(std::span<const double> prm, std::span<double> out) const {
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const auto np = factors_[f].grid_shape().size();
      factors_[f].point(prm.subspan(static_cast<std::size_t>(param_offset_[f]), np),
                        out.subspan(static_cast<std::size_t>(ambient_offset_[f]),
                                    static_cast<std::size_t>(factors_[f].ambient_dim())));
    }
  }

  Vec point_from_params(std::span<const double> prm) const {
    Vec out(static_cast<std::size_t>(ambient_dim_));
    point_from_params(prm, out);
    return out;
  }

  /// Ambient derivative of the sampling map along global parameter p.
  Vec param_tangent(int p, std::span<const double> prm) const {
    const auto [f, k] = param_owner(p);
    Vec out(static_cast<std::size_t>(ambient_dim_), 0.0);
    const auto np = factors_[f].grid_shape().size();
    factors_[f].param_tangent(k, prm.subspan(static_cast<std::size_t>(param_offset_[f]), np),
                              std::span<double>(out).subspan(static_cast<std::size_t>(ambient_offset_[f]),
                                                             static_cast<std::size_t>(factors_[f].ambient_dim())));
    return out;
  }

  void sample(std::size_t idx, Sample& s) const {
    s.index = idx;
    const auto mi = multi_index(idx);
    s.params.resize(shape_.size());
    for (std::size_t k = 0; k < shape_.size(); ++k) s.params[k] = param_value(static_cast<int>(k), mi[k]);
    s.point.resize(static_cast<std::size_t>(ambient_dim_));
    point_from_params(s.params, s.point);
  }

  Sample sample(std::size_t idx) const {
    Sample s;
    sample(idx, s);
    return s;
  }

  void check_point(std::span<const double> p) const {
    if (static_cast<int>(p.size()) != ambient_dim_)
      throw ConstraintViolation("point has dimension " + std::to_string(p.size()) + ", manifold ambient dimension is " +
                                std::to_string(ambient_dim_));
    for (std::size_t f = 0; f < factors_.size(); ++f)
      factors_[f].check_point(p.subspan(static_cast<std::size_t>(ambient_offset_[f]),
                                        static_cast<std::size_t>(factors_[f].ambient_dim())));
  }

  /// Oriented orthonormal tangent frame: concatenation of the positive factor
  /// frames in factor order.
  Frame frame_at(std::span<const double> p) const {
    check_point(p);
    Frame fr;
    fr.point.assign(p.begin(), p.end());
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const auto off = static_cast<std::size_t>(ambient_offset_[f]);
      const auto d = static_cast<std::size_t>(factors_[f].ambient_dim());
      if (factors_[f].kind == FactorKind::Circle) fr.point[off] -= std::floor(fr.point[off]);
      for (auto& local : factors_[f].frame(p.subspan(off, d))) {
        Vec v(static_cast<std::size_t>(ambient_dim_), 0.0);
        for (std::size_t i = 0; i < d; ++i) v[off + i] = local[i];
        fr.vectors.push_back(std::move(v));
      }
    }
    return fr;
  }

  std::string describe() const {
    std::ostringstream os;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      if (f) os << " x ";
      os << to_string(factors_[f].kind);
      if (factors_[f].kind == FactorKind::Interval) os << "[" << factors_[f].lo << "," << factors_[f].hi << "]";
      os << "(" << factors_[f].resolution << ")";
    }
    return os.str();
  }

 private:
  std::vector<ModelFactor> factors_;
  std::vector<int> ambient_offset_, param_offset_, shape_;
  int ambient_dim_ = 0;
  int intrinsic_dim_ = 0;
};

using ManifoldPtr = std::shared_ptr<const ModelManifold>;

inline ManifoldPtr make_manifold(std::vector<ModelFactor> factors) {
  return std::make_shared<const ModelManifold>(std::move(factors));
}

}  // namespace cbundle
