#pragma once

// Small dense helpers for frames (dimension <= ~8).

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace cbundle {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Determinant of a row-major k x k matrix (partial pivoting).
inline double det(std::vector<double> m, std::size_t k) {
  double d = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r * k + c]) > std::abs(m[piv * k + c])) piv = r;
    if (m[piv * k + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(m[c * k + j], m[piv * k + j]);
      d = -d;
    }
    const double p = m[c * k + c];
    d *= p;
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = m[r * k + c] / p;
      if (f == 0.0) continue;
      for (std::size_t j = c; j < k; ++j) m[r * k + j] -= f * m[c * k + j];
    }
  }
  return d;
}

/// Determinant of the coefficients of `vs` in the orthonormal basis `basis`
/// (both lists of ambient vectors, same length).
inline double det_in_basis(const std::vector<Vec>& vs, const std::vector<Vec>& basis) {
  const std::size_t k = vs.size();
  std::vector<double> m(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i * k + j] = dot(vs[i], basis[j]);
  return det(std::move(m), k);
}

/// Orthonormalise `seed` followed by `candidates`, dropping candidates that
/// become (numerically) dependent, until `want` vectors are collected.
/// The first output is seed / |seed|.
inline std::vector<Vec> complete_basis(const Vec& seed, const std::vector<Vec>& candidates, std::size_t want) {
  std::vector<Vec> out;
  const auto push = [&](Vec v) {
    for (const auto& q : out) {
      const double c = dot(v, q);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
    // Second pass for stability.
    for (const auto& q : out) {
      const double c = dot(v, q);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
    const double n = norm(v);
    if (n < 1e-9) return false;
    for (auto& x : v) x /= n;
    out.push_back(std::move(v));
    return true;
  };
  push(seed);
  for (const auto& c : candidates) {
    if (out.size() >= want) break;
    push(c);
  }
  return out;
}

}  // namespace cbundle
