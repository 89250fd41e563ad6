#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "inferno/autodiff/tape.hpp"

namespace inferno::autodiff {

/// Inverse of a small (k <= 4) symmetric matrix of differentiable scalars,
/// with a ridge fallback for ill-conditioned inputs.
template <class T>
struct SmallInverse {
  int k = 0;
  std::array<T, 16> inv{};  // row-major k x k
  bool ridged = false;
  double condition = 0.0;

  const T& operator()(int i, int j) const { return inv[static_cast<std::size_t>(i * k + j)]; }
};

namespace detail {

/// Gauss-Jordan with partial pivoting on a k x k system; returns false on a
/// zero pivot.  Generic over the scalar so the inverse entries stay
/// differentiable (d(M^-1) = -M^-1 dM M^-1 is implied by the elimination).
template <class T>
bool gauss_jordan(int k, std::array<T, 16>& m, std::array<T, 16>& out) {
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out[i * k + j] = T(i == j ? 1.0 : 0.0);
  for (int col = 0; col < k; ++col) {
    int piv = col;
    double best = std::abs(value_of(m[col * k + col]));
    for (int r = col + 1; r < k; ++r) {
      const double cand = std::abs(value_of(m[r * k + col]));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best == 0.0) return false;
    if (piv != col)
      for (int j = 0; j < k; ++j) {
        std::swap(m[piv * k + j], m[col * k + j]);
        std::swap(out[piv * k + j], out[col * k + j]);
      }
    const T d = m[col * k + col];
    for (int j = 0; j < k; ++j) {
      m[col * k + j] = m[col * k + j] / d;
      out[col * k + j] = out[col * k + j] / d;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const T f = m[r * k + col];
      if (value_of(f) == 0.0) continue;
      for (int j = 0; j < k; ++j) {
        m[r * k + j] = m[r * k + j] - f * m[col * k + j];
        out[r * k + j] = out[r * k + j] - f * out[col * k + j];
      }
    }
  }
  return true;
}

inline double inf_norm(int k, const std::array<double, 16>& m) {
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) row += std::abs(m[i * k + j]);
    best = std::max(best, row);
  }
  return best;
}

}  // namespace detail

constexpr double kConditionLimit = 1e8;

/// m: row-major k x k, symmetric.  If the condition estimate exceeds 1e8 the
/// input is ridge-regularized (eps = 1e-6 * trace / k on the diagonal) and the
/// result carries a warning flag.
template <class T>
SmallInverse<T> invert_small_matrix(int k, const T* m) {
  assert(k >= 1 && k <= 4);
  SmallInverse<T> res;
  res.k = k;

  // condition estimate on the double shadow
  std::array<double, 16> shadow{}, shadow_inv{};
  for (int i = 0; i < k * k; ++i) shadow[i] = value_of(m[i]);
  std::array<double, 16> scratch = shadow;
  const bool ok = detail::gauss_jordan(k, scratch, shadow_inv);
  res.condition = ok ? detail::inf_norm(k, shadow) * detail::inf_norm(k, shadow_inv)
                     : std::numeric_limits<double>::infinity();

  std::array<T, 16> work{};
  for (int i = 0; i < k * k; ++i) work[i] = m[i];
  if (!ok || res.condition > kConditionLimit) {
    double tr = 0.0;
    for (int i = 0; i < k; ++i) tr += shadow[i * k + i];
    const double eps = 1e-6 * tr / k;
    for (int i = 0; i < k; ++i) work[i * k + i] = work[i * k + i] + T(eps);
    res.ridged = true;
  }
  if (!detail::gauss_jordan(k, work, res.inv))
    throw std::runtime_error("invert_small_matrix: singular even after ridge");
  return res;
}

}  // namespace inferno::autodiff
