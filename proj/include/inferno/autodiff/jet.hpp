#pragma once

#include <array>
#include <cassert>
#include <cmath>

#include "inferno/autodiff/tape.hpp"

namespace inferno::autodiff {

/// Truncated second-order number over k <= 4 directions: value, first-order
/// tangents and the packed symmetric second-order block.  The component scalar
/// T is double for plain evaluation or Var when the jet itself must stay
/// differentiable with respect to network parameters (forward-in-theta over
/// reverse-in-phi).
///
/// A jet with k == 0 is a direction-agnostic constant; binary operations
/// promote to the wider k (slot arrays are zero-filled at full size, so the
/// constant's missing slots read as exact zeros).
template <class T>
struct Jet2 {
  static constexpr int max_k = 4;

  int k = 0;
  T v{};
  std::array<T, max_k> g{};
  std::array<T, max_k*(max_k + 1) / 2> h{};  // packed lower triangle, (i>=j) -> i(i+1)/2+j

  Jet2() = default;
  explicit Jet2(double c) : v(T(c)) {}

  static constexpr int hidx(int i, int j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }
  int hsize() const { return k * (k + 1) / 2; }

  const T& hess(int i, int j) const { return h[static_cast<std::size_t>(hidx(i, j))]; }
  T& hess(int i, int j) { return h[static_cast<std::size_t>(hidx(i, j))]; }

  static Jet2 constant(int k, T value) {
    Jet2 out;
    out.k = k;
    out.v = value;
    return out;
  }

  /// seeded with a unit tangent in direction dir
  static Jet2 variable(int k, int dir, T value) {
    assert(dir >= 0 && dir < k && k <= max_k);
    Jet2 out = constant(k, value);
    out.g[static_cast<std::size_t>(dir)] = T(1.0);
    return out;
  }
};

using Jet2d = Jet2<double>;
using Jet2v = Jet2<Var>;

namespace detail {
inline int join_k(int ka, int kb) {
  assert(ka == 0 || kb == 0 || ka == kb);
  return ka > kb ? ka : kb;
}
}  // namespace detail

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  Jet2<T> c;
  c.k = detail::join_k(a.k, b.k);
  c.v = a.v + b.v;
  for (int i = 0; i < c.k; ++i) c.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < c.hsize(); ++i) c.h[i] = a.h[i] + b.h[i];
  return c;
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  Jet2<T> c;
  c.k = detail::join_k(a.k, b.k);
  c.v = a.v - b.v;
  for (int i = 0; i < c.k; ++i) c.g[i] = a.g[i] - b.g[i];
  for (int i = 0; i < c.hsize(); ++i) c.h[i] = a.h[i] - b.h[i];
  return c;
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a) {
  Jet2<T> c = a;
  c.v = -a.v;
  for (int i = 0; i < a.k; ++i) c.g[i] = -a.g[i];
  for (int i = 0; i < a.hsize(); ++i) c.h[i] = -a.h[i];
  return c;
}

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  Jet2<T> c;
  c.k = detail::join_k(a.k, b.k);
  c.v = a.v * b.v;
  for (int i = 0; i < c.k; ++i) c.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < c.k; ++i)
    for (int j = 0; j <= i; ++j)
      c.hess(i, j) = a.hess(i, j) * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.hess(i, j);
  return c;
}

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
  Jet2<T> c;
  c.k = detail::join_k(a.k, b.k);
  c.v = a.v / b.v;
  for (int i = 0; i < c.k; ++i) c.g[i] = (a.g[i] - c.v * b.g[i]) / b.v;
  for (int i = 0; i < c.k; ++i)
    for (int j = 0; j <= i; ++j)
      c.hess(i, j) =
          (a.hess(i, j) - c.g[i] * b.g[j] - c.g[j] * b.g[i] - c.v * b.hess(i, j)) / b.v;
  return c;
}

// mixed scalar forms
template <class T>
Jet2<T> operator*(const Jet2<T>& a, double s) {
  Jet2<T> c = a;
  c.v = a.v * T(s);
  for (int i = 0; i < a.k; ++i) c.g[i] = a.g[i] * T(s);
  for (int i = 0; i < a.hsize(); ++i) c.h[i] = a.h[i] * T(s);
  return c;
}
template <class T>
Jet2<T> operator*(double s, const Jet2<T>& a) { return a * s; }

template <class T>
Jet2<T> operator+(const Jet2<T>& a, double s) {
  Jet2<T> c = a;
  c.v = a.v + T(s);
  return c;
}
template <class T>
Jet2<T> operator+(double s, const Jet2<T>& a) { return a + s; }
template <class T>
Jet2<T> operator-(const Jet2<T>& a, double s) { return a + (-s); }
template <class T>
Jet2<T> operator-(double s, const Jet2<T>& a) { return (-a) + s; }
template <class T>
Jet2<T> operator/(const Jet2<T>& a, double s) { return a * (1.0 / s); }

template <class T>
Jet2<T> exp(const Jet2<T>& a) {
  using std::exp;
  Jet2<T> c;
  c.k = a.k;
  c.v = exp(a.v);
  for (int i = 0; i < a.k; ++i) c.g[i] = c.v * a.g[i];
  for (int i = 0; i < a.k; ++i)
    for (int j = 0; j <= i; ++j) c.hess(i, j) = c.v * (a.hess(i, j) + a.g[i] * a.g[j]);
  return c;
}

template <class T>
Jet2<T> log(const Jet2<T>& a) {
  using std::log;
  Jet2<T> c;
  c.k = a.k;
  c.v = log(a.v);
  for (int i = 0; i < a.k; ++i) c.g[i] = a.g[i] / a.v;
  for (int i = 0; i < a.k; ++i)
    for (int j = 0; j <= i; ++j)
      c.hess(i, j) = a.hess(i, j) / a.v - a.g[i] * a.g[j] / (a.v * a.v);
  return c;
}

/// max(x, 0); at the kink the derivative is taken as 0
template <class T>
Jet2<T> relu(const Jet2<T>& a) {
  if (value_of(a.v) > 0.0) return a;
  return Jet2<T>::constant(a.k, T(0.0));
}

template <class T>
double value_of(const Jet2<T>& a) {
  return value_of(a.v);
}

}  // namespace inferno::autodiff
