// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

namespace dmd {

/// Truncated Taylor expansion f(x0 + h) = c0 + c1 h + c2 h^2 + c3 h^3.
///
/// Evaluating a generic expression on a Jet seeded with Jet::variable(x0)
/// yields the value and the first three derivatives at x0 exactly (up to
/// rounding), which is how catalog generating functions get their
/// analytic derivatives.
struct Jet {
  std::array<double, 4> c{};

  Jet() = default;
  Jet(double constant) : c{constant, 0.0, 0.0, 0.0} {}  // NOLINT: implicit by intent

  static Jet variable(double x0) {
    Jet j;
    j.c = {x0, 1.0, 0.0, 0.0};
    return j;
  }

  double value() const { return c[0]; }
  /// k-th derivative, k in [0, 3].
  double derivative(int k) const {
    static constexpr double kFactorial[4] = {1.0, 1.0, 2.0, 6.0};
    return c[static_cast<std::size_t>(k)] * kFactorial[k];
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (std::size_t k = 0; k < 4; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (std::size_t k = 0; k < 4; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

inline Jet operator-(const Jet& a) {
  Jet r;
  for (std::size_t k = 0; k < 4; ++k) r.c[k] = -a.c[k];
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (std::size_t k = 0; k < 4; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet q;
  for (std::size_t k = 0; k < 4; ++k) {
    double s = a.c[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

inline Jet exp(const Jet& a) {
  Jet e;
  e.c[0] = std::exp(a.c[0]);
  for (std::size_t k = 1; k < 4; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c[j] * e.c[k - j];
    e.c[k] = s / static_cast<double>(k);
  }
  return e;
}

inline Jet log(const Jet& a) {
  Jet l;
  l.c[0] = std::log(a.c[0]);
  for (std::size_t k = 1; k < 4; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += static_cast<double>(j) * l.c[j] * a.c[k - j];
    l.c[k] = (a.c[k] - s / static_cast<double>(k)) / a.c[0];
  }
  return l;
}

/// a^p for a positive base.
inline Jet pow(const Jet& a, double p) { return exp(log(a) * Jet(p)); }

}  // namespace dmd
