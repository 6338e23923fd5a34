// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dmd/errors.hpp"
#include "dmd/link_family.hpp"

namespace dmd {

struct QuadratureSettings {
  double tolerance = 1e-10;  // relative
  unsigned max_depth = 20;
};

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b] with its error
/// estimate. Throws QuadratureFailure when the estimate exceeds the
/// requested relative tolerance.
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

template <typename F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSettings& qs = {}) {
  if (a == b) return {};
  // Boost reports sub-interval error estimates without the half-width
  // factor, which inflates them on short intervals until the recursion hits
  // max_depth. Integrating finite ranges over [0, 1] keeps the estimate in
  // true units; infinite ranges are already mapped onto a fixed interval.
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  if (std::isfinite(a) && std::isfinite(b)) {
    const double len = b - a;
    auto unit = [&](double tau) { return f(a + len * tau) * len; };
    value = GK::integrate(unit, 0.0, 1.0, qs.max_depth, qs.tolerance, &error, &l1);
  } else {
    value = GK::integrate(std::forward<F>(f), a, b, qs.max_depth, qs.tolerance, &error, &l1);
  }
  if (!std::isfinite(value) || !(error <= 10.0 * qs.tolerance * std::max(std::abs(value), l1))) {
    throw QuadratureFailure("quadrature tolerance unmet (estimate " + detail::fmt_num(value) +
                            ", error " + detail::fmt_num(error) + ")");
  }
  return {value, error};
}

/// Generating potential F(x) = int_1^x log(t) dt of a link family; F(1) = 0.
class Potential {
 public:
  explicit Potential(LinkFamily fam, QuadratureSettings qs = {})
      : fam_(std::move(fam)), qs_(qs) {
    fam_.require_valid();
  }

  const LinkFamily& family() const { return fam_; }
  const QuadratureSettings& quadrature() const { return qs_; }

 private:
  LinkFamily fam_;
  QuadratureSettings qs_;
};

namespace detail {

/// Below this deformation strength the power-law antiderivatives cancel
/// badly; quadrature takes over.
inline constexpr double kClosedFormMinDeformation = 1e-3;

/// int_1^x t^e dt with u = ln x.
inline double power_integral(double e, double u) {
  const double p = e + 1.0;
  if (near_zero(p)) return u;
  return std::expm1(p * u) / p;
}

/// int_1^x (t^k - 1)/k dt, evaluated without cancellation for small k.
inline double tsallis_potential(double k, double x, double u) {
  if (std::abs(k + 1.0) < 0.5) return (power_integral(k, u) - (x - 1.0)) / k;
  return (x * std::expm1(k * u) / k - (x - 1.0)) / (k + 1.0);
}

/// Closed-form potential; returns false when the family needs quadrature.
inline bool closed_potential(const LinkFamily& fam, double x, double& out) {
  const double u = std::log(x);
  const double lin = x - 1.0;
  const auto strong = [](double v) { return std::abs(v) >= kClosedFormMinDeformation; };
  return std::visit(
      overloaded{
          [&](const family::Natural&) {
            out = x * u - lin;
            return true;
          },
          [&](const family::Identity&) {
            out = 0.5 * lin * lin;
            return true;
          },
          [&](const family::Tsallis& f) {
            const double k = 1.0 - f.q;
            if (near_zero(k)) {
              out = x * u - lin;
              return true;
            }
            out = tsallis_potential(k, x, u);
            return true;
          },
          [&](const family::Kaniadakis& f) {
            if (near_zero(f.kappa)) {
              out = x * u - lin;
              return true;
            }
            if (!strong(f.kappa)) return false;
            out = (power_integral(f.kappa, u) - power_integral(-f.kappa, u)) / (2 * f.kappa);
            return true;
          },
          [&](const family::ExtKaniadakis& f) {
            if (!strong(f.sigma)) return false;
            out = ((power_integral(f.sigma, u) - lin) -
                   f.alpha * (power_integral(-f.sigma, u) - lin)) /
                  ((1.0 + f.alpha) * f.sigma);
            return true;
          },
          [&](const family::KLS& f) {
            if (!strong(f.kappa)) return false;
            out = (power_integral(f.r + f.kappa, u) - power_integral(f.r - f.kappa, u)) /
                  (2 * f.kappa);
            return true;
          },
          [&](const family::ThreeParam& f) {
            if (!strong(f.kappa)) return false;
            const double lp = std::pow(f.lambda, f.kappa);
            const double lm = 1.0 / lp;
            const double p = f.r + f.kappa;
            const double m = f.r - f.kappa;
            out = (lp * (power_integral(p, u) - lin) - lm * (power_integral(m, u) - lin)) /
                  (p * lp - m * lm);
            return true;
          },
          [&](const family::KS& f) {
            if (!strong(f.kappa)) return false;
            const double lp = std::pow(f.lambda, f.kappa);
            const double lm = 1.0 / lp;
            const double c = 0.5 * (lp + lm);
            out = (lp * (power_integral(f.kappa, u) - lin) -
                   lm * (power_integral(-f.kappa, u) - lin)) /
                  (2 * f.kappa * c);
            return true;
          },
          [&](const family::Euler& f) {
            if (!strong(f.a - f.b)) return false;
            out = (power_integral(f.a, u) - power_integral(f.b, u)) / (f.a - f.b);
            return true;
          },
          [](const family::HTG&) { return false; },
          [](const family::HTGGeneral&) { return false; },
          [](const family::Tempesta&) { return false; },
      },
      fam.variant());
}

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string(what) + " requires x > 0, got " + fmt_num(x));
}

}  // namespace detail

/// F(x) = int_1^x log(t) dt. Power-law families use antiderivatives; the rest
/// integrate over s = ln t, where the integrand log(e^s) e^s is smooth.
inline double potential_eval(const Potential& pot, double x) {
  detail::require_positive(x, "potential");
  if (x == 1.0) return 0.0;
  double out = 0.0;
  if (detail::closed_potential(pot.family(), x, out)) return out;
  const auto& fam = pot.family();
  return integrate([&](double s) { return log_eval(fam, std::exp(s)) * std::exp(s); }, 0.0,
                   std::log(x), pot.quadrature())
      .value;
}

/// sum_i F(w_i) - F(v_i) - (w_i - v_i) log(v_i).
///
/// Families without closed-form potentials integrate each term directly as
/// int_{v_i}^{w_i} (log(t) - log(v_i)) dt, whose integrand has a fixed sign,
/// so the result cannot go negative through quadrature error.
inline double bregman_div(const Potential& pot, std::span<const double> w,
                          std::span<const double> v) {
  if (w.size() != v.size()) throw LengthMismatch("bregman_div: w and v differ in length");
  const auto& fam = pot.family();
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    detail::require_positive(w[i], "bregman_div");
    detail::require_positive(v[i], "bregman_div");
    if (w[i] == v[i]) continue;
    const double log_v = log_eval(fam, v[i]);
    double fw = 0.0;
    double fv = 0.0;
    if (detail::closed_potential(fam, w[i], fw) && detail::closed_potential(fam, v[i], fv)) {
      total += fw - fv - (w[i] - v[i]) * log_v;
      continue;
    }
    total += integrate(
                 [&](double s) {
                   const double t = std::exp(s);
                   return (log_eval(fam, t) - log_v) * t;
                 },
                 std::log(v[i]), std::log(w[i]), pot.quadrature())
                 .value;
  }
  return total;
}

}  // namespace dmd
