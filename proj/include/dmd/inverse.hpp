// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dmd/errors.hpp"
#include "dmd/link_family.hpp"

namespace dmd {

struct InversionSettings {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_iters = 200;
  double bracket_lo = 1e-12;
  double bracket_hi = 1e12;
  int series_order = 3;

  void validate() const {
    if (!(bracket_lo > 0.0) || !(bracket_lo < bracket_hi) || !std::isfinite(bracket_hi)) {
      throw InvalidParams("inversion bracket must satisfy 0 < bracket_lo < bracket_hi < inf");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw InvalidParams("inversion tolerances must be positive");
    }
    if (max_iters < 1) throw InvalidParams("inversion max_iters must be >= 1");
    if (series_order != 2 && series_order != 3) {
      throw InvalidParams("series_order must be 2 or 3");
    }
  }

  bool operator==(const InversionSettings&) const = default;
};

struct InversionResult {
  double x = 1.0;
  int iterations = 0;
};

namespace detail {

// Bracket expansion stops at x in [1e-300, 1e300].
inline constexpr double kMinLogX = -690.7755278982137;
inline constexpr double kMaxLogX = 690.7755278982137;

}  // namespace detail

/// Solve log_eval(fam, x) = y for x.
///
/// Works on u = ln x: grows the bracket geometrically until it straddles y,
/// bisects until the bracket is narrower than one e-fold, then takes Newton
/// steps with slope x * dlog(x), bisecting whenever a step leaves the bracket.
/// Throws BracketError (with the side) if y is outside the reachable range and
/// NoConvergence after settings.max_iters iterations.
inline InversionResult invert_monotone(const LinkFamily& fam, double y,
                                       const InversionSettings& settings = {}) {
  fam.require_valid();
  settings.validate();
  if (!std::isfinite(y)) throw DomainError("cannot invert a non-finite value");

  auto residual = [&](double u) { return log_eval(fam, std::exp(u)) - y; };
  const double tol = settings.abs_tol + settings.rel_tol * std::abs(y);
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y));

  double ulo = std::log(settings.bracket_lo);
  double uhi = std::log(settings.bracket_hi);
  double flo = residual(ulo);
  double fhi = residual(uhi);
  double step = 2.0;
  while (flo > 0.0) {
    if (ulo <= detail::kMinLogX) {
      throw BracketError(BracketError::Side::Below,
                         "y=" + detail::fmt_num(y) + " is below the range of " + fam.describe());
    }
    uhi = ulo;
    fhi = flo;
    ulo = std::max(ulo - step, detail::kMinLogX);
    step *= 2.0;
    flo = residual(ulo);
  }
  step = 2.0;
  while (fhi < 0.0) {
    if (uhi >= detail::kMaxLogX) {
      throw BracketError(BracketError::Side::Above,
                         "y=" + detail::fmt_num(y) + " is above the range of " + fam.describe());
    }
    ulo = uhi;
    flo = fhi;
    uhi = std::min(uhi + step, detail::kMaxLogX);
    step *= 2.0;
    fhi = residual(uhi);
  }
  if (flo == 0.0) return {std::exp(ulo), 0};
  if (fhi == 0.0) return {std::exp(uhi), 0};

  // ln x is the zeroth-order approximation of every deformed log near 1.
  double u = (y > ulo && y < uhi) ? y : 0.5 * (ulo + uhi);
  for (int it = 1; it <= settings.max_iters; ++it) {
    const double x = std::exp(u);
    const double f = log_eval(fam, x) - y;
    if (f == 0.0) return {x, it};
    if (f < 0.0) {
      ulo = u;
    } else {
      uhi = u;
    }
    const double slope = x * dlog_eval(fam, x);
    const double delta = f / slope;
    const bool newton_ok = std::isfinite(delta) && slope > 0.0;
    if (newton_ok && std::abs(f) <= tol &&
        (std::abs(delta) <= 1e-12 * std::max(1.0, std::abs(u)) || std::abs(f) <= noise)) {
      const double polished = u - delta;
      return {std::exp(polished > ulo && polished < uhi ? polished : u), it};
    }
    if (uhi - ulo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      if (std::abs(f) <= tol) return {x, it};
      throw NoConvergence("bracket collapsed without meeting tolerance for y=" +
                          detail::fmt_num(y));
    }
    const double next = u - delta;
    if (uhi - ulo > 1.0 || !newton_ok || !(next > ulo && next < uhi)) {
      u = 0.5 * (ulo + uhi);
    } else {
      u = next;
    }
  }
  throw NoConvergence("no convergence after " + std::to_string(settings.max_iters) +
                      " iterations for y=" + detail::fmt_num(y) + " in " + fam.describe());
}

/// Truncated inverse series of log(x) = u + a1 u^2/2 + a2 u^3/6 (u = ln x):
///   exp(y) ~ 1 + y + (1 - a1) y^2 / 2 + (1 - 3 a1 + 3 a1^2 - a2) y^3 / 6.
/// order 2 drops the cubic term.
inline double exp_series(double a1, double a2, double y, int order = 3) {
  if (order != 2 && order != 3) throw InvalidParams("series order must be 2 or 3");
  const double c2 = 0.5 * (1.0 - a1);
  const double c3 = order == 3 ? (1.0 - 3.0 * a1 + 3.0 * a1 * a1 - a2) / 6.0 : 0.0;
  return 1.0 + y * (1.0 + y * (c2 + y * c3));
}

/// Outcome of exp_eval: value plus how it was obtained.
struct ExpResult {
  double x = 1.0;
  int iterations = 0;
  bool closed_form = false;
};

/// Deformed exponential: closed form when the family has one (and
/// allow_closed is set), numeric inversion otherwise. Values of y below the
/// logarithm's range map to 0, mirroring the [.]_+ clip of the Tsallis
/// exponential; values above it throw BracketError or DomainError.
inline ExpResult exp_eval(const LinkFamily& fam, double y, const InversionSettings& settings = {},
                          bool allow_closed = true) {
  if (allow_closed) {
    if (auto v = exp_closed(fam, y)) return {*v, 0, true};
  }
  try {
    const auto r = invert_monotone(fam, y, settings);
    return {r.x, r.iterations, false};
  } catch (const BracketError& e) {
    if (e.side() == BracketError::Side::Below) return {0.0, 0, false};
    throw;
  }
}

/// Tabulated (ln x, log(x)) pairs on a log-spaced grid for fast inversion.
class LookupTable {
 public:
  LookupTable(LinkFamily fam, std::vector<double> u, std::vector<double> y,
              std::vector<double> slope)
      : fam_(std::move(fam)), u_(std::move(u)), y_(std::move(y)), slope_(std::move(slope)) {}

  const LinkFamily& family() const { return fam_; }
  std::size_t size() const { return u_.size(); }
  double y_min() const { return y_.front(); }
  double y_max() const { return y_.back(); }

  /// Monotone cubic Hermite estimate of ln x at y (no Newton polish).
  double interpolate_log_x(double y) const {
    if (!(y >= y_.front() && y <= y_.back())) {
      throw BracketError(y < y_.front() ? BracketError::Side::Below : BracketError::Side::Above,
                         "y=" + detail::fmt_num(y) + " outside lookup table range");
    }
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t k = it == y_.end() ? y_.size() - 2
                                   : static_cast<std::size_t>(std::distance(y_.begin(), it)) - 1;
    k = std::min(k, y_.size() - 2);
    const double h = y_[k + 1] - y_[k];
    const double secant = (u_[k + 1] - u_[k]) / h;
    double m0 = slope_[k];
    double m1 = slope_[k + 1];
    // Fritsch-Carlson limiter keeps the interpolant monotone.
    const double a = m0 / secant;
    const double b = m1 / secant;
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      m0 = tau * a * secant;
      m1 = tau * b * secant;
    }
    const double t = (y - y_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u_[k] + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * u_[k + 1] + (t3 - t2) * h * m1;
  }

 private:
  LinkFamily fam_;
  std::vector<double> u_;
  std::vector<double> y_;
  std::vector<double> slope_;  // du/dy = 1 / (x dlog(x))
};

/// Table of grid_size log-spaced points on [x_lo, x_hi].
inline LookupTable build_lookup(const LinkFamily& fam, int grid_size, double x_lo = 1e-6,
                                double x_hi = 1e6) {
  fam.require_valid();
  if (grid_size < 2) throw InvalidParams("lookup grid_size must be >= 2");
  if (!(x_lo > 0.0 && x_lo < x_hi)) throw InvalidParams("lookup range must be 0 < lo < hi");
  const auto n = static_cast<std::size_t>(grid_size);
  std::vector<double> u(n), y(n), slope(n);
  const double ulo = std::log(x_lo);
  const double uhi = std::log(x_hi);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = ulo + (uhi - ulo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double x = std::exp(u[i]);
    y[i] = log_eval(fam, x);
    slope[i] = 1.0 / (x * dlog_eval(fam, x));
    if (i > 0 && !(y[i] > y[i - 1])) {
      throw InvalidParams("logarithm not strictly increasing on the lookup grid");
    }
  }
  return LookupTable(fam, std::move(u), std::move(y), std::move(slope));
}

/// Table interpolation followed by one Newton polish.
inline double lookup_invert(const LookupTable& table, double y) {
  double u = table.interpolate_log_x(y);
  const double x = std::exp(u);
  const double f = log_eval(table.family(), x) - y;
  u -= f / (x * dlog_eval(table.family(), x));
  return std::exp(u);
}

}  // namespace dmd
