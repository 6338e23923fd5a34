// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <algorithm>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dmd/errors.hpp"

namespace dmd {

/// Lower bound enforced on every simplex coordinate.
inline constexpr double kDefaultFloor = 1e-12;

/// Strictly positive weight vector with unit l1 norm.
class SimplexPoint {
 public:
  /// Checks positivity and |sum - 1| <= tol; does not rescale.
  explicit SimplexPoint(std::vector<double> w, double tol = 1e-9) : w_(std::move(w)) {
    if (w_.empty()) throw InvalidParams("simplex point needs at least one coordinate");
    double s = 0.0;
    for (double v : w_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("simplex point coordinates must be positive and finite");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > tol) throw DomainError("simplex point coordinates must sum to 1");
  }

  static SimplexPoint uniform(std::size_t n) {
    if (n == 0) throw InvalidParams("simplex dimension must be >= 1");
    return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  /// Divides a positive vector by its l1 norm.
  static SimplexPoint normalized(std::vector<double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("cannot normalize: nonpositive sum");
    for (double& v : w) v /= s;
    return SimplexPoint(std::move(w));
  }

  std::span<const double> weights() const { return w_; }
  const std::vector<double>& vec() const { return w_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  double min() const { return *std::min_element(w_.begin(), w_.end()); }

  bool operator==(const SimplexPoint&) const = default;

 private:
  std::vector<double> w_;
};

/// Maps a nonnegative vector onto {w : sum w = 1, w_i >= floor}: negative
/// entries clip to 0, the vector is l1-normalized, then coordinates below
/// the floor are pinned to it and the others rescaled to keep unit mass.
/// Throws DegenerateState if nothing positive remains.
inline SimplexPoint project_to_simplex(std::vector<double> v, double floor = kDefaultFloor) {
  const std::size_t n = v.size();
  if (n == 0) throw InvalidParams("empty vector");
  if (!(floor > 0.0) || !(floor * static_cast<double>(n) < 1.0)) {
    throw InvalidParams("floor must satisfy 0 < floor < 1/N");
  }
  double s = 0.0;
  for (double& x : v) {
    if (std::isnan(x)) throw DegenerateState("non-finite coordinate in update");
    x = std::max(x, 0.0);
    s += x;
  }
  if (!(s > 0.0)) throw DegenerateState("all coordinates clipped to zero");
  if (!std::isfinite(s)) throw DegenerateState("non-finite coordinate in update");
  for (double& x : v) x /= s;

  std::vector<bool> pinned(n, false);
  for (std::size_t pass = 0; pass < n; ++pass) {
    std::size_t n_pinned = 0;
    double free_mass = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pinned[i] && v[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i]) {
        ++n_pinned;
      } else {
        free_mass += v[i];
      }
    }
    if (!changed) break;
    const double target = 1.0 - static_cast<double>(n_pinned) * floor;
    for (std::size_t i = 0; i < n; ++i) v[i] = pinned[i] ? floor : v[i] * target / free_mass;
  }
  return SimplexPoint(std::move(v));
}

}  // namespace dmd
