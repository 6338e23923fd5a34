// SPDX-License-Identifier: Apache-2.0
// Shared helpers for the test and acceptance binaries.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dmd/dmd.hpp"

namespace dmd::testing {

inline const std::vector<std::string>& catalog_tags() {
  static const std::vector<std::string> tags = [] {
    std::vector<std::string> t;
    for (const auto& e : catalog()) t.push_back(e.tag);
    return t;
  }();
  return tags;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  }
  return g;
}

inline double signed_uniform(Rng& rng, double lo, double hi) {
  const double v = rng.uniform(lo, hi);
  return rng.uniform() < 0.5 ? -v : v;
}

/// One random draw for `tag`; may be invalid (callers reject).
inline LinkFamily draw_family_once(Rng& rng, const std::string& tag) {
  if (tag == "natural") return LinkFamily::natural();
  if (tag == "tsallis") return LinkFamily::tsallis(rng.uniform(0.1, 2.5));
  if (tag == "kaniadakis") return LinkFamily::kaniadakis(rng.uniform(-0.95, 0.95));
  if (tag == "ext_kaniadakis") {
    return LinkFamily::ext_kaniadakis(rng.log_uniform(0.2, 5.0), rng.uniform(-0.95, 0.95));
  }
  if (tag == "kls") {
    const double k = rng.uniform(-0.95, 0.95);
    return LinkFamily::kls(k, rng.uniform(-std::abs(k), 0.5 - std::abs(0.5 - std::abs(k))));
  }
  if (tag == "three_param") {
    const double k = signed_uniform(rng, 0.05, 0.95);
    const double hi = std::min(std::abs(k), 1.0 - std::abs(k));
    return LinkFamily::three_param(k, rng.uniform(-std::abs(k), hi) * 0.98,
                                   rng.log_uniform(0.3, 3.0));
  }
  if (tag == "htg" || tag == "htg_general") {
    double a = rng.uniform(0.0, 0.9);
    double b = -rng.uniform(0.0, 0.95 - a);
    if (rng.uniform() < 0.5) std::swap(a, b);
    if (tag == "htg") return LinkFamily::htg(a, b);
    return LinkFamily::htg_general(a, b, rng.uniform() < 0.5 ? HKind::Tanh : HKind::Arctan);
  }
  if (tag == "ks") return LinkFamily::ks(rng.uniform(-0.95, 0.95), rng.log_uniform(0.3, 3.0));
  if (tag == "euler") {
    double a = rng.uniform(0.0, 0.95);
    double b = -rng.uniform(0.0, 1.5);
    if (rng.uniform() < 0.5) std::swap(a, b);
    return LinkFamily::euler(a, b);
  }
  if (tag == "tempesta") {
    const double pick = rng.uniform();
    const double sigma = rng.uniform(-0.9, 0.9);
    if (pick < 0.25) return LinkFamily::tempesta(phi::reciprocal(), rng.log_uniform(0.2, 5.0), sigma);
    if (pick < 0.5) {
      return LinkFamily::tempesta(phi::linear(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)),
                                  rng.log_uniform(0.2, 5.0), sigma);
    }
    if (pick < 0.75) {
      const double k = signed_uniform(rng, 0.1, 0.9);
      return LinkFamily::tempesta(
          phi::kaniadakis_three(k, rng.uniform(-std::abs(k), std::abs(k)) * 0.9,
                                rng.log_uniform(0.5, 2.0)),
          1.0, -1.0);
    }
    return LinkFamily::tempesta(
        phi::power_pair(rng.log_uniform(0.5, 2.0), rng.uniform(0.1, 0.9),
                        rng.log_uniform(0.5, 2.0), -rng.uniform(0.1, 0.9), 1.0),
        1.0, -1.0);
  }
  throw InvalidParams("unknown tag " + tag);
}

/// Random valid member of the family `tag` (rejection sampling).
inline LinkFamily random_family(Rng& rng, const std::string& tag) {
  for (int i = 0; i < 1000; ++i) {
    auto f = draw_family_once(rng, tag);
    if (f.valid()) return f;
  }
  throw InvalidParams("could not draw a valid " + tag);
}

/// Central-difference second derivative of log from dlog.
inline double numeric_d2log(const LinkFamily& f, double x, double h = 1e-4) {
  return (dlog_eval(f, x * (1 + h)) - dlog_eval(f, x * (1 - h))) / (2 * x * h);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace dmd::testing
