// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dmd/errors.hpp"
#include "dmd/rng.hpp"
#include "dmd/simplex.hpp"

namespace dmd {

/// Loss on positive vectors with its analytic gradient.
///
/// Batch problems ignore the round argument. Sequential (online) problems
/// expose `rounds` losses; the runner consumes one per iteration.
struct Problem {
  using LossFn = std::function<double(std::span<const double>, std::size_t)>;
  using GradFn = std::function<std::vector<double>(std::span<const double>, std::size_t)>;

  std::string name;
  std::size_t dim = 0;
  LossFn loss;
  GradFn grad;
  std::optional<SimplexPoint> known_minimizer;
  bool sequential = false;
  std::size_t rounds = 1;
};

/// Central differences (L(u + h e_i) - L(u - h e_i)) / 2h.
inline std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                            std::span<const double> u, double h = 1e-6) {
  if (!(h > 0.0)) throw InvalidParams("finite-difference step must be positive");
  std::vector<double> p(u.begin(), u.end());
  std::vector<double> g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = p[i];
    p[i] = ui + h;
    const double fp = loss(p);
    p[i] = ui - h;
    const double fm = loss(p);
    p[i] = ui;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct GradientCheck {
  bool ok = true;
  double worst_rel_error = 0.0;
};

/// Random interior point of the simplex, coordinates bounded away from 0.
inline std::vector<double> random_interior_point(Rng& rng, std::size_t n) {
  std::vector<double> u(n);
  double s = 0.0;
  for (auto& v : u) {
    v = rng.uniform(0.1, 1.0);
    s += v;
  }
  for (auto& v : u) v /= s;
  return u;
}

/// Compares analytic and central-difference gradients at n_points random
/// interior points: ||fd - g||_inf <= rel_tol * max(||g||_inf, 1e-3).
inline GradientCheck check_gradient(const Problem& p, int n_points, std::uint64_t seed,
                                    double rel_tol = 1e-5) {
  Rng rng(seed);
  GradientCheck out;
  for (int k = 0; k < n_points; ++k) {
    const std::size_t round = p.sequential ? static_cast<std::size_t>(k) % p.rounds : 0;
    const auto u = random_interior_point(rng, p.dim);
    const auto g = p.grad(u, round);
    const auto fd = finite_diff_grad([&](std::span<const double> x) { return p.loss(x, round); }, u);
    double diff = 0.0;
    double scale = 1e-3;
    for (std::size_t i = 0; i < g.size(); ++i) {
      diff = std::max(diff, std::abs(fd[i] - g[i]));
      scale = std::max(scale, std::abs(g[i]));
    }
    const double rel = diff / scale;
    out.worst_rel_error = std::max(out.worst_rel_error, rel);
    if (!(rel <= rel_tol)) out.ok = false;
  }
  return out;
}

/// Gradient check at registration; throws InvalidParams on mismatch.
inline Problem register_problem(Problem p) {
  if (p.dim == 0 || !p.loss || !p.grad) throw InvalidParams("incomplete problem definition");
  const auto check = check_gradient(p, 50, 0x5eed, 1e-5);
  if (!check.ok) {
    throw InvalidParams("problem '" + p.name + "' gradient disagrees with finite differences (" +
                        std::to_string(check.worst_rel_error) + ")");
  }
  return p;
}

namespace detail {

inline void require_interior(const SimplexPoint& p, double floor, const char* what) {
  if (p.min() < 10.0 * floor) {
    throw InvalidParams(std::string(what) + " must be interior (min coordinate >= 10*floor)");
  }
}

}  // namespace detail

/// L(u) = 0.5 ||u - w*||^2.
inline Problem quadratic_problem(const SimplexPoint& w_star, double floor = kDefaultFloor) {
  detail::require_interior(w_star, floor, "quadratic target");
  auto target = w_star.vec();
  Problem p;
  p.name = "quadratic";
  p.dim = target.size();
  p.loss = [target](std::span<const double> u, std::size_t) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - target[i]) * (u[i] - target[i]);
    return 0.5 * s;
  };
  p.grad = [target](std::span<const double> u, std::size_t) {
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = u[i] - target[i];
    return g;
  };
  p.known_minimizer = w_star;
  return register_problem(std::move(p));
}

/// L(u) = -sum p_i ln u_i, minimized on the simplex at u = p.
inline Problem cross_entropy_problem(const SimplexPoint& p_target, double floor = kDefaultFloor) {
  detail::require_interior(p_target, floor, "cross-entropy target");
  auto target = p_target.vec();
  Problem p;
  p.name = "cross_entropy";
  p.dim = target.size();
  p.loss = [target](std::span<const double> u, std::size_t) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i] > 0.0)) throw DomainError("cross-entropy undefined at the boundary");
      s -= target[i] * std::log(u[i]);
    }
    return s;
  };
  p.grad = [target](std::span<const double> u, std::size_t) {
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i] > 0.0)) throw DomainError("cross-entropy undefined at the boundary");
      g[i] = -target[i] / u[i];
    }
    return g;
  };
  p.known_minimizer = p_target;
  return register_problem(std::move(p));
}

/// L(u) = c^T u. No interior minimizer; used for gradient-oracle checks.
inline Problem linear_problem(std::vector<double> c) {
  Problem p;
  p.name = "linear";
  p.dim = c.size();
  p.loss = [c](std::span<const double> u, std::size_t) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += c[i] * u[i];
    return s;
  };
  p.grad = [c](std::span<const double>, std::size_t) { return c; };
  return register_problem(std::move(p));
}

/// Gross returns: one row per round, one column per asset.
struct Returns {
  std::vector<std::string> assets;
  std::vector<std::vector<double>> rows;

  bool operator==(const Returns&) const = default;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace detail

inline void validate_returns(const Returns& r) {
  if (r.assets.empty()) throw InvalidParams("returns need at least one asset");
  if (r.rows.empty()) throw InvalidParams("returns need at least one round");
  for (const auto& row : r.rows) {
    if (row.size() != r.assets.size()) throw InvalidParams("returns row has wrong width");
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParams("returns must be positive");
    }
  }
}

/// Header row of asset names, then one row of positive gross returns per round.
inline Returns parse_returns_csv(std::istream& in) {
  Returns r;
  std::string line;
  if (!std::getline(in, line)) throw InvalidParams("returns CSV is empty");
  r.assets = detail::split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    std::vector<double> row;
    for (const auto& cell : detail::split_csv_line(line)) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw InvalidParams("returns CSV line " + std::to_string(lineno) + ": bad number '" +
                            cell + "'");
      }
      row.push_back(v);
    }
    r.rows.push_back(std::move(row));
  }
  validate_returns(r);
  return r;
}

inline Returns read_returns_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open returns CSV " + path.string());
  return parse_returns_csv(in);
}

/// Two assets: a volatile one with gross return drawn uniformly from
/// [0.9, 1.2] and cash at 1.0.
inline Returns synthetic_returns(std::size_t rounds, std::uint64_t seed) {
  Rng rng(seed);
  Returns r;
  r.assets = {"risky", "cash"};
  for (std::size_t t = 0; t < rounds; ++t) r.rows.push_back({rng.uniform(0.9, 1.2), 1.0});
  return r;
}

/// Online portfolio: round t loss -ln(r_t^T u), gradient -r_t / (r_t^T u).
inline Problem portfolio_problem(Returns returns) {
  validate_returns(returns);
  auto rows = std::make_shared<const std::vector<std::vector<double>>>(std::move(returns.rows));
  Problem p;
  p.name = "portfolio";
  p.dim = returns.assets.size();
  p.sequential = true;
  p.rounds = rows->size();
  auto dot = [rows](std::span<const double> u, std::size_t t) {
    const auto& r = (*rows)[t];
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += r[i] * u[i];
    if (!(s > 0.0)) throw DomainError("portfolio return r^T u must be positive");
    return s;
  };
  p.loss = [dot](std::span<const double> u, std::size_t t) { return -std::log(dot(u, t)); };
  p.grad = [dot, rows](std::span<const double> u, std::size_t t) {
    const double s = dot(u, t);
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = -(*rows)[t][i] / s;
    return g;
  };
  return register_problem(std::move(p));
}

}  // namespace dmd
