// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmd/errors.hpp"
#include "dmd/inverse.hpp"
#include "dmd/link_family.hpp"
#include "dmd/problems.hpp"
#include "dmd/simplex.hpp"

namespace dmd {

enum class Variant { MD, MMD };
enum class Schedule { Constant, InvSqrt };

inline std::string_view to_string(Variant v) { return v == Variant::MD ? "md" : "mmd"; }
inline std::string_view to_string(Schedule s) {
  return s == Schedule::Constant ? "constant" : "inv_sqrt";
}

/// eta_t = eta0 (constant) or eta0 / sqrt(t), t >= 1.
struct LearningRate {
  double eta0 = 0.1;
  Schedule schedule = Schedule::Constant;

  double at(std::size_t t) const {
    if (schedule == Schedule::Constant) return eta0;
    return eta0 / std::sqrt(static_cast<double>(std::max<std::size_t>(t, 1)));
  }

  bool operator==(const LearningRate&) const = default;
};

struct DescentConfig {
  Variant variant = Variant::MD;
  LinkFamily family;
  LearningRate eta;
  std::size_t max_iters = 1000;
  double grad_tol = 1e-8;
  InversionSettings inversion;
  double floor = kDefaultFloor;
  bool normalize_loss = true;
  /// Use closed-form exponentials where the family has one.
  bool closed_form = true;
  /// Number of times a failing step may halve eta before the run aborts.
  int max_halvings = 5;

  void validate(std::size_t dim) const {
    family.require_valid();
    inversion.validate();
    if (!(eta.eta0 > 0.0) || !std::isfinite(eta.eta0)) throw InvalidParams("eta must be > 0");
    if (max_iters < 1) throw InvalidParams("max_iters must be >= 1");
    if (!(grad_tol >= 0.0)) throw InvalidParams("grad_tol must be >= 0");
    if (!(floor > 0.0) || !(floor * static_cast<double>(dim) < 1.0)) {
      throw InvalidParams("floor must satisfy 0 < floor < 1/N");
    }
    if (max_halvings < 0) throw InvalidParams("max_halvings must be >= 0");
  }
};

struct TraceRecord {
  std::size_t t = 0;
  std::vector<double> w;
  double loss = 0.0;
  double grad_norm = 0.0;  // l-inf of the tangent-projected gradient
  bool step_accepted = true;  // false when eta had to be halved
  int inversion_iters = 0;
  double eta = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  bool converged = false;
  std::string stop_reason;

  const TraceRecord& last() const { return records.back(); }
  std::size_t iterations() const { return records.empty() ? 0 : records.back().t; }
};

/// Run aborted after the retry policy gave up. Carries the partial trace.
class RunFailure : public Error {
 public:
  RunFailure(const std::string& what, Trace partial, std::string kind)
      : Error(what),
        partial_(std::make_shared<const Trace>(std::move(partial))),
        kind_(std::move(kind)) {}

  const Trace& partial_trace() const { return *partial_; }
  /// Name of the underlying error class, e.g. "StepFailure".
  const std::string& kind() const { return kind_; }

 private:
  std::shared_ptr<const Trace> partial_;
  std::string kind_;
};

struct GMultiplyResult {
  std::vector<double> x;
  int inversion_iters = 0;
};

/// Componentwise exp_G(log_G(x_i) + y_i).
inline GMultiplyResult g_multiply(const LinkFamily& fam, std::span<const double> x,
                                  std::span<const double> y, const InversionSettings& settings = {},
                                  bool closed_form = true) {
  if (x.size() != y.size()) throw LengthMismatch("g_multiply: x and y differ in length");
  GMultiplyResult out;
  out.x.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw DomainError("g_multiply requires positive x");
    if (y[i] == 0.0) {
      out.x[i] = x[i];
      continue;
    }
    const auto r = exp_eval(fam, log_eval(fam, x[i]) + y[i], settings, closed_form);
    out.x[i] = r.x;
    out.inversion_iters += r.iterations;
  }
  return out;
}

/// Gradient of L(w / sum w) at w: (1/s) (g - (u.g) 1) with u = w/s, g = grad L(u).
inline std::vector<double> normalized_grad(
    const std::function<std::vector<double>(std::span<const double>)>& loss_grad,
    std::span<const double> w) {
  double s = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw DomainError("normalized_grad requires positive w");
    s += v;
  }
  std::vector<double> u(w.begin(), w.end());
  for (double& v : u) v /= s;
  auto g = loss_grad(u);
  if (g.size() != u.size()) throw LengthMismatch("gradient has wrong length");
  double ug = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) ug += u[i] * g[i];
  for (double& v : g) v = (v - ug) / s;
  return g;
}

/// l-inf norm of g minus its mean.
inline double tangent_norm(std::span<const double> g) {
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(g.size());
  double n = 0.0;
  for (double v : g) n = std::max(n, std::abs(v - mean));
  return n;
}

struct StepResult {
  SimplexPoint w;
  int inversion_iters = 0;
};

namespace detail {

inline bool all_zero(std::span<const double> g) {
  return std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
}

inline void check_step_args(const SimplexPoint& w, std::span<const double> grad, double eta) {
  if (grad.size() != w.size()) throw LengthMismatch("gradient and weights differ in length");
  for (double g : grad) {
    if (!std::isfinite(g)) throw StepFailure("non-finite gradient");
  }
  if (!(eta > 0.0)) throw InvalidParams("step size must be > 0");
}

}  // namespace detail

/// Mirror step: w~ = w (x)_G exp_G(-eta grad), then projection onto the floored simplex.
inline StepResult md_step(const DescentConfig& cfg, const SimplexPoint& w_t,
                          std::span<const double> grad, double eta_t) {
  detail::check_step_args(w_t, grad, eta_t);
  if (detail::all_zero(grad)) return {w_t, 0};
  std::vector<double> y(grad.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = -eta_t * grad[i];
  GMultiplyResult m;
  try {
    m = g_multiply(cfg.family, w_t.weights(), y, cfg.inversion, cfg.closed_form);
  } catch (const BracketError& e) {
    throw StepFailure(std::string("inversion out of range: ") + e.what());
  } catch (const NoConvergence& e) {
    throw StepFailure(std::string("inversion failed: ") + e.what());
  } catch (const DomainError& e) {
    throw StepFailure(std::string("exponential undefined: ") + e.what());
  }
  for (double v : m.x) {
    if (!std::isfinite(v)) throw StepFailure("non-finite component after mirror step");
  }
  return {project_to_simplex(std::move(m.x), cfg.floor), m.inversion_iters};
}

/// Mirror-less step: w~_i = [w_i - eta grad_i / log'(w_i)]_+, then projection.
inline StepResult mmd_step(const DescentConfig& cfg, const SimplexPoint& w_t,
                           std::span<const double> grad, double eta_t) {
  detail::check_step_args(w_t, grad, eta_t);
  if (detail::all_zero(grad)) return {w_t, 0};
  std::vector<double> v(grad.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = dlog_eval(cfg.family, w_t[i]);
    if (!(d > 0.0) || !std::isfinite(d)) throw StepFailure("non-positive log derivative");
    v[i] = std::max(w_t[i] - eta_t * grad[i] / d, 0.0);
  }
  return {project_to_simplex(std::move(v), cfg.floor), 0};
}

/// Iterates the configured update from w0.
///
/// Batch problems stop when the tangent-projected gradient drops to grad_tol
/// or after max_iters steps. Sequential problems consume one round per step
/// and stop after min(rounds, max_iters) rounds; record t holds the weights
/// played in round t and that round's loss.
///
/// A step that fails (inversion out of range, all mass clipped, non-finite
/// loss) is retried with eta halved, up to cfg.max_halvings times; after that
/// RunFailure is thrown with the trace so far.
inline Trace run(const DescentConfig& cfg, const Problem& problem, const SimplexPoint& w0) {
  if (w0.size() != problem.dim) throw LengthMismatch("w0 dimension does not match the problem");
  cfg.validate(problem.dim);

  Trace trace;
  const auto step = cfg.variant == Variant::MD ? md_step : mmd_step;

  auto direction = [&](const SimplexPoint& w, std::size_t round) {
    auto raw = [&](std::span<const double> u) { return problem.grad(u, round); };
    if (cfg.normalize_loss) return normalized_grad(raw, w.weights());
    return raw(w.weights());
  };
  auto fail = [&](const std::string& kind, const std::string& msg) {
    trace.stop_reason = kind;
    throw RunFailure(msg, trace, kind);
  };

  SimplexPoint w = w0;
  const std::size_t limit = problem.sequential ? std::min(problem.rounds, cfg.max_iters)
                                               : cfg.max_iters;
  double loss = problem.loss(w.weights(), 0);
  if (!std::isfinite(loss)) fail("StepFailure", "non-finite loss at the initial point");
  auto g = direction(w, 0);
  trace.records.push_back({0, w.vec(), loss, tangent_norm(g), true, 0, 0.0});

  for (std::size_t t = 0;; ++t) {
    if (!problem.sequential && trace.records.back().grad_norm <= cfg.grad_tol) {
      trace.converged = true;
      trace.stop_reason = "grad_tol";
      return trace;
    }
    if (problem.sequential ? t + 1 >= limit : t >= limit) break;

    const std::size_t next_round = problem.sequential ? t + 1 : 0;
    double eta = cfg.eta.at(t + 1);
    std::string last_kind;
    std::string last_msg;
    bool done = false;
    for (int h = 0; h <= cfg.max_halvings && !done; ++h, eta *= 0.5) {
      try {
        auto r = step(cfg, w, g, eta);
        const double next_loss = problem.loss(r.w.weights(), next_round);
        if (!std::isfinite(next_loss)) throw StepFailure("non-finite loss after step");
        auto next_g = direction(r.w, next_round);
        w = std::move(r.w);
        g = std::move(next_g);
        trace.records.push_back(
            {t + 1, w.vec(), next_loss, tangent_norm(g), h == 0, r.inversion_iters, eta});
        done = true;
      } catch (const StepFailure& e) {
        last_kind = "StepFailure";
        last_msg = e.what();
      } catch (const DegenerateState& e) {
        last_kind = "DegenerateState";
        last_msg = e.what();
      } catch (const DomainError& e) {
        last_kind = "StepFailure";
        last_msg = e.what();
      }
    }
    if (!done) {
      fail(last_kind, "step " + std::to_string(t + 1) + " failed after " +
                          std::to_string(cfg.max_halvings) + " halvings: " + last_msg);
    }
  }
  trace.converged = problem.sequential;
  trace.stop_reason = problem.sequential ? "rounds" : "max_iters";
  return trace;
}

/// sum_t ln(r_t . u_t) for a portfolio trace (the negated per-round losses).
inline double cumulative_log_wealth(const Trace& trace) {
  double s = 0.0;
  for (const auto& r : trace.records) s -= r.loss;
  return s;
}

}  // namespace dmd
