// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dmd/config.hpp"
#include "dmd/descent.hpp"
#include "dmd/errors.hpp"
#include "dmd/problems.hpp"
#include "dmd/rng.hpp"

namespace dmd {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Everything a run needs, resolved from a config.
struct Setup {
  Problem problem;
  SimplexPoint w0;
  DescentConfig descent;
};

/// Resolves the problem, initial point and optimizer settings. Randomized
/// pieces (drawn target, random start, synthetic returns) use cfg.seed only.
inline Setup build_setup(const ExperimentConfig& cfg) {
  validate_config(cfg);
  Rng rng(cfg.seed);
  const auto& ps = cfg.problem;
  Problem problem;
  if (ps.name == "portfolio") {
    Returns r;
    if (!ps.returns_csv.empty()) {
      r = read_returns_csv(ps.returns_csv);
    } else if (!ps.returns.empty()) {
      r.rows = ps.returns;
      for (std::size_t i = 0; i < r.rows.front().size(); ++i) {
        r.assets.push_back("asset" + std::to_string(i + 1));
      }
    } else {
      r = synthetic_returns(ps.synthetic_rounds, cfg.seed);
    }
    problem = portfolio_problem(std::move(r));
  } else {
    const auto target = ps.target.empty() ? SimplexPoint(random_interior_point(rng, ps.dim))
                                          : SimplexPoint::normalized(ps.target);
    problem = ps.name == "quadratic" ? quadratic_problem(target, cfg.floor)
                                     : cross_entropy_problem(target, cfg.floor);
  }
  SimplexPoint w0 = cfg.init == "random" ? SimplexPoint(random_interior_point(rng, problem.dim))
                                         : SimplexPoint::uniform(problem.dim);

  DescentConfig d;
  d.variant = cfg.variant;
  d.family = make_family(cfg.family);
  d.eta = cfg.eta;
  d.max_iters = cfg.max_iters;
  d.grad_tol = cfg.grad_tol;
  d.inversion = cfg.inversion;
  d.floor = cfg.floor;
  d.normalize_loss = cfg.normalize_loss;
  d.closed_form = cfg.closed_form;
  try {
    d.validate(problem.dim);
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return {std::move(problem), std::move(w0), std::move(d)};
}

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Columns t, loss, grad_norm, w_1..w_N.
inline std::string trace_csv(const Trace& trace) {
  std::string s = "t,loss,grad_norm";
  const std::size_t n = trace.records.empty() ? 0 : trace.records.front().w.size();
  for (std::size_t i = 1; i <= n; ++i) s += ",w_" + std::to_string(i);
  s += '\n';
  for (const auto& r : trace.records) {
    s += std::to_string(r.t);
    s += ',' + format_double(r.loss);
    s += ',' + format_double(r.grad_norm);
    for (double w : r.w) s += ',' + format_double(w);
    s += '\n';
  }
  return s;
}

struct RunSummary {
  std::vector<double> point;  // swept values, in grid order
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  bool converged = false;
  double linf_error = std::numeric_limits<double>::quiet_NaN();
  double log_wealth = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success, else the error class name
  std::string message;
  std::string trace_file;
  double wall_seconds = 0.0;
};

inline std::string error_tag(const std::exception& e) {
  if (const auto* f = dynamic_cast<const RunFailure*>(&e)) return f->kind();
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const InvalidParams*>(&e)) return "InvalidParams";
  if (dynamic_cast<const NoConvergence*>(&e)) return "NoConvergence";
  if (dynamic_cast<const DegenerateState*>(&e)) return "DegenerateState";
  if (dynamic_cast<const StepFailure*>(&e)) return "StepFailure";
  if (dynamic_cast<const BracketError*>(&e)) return "BracketError";
  if (dynamic_cast<const QuadratureFailure*>(&e)) return "QuadratureFailure";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const LengthMismatch*>(&e)) return "LengthMismatch";
  return "Error";
}

namespace detail {

inline void fill_from_trace(RunSummary& s, const Trace& trace, const Setup& setup) {
  if (trace.records.empty()) return;
  const auto& last = trace.last();
  s.final_loss = last.loss;
  s.iterations = last.t;
  if (setup.problem.known_minimizer) {
    double e = 0.0;
    for (std::size_t i = 0; i < last.w.size(); ++i) {
      e = std::max(e, std::abs(last.w[i] - (*setup.problem.known_minimizer)[i]));
    }
    s.linf_error = e;
  }
  if (setup.problem.sequential) s.log_wealth = cumulative_log_wealth(trace);
}

}  // namespace detail

/// One optimizer run; the trace (partial on failure) is written to
/// trace_path. Setup errors are reported with an empty trace.
inline RunSummary execute_run(const ExperimentConfig& cfg, const fs::path& trace_path) {
  RunSummary s;
  s.trace_file = trace_path.filename().string();
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    s.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  std::optional<Setup> setup;
  try {
    setup.emplace(build_setup(cfg));
  } catch (const std::exception& e) {
    s.error = error_tag(e);
    s.message = e.what();
    write_atomic(trace_path, trace_csv({}));
    finish();
    return s;
  }
  try {
    const Trace trace = run(setup->descent, setup->problem, setup->w0);
    write_atomic(trace_path, trace_csv(trace));
    detail::fill_from_trace(s, trace, *setup);
    s.converged = trace.converged;
  } catch (const RunFailure& e) {
    write_atomic(trace_path, trace_csv(e.partial_trace()));
    detail::fill_from_trace(s, e.partial_trace(), *setup);
    s.error = e.kind();
    s.message = e.what();
  } catch (const Error& e) {
    write_atomic(trace_path, trace_csv({}));
    s.error = error_tag(e);
    s.message = e.what();
  }
  finish();
  return s;
}

namespace detail {

inline std::string summary_fields(const RunSummary& s) {
  return format_double(s.final_loss) + ',' + std::to_string(s.iterations) + ',' +
         (s.converged ? "true" : "false") + ',' + format_double(s.linf_error) + ',' +
         format_double(s.log_wealth) + ',' + s.error + ',' + s.trace_file + ',' +
         format_double(s.wall_seconds);
}

inline constexpr const char* kSummaryColumns =
    "final_loss,iterations,converged,linf_error,log_wealth,error,trace_file,wall_time_s";

}  // namespace detail

inline std::string summary_csv(const RunSummary& s) {
  return std::string(detail::kSummaryColumns) + '\n' + detail::summary_fields(s) + '\n';
}

/// Single run: writes <name>.trace.csv and <name>.summary.csv under out_dir.
/// Returns kExitOk, kExitConfig or kExitRuntime; diagnostics go to err.
inline int run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& err) {
  try {
    build_setup(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "config error: " << error_tag(e) << ": " << e.what() << '\n';
    return kExitConfig;
  }
  const auto s = execute_run(cfg, out_dir / (cfg.name + ".trace.csv"));
  write_atomic(out_dir / (cfg.name + ".summary.csv"), summary_csv(s));
  if (!s.error.empty()) {
    err << "runtime failure: " << s.error << ": " << s.message << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

/// Cartesian product of the sweep grids, last grid varying fastest.
inline std::vector<std::vector<double>> sweep_points(const ExperimentConfig& cfg) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& g : cfg.sweep) {
    std::vector<std::vector<double>> next;
    next.reserve(points.size() * g.values.size());
    for (const auto& p : points) {
      for (double v : g.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

/// Orders rows by final loss, then iterations, then swept values. Failed
/// runs sort after every successful one.
inline std::vector<std::size_t> rank_runs(const std::vector<RunSummary>& rows) {
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key_loss = [](const RunSummary& r) {
    return r.error.empty() && std::isfinite(r.final_loss) ? r.final_loss
                                                          : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = rows[a];
    const auto& rb = rows[b];
    const bool fa = !ra.error.empty();
    const bool fb = !rb.error.empty();
    if (fa != fb) return fb;
    if (key_loss(ra) != key_loss(rb)) return key_loss(ra) < key_loss(rb);
    if (ra.iterations != rb.iterations) return ra.iterations < rb.iterations;
    return ra.point < rb.point;
  });
  return order;
}

struct SweepOutcome {
  std::vector<RunSummary> rows;  // grid order
  std::vector<std::size_t> ranking;
};

/// Runs every grid point on up to `jobs` threads. Each point writes
/// <name>_<index>.trace.csv; the ranked table goes to <name>.sweep.csv.
inline SweepOutcome execute_sweep(const ExperimentConfig& cfg, const fs::path& out_dir,
                                  unsigned jobs) {
  validate_config(cfg);
  const auto points = sweep_points(cfg);
  const std::size_t width = std::to_string(points.size() - 1).size();
  SweepOutcome out;
  out.rows.resize(points.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      ExperimentConfig point_cfg = cfg;
      point_cfg.sweep.clear();
      for (std::size_t k = 0; k < cfg.sweep.size(); ++k) {
        point_cfg = apply_override(std::move(point_cfg), cfg.sweep[k].param, points[i][k]);
      }
      std::string idx = std::to_string(i);
      idx.insert(0, width - idx.size(), '0');
      auto row = execute_run(point_cfg, out_dir / (cfg.name + "_" + idx + ".trace.csv"));
      row.point = points[i];
      out.rows[i] = std::move(row);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  out.ranking = rank_runs(out.rows);
  std::string csv = "rank,index";
  for (const auto& g : cfg.sweep) csv += ',' + g.param;
  csv += ',' + std::string(detail::kSummaryColumns) + '\n';
  for (std::size_t r = 0; r < out.ranking.size(); ++r) {
    const auto i = out.ranking[r];
    csv += std::to_string(r + 1) + ',' + std::to_string(i);
    for (double v : out.rows[i].point) csv += ',' + format_double(v);
    csv += ',' + detail::summary_fields(out.rows[i]) + '\n';
  }
  write_atomic(out_dir / (cfg.name + ".sweep.csv"), csv);
  return out;
}

}  // namespace dmd
