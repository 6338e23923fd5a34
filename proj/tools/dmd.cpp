// SPDX-License-Identifier: Apache-2.0
// dmd: run, sweep and validate mirror-descent experiments from JSON configs.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dmd/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
};

/// --out beats DMD_OUTPUT_DIR, which beats the config's "output".
dmd::fs::path output_dir(const Options& o, const dmd::ExperimentConfig& cfg) {
  if (o.out) return *o.out;
  if (const char* env = std::getenv("DMD_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return cfg.output;
}

dmd::ExperimentConfig load(const Options& o) {
  auto cfg = dmd::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int print_families() {
  for (const auto& e : dmd::catalog()) {
    std::cout << e.tag << "\n  ranges:   " << e.ranges << "\n  defaults: " << e.defaults.describe()
              << '\n';
  }
  return dmd::kExitOk;
}

int do_validate(const Options& o) {
  const auto cfg = load(o);
  dmd::build_setup(cfg);
  std::cout << "ok: " << cfg.name << " (" << dmd::make_family(cfg.family).describe() << ", "
            << dmd::sweep_points(cfg).size() << " run(s))\n";
  return dmd::kExitOk;
}

int do_run(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o, cfg);
  const int code = dmd::run_experiment(cfg, dir, std::cerr);
  if (code == dmd::kExitOk) std::cout << "wrote " << (dir / (cfg.name + ".trace.csv")).string() << '\n';
  return code;
}

int do_sweep(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o, cfg);
  const unsigned jobs = o.jobs > 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  const auto result = dmd::execute_sweep(cfg, dir, jobs);
  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.error.empty() ? 0 : 1;
  std::cout << "wrote " << (dir / (cfg.name + ".sweep.csv")).string() << " (" << result.rows.size()
            << " runs, " << failed << " failed)\n";
  return dmd::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror descent with deformed-logarithm link functions"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opts.seed, "Override the config seed");
  };
  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);
  run->add_option("--out", opts.out, "Output directory (overrides DMD_OUTPUT_DIR)");
  auto* sweep = app.add_subcommand("sweep", "Run the config's parameter grid");
  add_common(sweep);
  sweep->add_option("--out", opts.out, "Output directory (overrides DMD_OUTPUT_DIR)");
  sweep->add_option("--jobs", opts.jobs, "Concurrent runs (default: hardware threads)");
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  add_common(validate);
  app.add_subcommand("families", "List link families with parameter ranges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dmd::kExitOk : dmd::kExitConfig;
  }

  try {
    if (*run) return do_run(opts);
    if (*sweep) return do_sweep(opts);
    if (*validate) return do_validate(opts);
    return print_families();
  } catch (const dmd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dmd::kExitConfig;
  } catch (const dmd::InvalidParams& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dmd::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return dmd::kExitRuntime;
  }
}
