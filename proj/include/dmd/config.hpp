// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmd/descent.hpp"
#include "dmd/errors.hpp"
#include "dmd/generating_function.hpp"
#include "dmd/link_family.hpp"

namespace dmd {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kDefaultSweepCap = 10000;

/// Generating function for the tempesta family, by catalog name.
struct PhiSpec {
  std::string name = "reciprocal";
  std::map<std::string, double> params;

  bool operator==(const PhiSpec&) const = default;
};

struct FamilySpec {
  std::string tag = "natural";
  std::map<std::string, double> params;
  std::string h = "arctan";  // htg_general only
  PhiSpec phi;               // tempesta only

  bool operator==(const FamilySpec&) const = default;
};

/// Problem by name. Targets left empty are drawn from the seed with `dim`
/// coordinates; portfolio returns come from `returns_csv`, the inline
/// `returns` matrix, or `synthetic_rounds` seeded draws, in that order.
struct ProblemSpec {
  std::string name = "quadratic";
  std::vector<double> target;
  std::size_t dim = 0;
  std::string returns_csv;
  std::vector<std::vector<double>> returns;
  std::size_t synthetic_rounds = 0;

  bool operator==(const ProblemSpec&) const = default;
};

struct SweepGrid {
  std::string param;  // "family.<p>", "phi.<p>", "eta", "max_iters", "grad_tol"
  std::vector<double> values;

  bool operator==(const SweepGrid&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  FamilySpec family;
  Variant variant = Variant::MD;
  LearningRate eta{0.5, Schedule::Constant};
  std::size_t max_iters = 5000;
  double grad_tol = 1e-8;
  double floor = kDefaultFloor;
  bool normalize_loss = true;
  bool closed_form = true;
  InversionSettings inversion;
  std::string init = "uniform";  // or "random"
  std::uint64_t seed = 0;
  std::vector<SweepGrid> sweep;
  std::size_t sweep_cap = kDefaultSweepCap;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline Variant parse_variant(const std::string& s) {
  if (s == "md") return Variant::MD;
  if (s == "mmd") return Variant::MMD;
  throw ConfigError("variant must be 'md' or 'mmd', got '" + s + "'");
}

inline Schedule parse_schedule(const std::string& s) {
  if (s == "constant") return Schedule::Constant;
  if (s == "inv_sqrt") return Schedule::InvSqrt;
  throw ConfigError("schedule must be 'constant' or 'inv_sqrt', got '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read_opt;
  detail::reject_unknown(j,
                         {"schema_version", "name", "problem", "family", "optimizer", "init", "seed",
                          "sweep", "output"},
                         "config");
  if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
  int version = 0;
  read_opt(j, "schema_version", version, "config");
  if (version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }

  ExperimentConfig c;
  read_opt(j, "name", c.name, "config");
  read_opt(j, "init", c.init, "config");
  read_opt(j, "seed", c.seed, "config");
  read_opt(j, "output", c.output, "config");

  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    detail::reject_unknown(p, {"name", "target", "dim", "returns_csv", "returns", "synthetic_rounds"},
                           "problem");
    read_opt(p, "name", c.problem.name, "problem");
    read_opt(p, "target", c.problem.target, "problem");
    read_opt(p, "dim", c.problem.dim, "problem");
    read_opt(p, "returns_csv", c.problem.returns_csv, "problem");
    read_opt(p, "returns", c.problem.returns, "problem");
    read_opt(p, "synthetic_rounds", c.problem.synthetic_rounds, "problem");
  }

  if (j.contains("family")) {
    const auto& f = j.at("family");
    detail::reject_unknown(f, {"tag", "params", "h", "phi"}, "family");
    read_opt(f, "tag", c.family.tag, "family");
    read_opt(f, "params", c.family.params, "family");
    read_opt(f, "h", c.family.h, "family");
    if (f.contains("phi")) {
      const auto& ph = f.at("phi");
      detail::reject_unknown(ph, {"name", "params"}, "family.phi");
      read_opt(ph, "name", c.family.phi.name, "family.phi");
      read_opt(ph, "params", c.family.phi.params, "family.phi");
    }
  }

  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::reject_unknown(o,
                           {"variant", "eta", "schedule", "max_iters", "grad_tol", "floor",
                            "normalize_loss", "closed_form", "inversion"},
                           "optimizer");
    std::string variant = "md";
    std::string schedule = "constant";
    read_opt(o, "variant", variant, "optimizer");
    read_opt(o, "schedule", schedule, "optimizer");
    c.variant = detail::parse_variant(variant);
    c.eta.schedule = detail::parse_schedule(schedule);
    read_opt(o, "eta", c.eta.eta0, "optimizer");
    read_opt(o, "max_iters", c.max_iters, "optimizer");
    read_opt(o, "grad_tol", c.grad_tol, "optimizer");
    read_opt(o, "floor", c.floor, "optimizer");
    read_opt(o, "normalize_loss", c.normalize_loss, "optimizer");
    read_opt(o, "closed_form", c.closed_form, "optimizer");
    if (o.contains("inversion")) {
      const auto& in = o.at("inversion");
      detail::reject_unknown(
          in, {"rel_tol", "abs_tol", "max_iters", "bracket_lo", "bracket_hi", "series_order"},
          "optimizer.inversion");
      auto& s = c.inversion;
      read_opt(in, "rel_tol", s.rel_tol, "optimizer.inversion");
      read_opt(in, "abs_tol", s.abs_tol, "optimizer.inversion");
      read_opt(in, "max_iters", s.max_iters, "optimizer.inversion");
      read_opt(in, "bracket_lo", s.bracket_lo, "optimizer.inversion");
      read_opt(in, "bracket_hi", s.bracket_hi, "optimizer.inversion");
      read_opt(in, "series_order", s.series_order, "optimizer.inversion");
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    detail::reject_unknown(s, {"grids", "cap"}, "sweep");
    read_opt(s, "cap", c.sweep_cap, "sweep");
    if (s.contains("grids")) {
      if (!s.at("grids").is_array()) throw ConfigError("sweep.grids must be a list");
      for (const auto& g : s.at("grids")) {
        detail::reject_unknown(g, {"param", "values"}, "sweep.grids[]");
        SweepGrid grid;
        read_opt(g, "param", grid.param, "sweep.grids[]");
        read_opt(g, "values", grid.values, "sweep.grids[]");
        c.sweep.push_back(std::move(grid));
      }
    }
  }
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = c.name;
  j["problem"] = {{"name", c.problem.name},
                  {"target", c.problem.target},
                  {"dim", c.problem.dim},
                  {"returns_csv", c.problem.returns_csv},
                  {"returns", c.problem.returns},
                  {"synthetic_rounds", c.problem.synthetic_rounds}};
  j["family"] = {{"tag", c.family.tag},
                 {"params", c.family.params},
                 {"h", c.family.h},
                 {"phi", {{"name", c.family.phi.name}, {"params", c.family.phi.params}}}};
  const auto& s = c.inversion;
  j["optimizer"] = {{"variant", std::string(to_string(c.variant))},
                    {"eta", c.eta.eta0},
                    {"schedule", std::string(to_string(c.eta.schedule))},
                    {"max_iters", c.max_iters},
                    {"grad_tol", c.grad_tol},
                    {"floor", c.floor},
                    {"normalize_loss", c.normalize_loss},
                    {"closed_form", c.closed_form},
                    {"inversion",
                     {{"rel_tol", s.rel_tol},
                      {"abs_tol", s.abs_tol},
                      {"max_iters", s.max_iters},
                      {"bracket_lo", s.bracket_lo},
                      {"bracket_hi", s.bracket_hi},
                      {"series_order", s.series_order}}}};
  j["init"] = c.init;
  j["seed"] = c.seed;
  auto grids = nlohmann::json::array();
  for (const auto& g : c.sweep) grids.push_back({{"param", g.param}, {"values", g.values}});
  j["sweep"] = {{"grids", grids}, {"cap", c.sweep_cap}};
  j["output"] = c.output;
  return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& c) {
  return config_to_json(c).dump(2) + "\n";
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

namespace detail {

using Binding = std::pair<const char*, double*>;

inline void bind_params(const std::map<std::string, double>& given,
                        std::initializer_list<Binding> fields, const std::string& owner) {
  for (const auto& [k, v] : given) {
    double* slot = nullptr;
    for (const auto& [name, ptr] : fields) {
      if (k == name) slot = ptr;
    }
    if (slot == nullptr) {
      std::string names;
      for (const auto& [name, ptr] : fields) names += std::string(names.empty() ? "" : ", ") + name;
      throw ConfigError(owner + " has no parameter '" + k + "' (expected: " +
                        (names.empty() ? "none" : names) + ")");
    }
    *slot = v;
  }
}

inline double need(const std::map<std::string, double>& m, const char* key,
                   const std::string& owner) {
  auto it = m.find(key);
  if (it == m.end()) throw ConfigError(owner + " needs parameter '" + key + "'");
  return it->second;
}

inline void only_keys(const std::map<std::string, double>& m, std::initializer_list<const char*> keys,
                      const std::string& owner) {
  for (const auto& [k, v] : m) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw ConfigError(owner + " has no parameter '" + k + "'");
  }
}

}  // namespace detail

/// Catalog generating function by name; every parameter must be given.
inline GeneratingFunction make_phi(const PhiSpec& s) {
  const std::string owner = "phi '" + s.name + "'";
  const auto& p = s.params;
  using detail::need;
  using detail::only_keys;
  if (s.name == "reciprocal") {
    only_keys(p, {}, owner);
    return phi::reciprocal();
  }
  if (s.name == "linear") {
    only_keys(p, {"a", "c"}, owner);
    return phi::linear(need(p, "a", owner), need(p, "c", owner));
  }
  if (s.name == "kaniadakis_three") {
    only_keys(p, {"kappa", "r", "lambda"}, owner);
    return phi::kaniadakis_three(need(p, "kappa", owner), need(p, "r", owner),
                                 need(p, "lambda", owner));
  }
  if (s.name == "htg") {
    only_keys(p, {"a", "b"}, owner);
    return phi::htg(need(p, "a", owner), need(p, "b", owner));
  }
  if (s.name == "power_pair") {
    only_keys(p, {"lambda1", "a", "lambda2", "b", "c"}, owner);
    return phi::power_pair(need(p, "lambda1", owner), need(p, "a", owner),
                           need(p, "lambda2", owner), need(p, "b", owner), need(p, "c", owner));
  }
  throw ConfigError("unknown generating function '" + s.name +
                    "' (expected reciprocal, linear, kaniadakis_three, htg, power_pair)");
}

/// Builds the family named by s.tag; missing parameters take the catalog
/// defaults. Does not validate ranges (see LinkFamily::violations()).
inline LinkFamily make_family(const FamilySpec& s) {
  const std::string owner = "family '" + s.tag + "'";
  using detail::bind_params;
  if (s.tag == "natural") {
    bind_params(s.params, {}, owner);
    return LinkFamily::natural();
  }
  if (s.tag == "identity") {
    bind_params(s.params, {}, owner);
    return LinkFamily::identity();
  }
  if (s.tag == "tsallis") {
    family::Tsallis f;
    bind_params(s.params, {{"q", &f.q}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "kaniadakis") {
    family::Kaniadakis f;
    bind_params(s.params, {{"kappa", &f.kappa}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "ext_kaniadakis") {
    family::ExtKaniadakis f;
    bind_params(s.params, {{"alpha", &f.alpha}, {"sigma", &f.sigma}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "kls") {
    family::KLS f;
    bind_params(s.params, {{"kappa", &f.kappa}, {"r", &f.r}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "three_param") {
    family::ThreeParam f;
    bind_params(s.params, {{"kappa", &f.kappa}, {"r", &f.r}, {"lambda", &f.lambda}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "htg") {
    family::HTG f;
    bind_params(s.params, {{"a", &f.a}, {"b", &f.b}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "htg_general") {
    family::HTGGeneral f;
    bind_params(s.params, {{"a", &f.a}, {"b", &f.b}}, owner);
    if (s.h == "tanh") {
      f.h = HKind::Tanh;
    } else if (s.h == "arctan") {
      f.h = HKind::Arctan;
    } else {
      throw ConfigError("htg_general h must be 'tanh' or 'arctan', got '" + s.h + "'");
    }
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "ks") {
    family::KS f;
    bind_params(s.params, {{"kappa", &f.kappa}, {"lambda", &f.lambda}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "euler") {
    family::Euler f;
    bind_params(s.params, {{"a", &f.a}, {"b", &f.b}}, owner);
    return LinkFamily(FamilyVariant(f));
  }
  if (s.tag == "tempesta") {
    family::Tempesta f;
    bind_params(s.params, {{"alpha", &f.alpha}, {"sigma", &f.sigma}}, owner);
    f.phi = make_phi(s.phi);
    return LinkFamily(FamilyVariant(f));
  }
  throw ConfigError("unknown family tag '" + s.tag + "'");
}

/// Sets one swept parameter on a copy of the config.
inline ExperimentConfig apply_override(ExperimentConfig c, const std::string& param, double value) {
  if (param.rfind("family.", 0) == 0) {
    c.family.params[param.substr(7)] = value;
  } else if (param.rfind("phi.", 0) == 0) {
    c.family.phi.params[param.substr(4)] = value;
  } else if (param == "eta") {
    c.eta.eta0 = value;
  } else if (param == "grad_tol") {
    c.grad_tol = value;
  } else if (param == "max_iters") {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw ConfigError("max_iters sweep values must be positive integers");
    }
    c.max_iters = static_cast<std::size_t>(value);
  } else {
    throw ConfigError("cannot sweep '" + param +
                      "' (expected family.<p>, phi.<p>, eta, grad_tol or max_iters)");
  }
  return c;
}

/// Throws ConfigError naming the first problem found.
inline void validate_config(const ExperimentConfig& c) {
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name must be non-empty and contain no path separators");
  }
  const auto fam = make_family(c.family);
  if (!fam.valid()) {
    throw ConfigError("invalid parameters for " + fam.describe() + ": " + fam.violations().front());
  }
  if (!(c.eta.eta0 > 0.0) || !std::isfinite(c.eta.eta0)) throw ConfigError("eta must be > 0");
  if (c.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(c.grad_tol >= 0.0)) throw ConfigError("grad_tol must be >= 0");
  if (!(c.floor > 0.0)) throw ConfigError("floor must be > 0");
  if (c.init != "uniform" && c.init != "random") {
    throw ConfigError("init must be 'uniform' or 'random', got '" + c.init + "'");
  }
  try {
    c.inversion.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  const auto& p = c.problem;
  if (p.name == "quadratic" || p.name == "cross_entropy") {
    if (p.target.empty() && p.dim < 2) throw ConfigError("problem needs a target or dim >= 2");
    if (!p.target.empty() && p.dim != 0 && p.dim != p.target.size()) {
      throw ConfigError("problem.dim disagrees with the target length");
    }
  } else if (p.name == "portfolio") {
    if (p.returns_csv.empty() && p.returns.empty() && p.synthetic_rounds == 0) {
      throw ConfigError("portfolio needs returns_csv, returns or synthetic_rounds");
    }
  } else {
    throw ConfigError("unknown problem '" + p.name +
                      "' (expected quadratic, cross_entropy, portfolio)");
  }
  std::size_t combos = 1;
  for (const auto& g : c.sweep) {
    if (g.values.empty()) throw ConfigError("sweep grid '" + g.param + "' has no values");
    combos *= g.values.size();
    if (combos > c.sweep_cap) {
      throw ConfigError("sweep has more than " + std::to_string(c.sweep_cap) + " combinations");
    }
    apply_override(c, g.param, g.values.front());
  }
}

}  // namespace dmd
