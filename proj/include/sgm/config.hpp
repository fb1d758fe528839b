#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgm/lemma_sim.hpp"
#include "sgm/runner.hpp"

namespace sgm {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

/// Stable 64-bit FNV-1a over the canonical (key-sorted) dump; identifies a
/// config in every output file.
inline std::string digest(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace cfg_detail {

inline void require_keys(const json& j, std::initializer_list<const char*> keys,
                         const std::string& where) {
  for (const char* k : keys)
    if (!j.contains(k)) throw ConfigError(where + ": missing key '" + k + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace cfg_detail

inline std::shared_ptr<const ProblemInstance> problem_from_json(const json& j) {
  using cfg_detail::require_keys;
  require_keys(j, {"kind"}, "problem");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "quadratic") {
    require_keys(j, {"dimension", "mu", "L", "seed"}, "problem.quadratic");
    return std::make_shared<ProblemInstance>(
        make_quadratic(j.at("dimension").get<Eigen::Index>(), j.at("mu").get<double>(),
                       j.at("L").get<double>(), j.at("seed").get<std::uint64_t>()));
  }
  if (kind == "rank_deficient_least_squares") {
    require_keys(j, {"dimension", "rank", "L", "seed"}, "problem.rank_deficient_least_squares");
    return std::make_shared<ProblemInstance>(make_rank_deficient_least_squares(
        j.at("dimension").get<Eigen::Index>(), j.at("rank").get<Eigen::Index>(),
        j.at("L").get<double>(), j.at("seed").get<std::uint64_t>()));
  }
  if (kind == "smooth_nonconvex") {
    require_keys(j, {"dimension", "amplitude"}, "problem.smooth_nonconvex");
    return std::make_shared<ProblemInstance>(
        make_smooth_nonconvex(j.at("dimension").get<Eigen::Index>(),
                              j.at("amplitude").get<double>(),
                              cfg_detail::get_or<std::uint64_t>(j, "seed", 0)));
  }
  throw ConfigError("unknown problem kind: " + kind);
}

inline NoiseModel noise_from_json(const json& j) {
  using cfg_detail::require_keys;
  require_keys(j, {"kind"}, "oracle");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "additive_gaussian") {
    require_keys(j, {"sigma"}, "oracle.additive_gaussian");
    return AdditiveGaussianNoise{j.at("sigma").get<double>()};
  }
  if (kind == "multiplicative_relative") {
    require_keys(j, {"sigma"}, "oracle.multiplicative_relative");
    return MultiplicativeRelativeNoise{j.at("sigma").get<double>()};
  }
  if (kind == "finite_sum") {
    require_keys(j, {"n_components", "seed"}, "oracle.finite_sum");
    return FiniteSumNoise{j.at("n_components").get<int>(), j.at("seed").get<std::uint64_t>()};
  }
  throw ConfigError("unknown oracle kind: " + kind);
}

inline Schedule schedule_from_json(const json& j) {
  using cfg_detail::get_or;
  if (j.contains("regime")) {
    const std::string regime = j.at("regime").get<std::string>();
    const double scale = get_or<double>(j, "scale", 0.0);
    if (regime == "strongly_convex")
      return Schedule::strongly_convex_regime(j.at("theta").get<double>(), scale);
    if (regime == "non_convex")
      return Schedule::non_convex_regime(j.at("epsilon").get<double>(), scale);
    if (regime == "last_iterate")
      return Schedule::last_iterate_regime(j.at("epsilon").get<double>(), scale);
    throw ConfigError("unknown schedule regime: " + regime);
  }
  cfg_detail::require_keys(j, {"family", "scale"}, "schedule");
  const std::string family = j.at("family").get<std::string>();
  if (family == "power") return Schedule::power(j.at("scale").get<double>(), j.at("exponent").get<double>());
  if (family == "constant") return Schedule::constant(j.at("scale").get<double>());
  throw ConfigError("unknown schedule family: " + family);
}

inline json schedule_to_json(const Schedule& s) {
  json j;
  switch (s.regime) {
    case RegimeTag::StronglyConvexRegime:
      j["regime"] = "strongly_convex";
      j["theta"] = s.regime_param;
      j["scale"] = s.scale;
      return j;
    case RegimeTag::NonConvexRegime:
      j["regime"] = "non_convex";
      j["epsilon"] = s.regime_param;
      j["scale"] = s.scale;
      return j;
    case RegimeTag::LastIterateRegime:
      j["regime"] = "last_iterate";
      j["epsilon"] = s.regime_param;
      j["scale"] = s.scale;
      return j;
    case RegimeTag::Custom: break;
  }
  j["family"] = s.family == ScheduleFamily::Power ? "power" : "constant";
  j["scale"] = s.scale;
  if (s.family == ScheduleFamily::Power) j["exponent"] = s.exponent;
  return j;
}

inline std::pair<Method, double> method_from_json(const json& j) {
  cfg_detail::require_keys(j, {"method"}, "method");
  const std::string m = j.at("method").get<std::string>();
  const double beta = cfg_detail::get_or<double>(j, "beta", 0.0);
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("method: beta must be in [0, 1)");
  if (m == "sgd") {
    if (beta != 0.0) throw ConfigError("method: sgd does not take beta");
    return {Method::SGD, 0.0};
  }
  if (m == "shb") return {Method::SHB, beta};
  if (m == "snag") return {Method::SNAG, beta};
  throw ConfigError("unknown method: " + m);
}

inline InitSpec init_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return ZeroInit{};
  if (kind == "random_ball") return RandomBallInit{cfg_detail::get_or<double>(j, "radius", 5.0)};
  if (kind == "explicit") {
    auto v = j.at("point").get<std::vector<double>>();
    Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
    return ExplicitInit{std::move(p)};
  }
  throw ConfigError("unknown x_init kind: " + kind);
}

/// Fills defaults and validates; the returned object is the canonical form
/// that gets digested and persisted in the manifest.
inline json normalize_experiment_config(json j) {
  using cfg_detail::require_keys;
  require_keys(j, {"problem", "oracle", "schedule", "method", "run"}, "config");
  json& run = j.at("run");
  require_keys(run, {"horizon_T", "n_seeds", "master_seed"}, "run");
  if (!run.contains("record_points")) run["record_points"] = 200;
  if (!run.contains("x_init")) run["x_init"] = json{{"kind", "random_ball"}, {"radius", 5.0}};
  if (!run.contains("divergence_threshold")) run["divergence_threshold"] = 1e12;
  if (!run.contains("threads")) run["threads"] = 0;
  if (!run.contains("record_iterates")) run["record_iterates"] = false;
  if (!j.contains("fit")) j["fit"] = json::object();
  if (!j["fit"].contains("window_fraction")) j["fit"]["window_fraction"] = 0.5;
  if (!j["fit"].contains("quantile")) j["fit"]["quantile"] = 0.05;

  if (run.at("horizon_T").get<std::uint64_t>() == 0) throw ConfigError("run.horizon_T must be >= 1");
  if (run.at("n_seeds").get<std::uint64_t>() == 0) throw ConfigError("run.n_seeds must be >= 1");
  const double wf = j["fit"]["window_fraction"].get<double>();
  if (!(wf > 0.0 && wf <= 1.0)) throw ConfigError("fit.window_fraction must be in (0, 1]");
  const double q = j["fit"]["quantile"].get<double>();
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("fit.quantile must be in (0, 1)");
  return j;
}

/// Builds the runnable experiment; throws ConfigError on any invalid field.
inline Experiment experiment_from_json(const json& normalized) {
  Experiment ex;
  try {
    ex.problem = problem_from_json(normalized.at("problem"));
    ex.oracle = std::make_shared<GradientOracle>(ex.problem,
                                                 noise_from_json(normalized.at("oracle")));
    ex.schedule = schedule_from_json(normalized.at("schedule"));
    auto [m, beta] = method_from_json(normalized.at("method"));
    ex.method = m;
    ex.beta = beta;
    const json& run = normalized.at("run");
    ex.horizon = run.at("horizon_T").get<std::uint64_t>();
    ex.n_seeds = run.at("n_seeds").get<std::uint64_t>();
    ex.master_seed = run.at("master_seed").get<std::uint64_t>();
    ex.record_points = run.at("record_points").get<std::size_t>();
    ex.x_init = init_from_json(run.at("x_init"));
    ex.divergence_threshold = run.at("divergence_threshold").get<double>();
    ex.threads = run.at("threads").get<unsigned>();
    ex.record_iterates = run.at("record_iterates").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ex.config_digest = digest(normalized);
  return ex;
}

/// Applies `--set path=value` overrides with dot-path addressing into the raw
/// config. Unqualified keys fall through to the run section. Unknown keys and
/// unparsable values are errors.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: " + assignment);
  std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty override key");

  if (parts.size() == 1 && !config.contains(parts[0])) {
    if (config.contains("run") && config["run"].contains(parts[0]))
      parts.insert(parts.begin(), "run");
    else
      throw ConfigError("unknown config key: " + path);
  }

  json* node = &config;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) throw ConfigError("unknown config key: " + path);
    node = &(*node)[parts[i]];
  }
  const std::string& leaf = parts.back();
  if (!node->contains(leaf)) throw ConfigError("unknown config key: " + path);

  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // fall back to string
  (*node)[leaf] = parsed;
}

// ---- lemma-sim configs ----

inline RecursionSpec recursion_spec_from_json(const json& j) {
  using cfg_detail::get_or;
  cfg_detail::require_keys(j, {"kind", "horizon"}, "lemma spec");
  RecursionSpec spec;
  spec.horizon = j.at("horizon").get<std::uint64_t>();
  spec.noise_amplitude = get_or<double>(j, "noise_amplitude", 0.0);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "strong") {
    StrongCaseSpec s;
    s.c1 = get_or<double>(j, "c1", 1.0);
    s.c2 = get_or<double>(j, "c2", 1.0);
    s.theta = j.at("theta").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.alpha_scale = get_or<double>(j, "alpha_scale", 0.0);
    spec.kind = s;
  } else if (kind == "robbins_siegmund") {
    RobbinsSiegmundSpec r;
    r.gamma_scale = get_or<double>(j, "gamma_scale", 1.0);
    r.gamma_power = get_or<double>(j, "gamma_power", 2.0);
    r.z_scale = get_or<double>(j, "z_scale", 1.0);
    r.z_power = get_or<double>(j, "z_power", 1.5);
    r.x_fraction = get_or<double>(j, "x_fraction", 1.0);
    r.x_cap_scale = get_or<double>(j, "x_cap_scale", 1.0);
    r.y1 = get_or<double>(j, "y1", 0.5);
    spec.kind = r;
  } else if (kind == "convex") {
    ConvexCaseSpec c;
    c.c1 = get_or<double>(j, "c1", 1.0);
    c.c2 = get_or<double>(j, "c2", 1.0);
    c.epsilon = j.at("epsilon").get<double>();
    c.alpha_scale = get_or<double>(j, "alpha_scale", 0.0);
    c.kappa = get_or<double>(j, "kappa", 1.0);
    spec.kind = c;
  } else {
    throw ConfigError("unknown lemma spec kind: " + kind);
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

}  // namespace sgm
