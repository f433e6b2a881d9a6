// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg_cli/config.h"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "dpg/errors.h"
#include "json.hpp"

namespace dpg::cli {
namespace {

using nlohmann::json;

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      bool b;
      if (YAML::convert<bool>::decode(n, b)) return b;
      std::int64_t i;
      if (YAML::convert<std::int64_t>::decode(n, i)) return i;
      double d;
      if (YAML::convert<double>::decode(n, d)) return d;
      return s;
    }
  }
  return nullptr;
}

ParamValue to_param(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) return v.get<double>();
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        throw ValidationError("parameter '" + key + "' must be a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ValidationError("parameter '" + key + "' has an unsupported type");
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError("'" + section + "' must be a mapping");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k))
      throw ValidationError("unknown key '" + k + "' in '" + section + "'");
}

template <typename T>
void read(const json& obj, const char* key, T* out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ValidationError("");
    } else {
      if (!v.is_number()) throw ValidationError("");
    }
    *out = v.get<T>();
  } catch (const std::exception&) {
    throw ValidationError(std::string("key '") + key + "' has the wrong type");
  }
}

RunConfig from_json(const json& root) {
  check_keys(root, "config",
             {"scenario", "seed", "parameters", "solver", "value_iteration",
              "riccati", "verify",
              // Written by run manifests; ignored on input.
              "route", "timings", "outputs", "version", "command"});
  RunConfig cfg;
  if (!root.contains("scenario") || !root["scenario"].is_string())
    throw ValidationError("config needs a 'scenario' string");
  cfg.scenario.id = root["scenario"].get<std::string>();
  read(root, "seed", &cfg.scenario.seed);
  if (root.contains("parameters")) {
    const json& p = root["parameters"];
    if (!p.is_object()) throw ValidationError("'parameters' must be a mapping");
    for (const auto& [k, v] : p.items()) cfg.scenario.overrides[k] = to_param(k, v);
  }
  if (root.contains("solver")) {
    const json& s = root["solver"];
    check_keys(s, "solver",
               {"inner_method", "max_outer_iterations", "max_inner_iterations",
                "max_cg_iterations", "penalty_growth", "initial_penalty",
                "max_penalty", "gradient_tolerance", "feasibility_tolerance",
                "shrink", "armijo", "violation_decrease", "rng_seed"});
    SolverOptions& o = cfg.options.solver;
    if (s.contains("inner_method")) {
      const json& m = s["inner_method"];
      if (m == "newton-cg") o.inner_method = InnerMethod::kNewtonCg;
      else if (m == "spectral") o.inner_method = InnerMethod::kSpectral;
      else throw ValidationError("inner_method must be newton-cg or spectral");
    }
    read(s, "max_outer_iterations", &o.max_outer_iterations);
    read(s, "max_inner_iterations", &o.max_inner_iterations);
    read(s, "max_cg_iterations", &o.max_cg_iterations);
    read(s, "penalty_growth", &o.penalty_growth);
    read(s, "initial_penalty", &o.initial_penalty);
    read(s, "max_penalty", &o.max_penalty);
    read(s, "gradient_tolerance", &o.gradient_tolerance);
    read(s, "feasibility_tolerance", &o.feasibility_tolerance);
    read(s, "shrink", &o.shrink);
    read(s, "armijo", &o.armijo);
    read(s, "violation_decrease", &o.violation_decrease);
    read(s, "rng_seed", &o.rng_seed);
    o.validate();
  }
  if (root.contains("value_iteration")) {
    const json& s = root["value_iteration"];
    check_keys(s, "value_iteration", {"epsilon", "max_iterations", "threads"});
    read(s, "epsilon", &cfg.options.vi.epsilon);
    read(s, "max_iterations", &cfg.options.vi.max_iterations);
    read(s, "threads", &cfg.options.vi.threads);
  }
  if (root.contains("riccati")) {
    const json& s = root["riccati"];
    check_keys(s, "riccati", {"tol", "max_iter"});
    read(s, "tol", &cfg.options.riccati_tol);
    read(s, "max_iter", &cfg.options.riccati_max_iter);
  }
  if (root.contains("verify")) {
    const json& s = root["verify"];
    check_keys(s, "verify", {"tolerance"});
    read(s, "tolerance", &cfg.ne_tolerance);
  }
  return cfg;
}

}  // namespace

RunConfig parse_config_yaml(const std::string& text) {
  YAML::Node n;
  try {
    n = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return from_json(yaml_to_json(n));
}

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return from_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? parse_config_json(ss.str()) : parse_config_yaml(ss.str());
}

}  // namespace dpg::cli
