// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "dpg/errors.h"
#include "dpg/scenarios.h"

namespace dpg {

const char* route_name(SolverRoute r) {
  switch (r) {
    case SolverRoute::kLq: return "lq";
    case SolverRoute::kTrajOpt: return "traj-opt";
    case SolverRoute::kValueIteration: return "value-iteration";
  }
  return "?";
}

const char* param_type_name(ParamType t) {
  switch (t) {
    case ParamType::kBool: return "bool";
    case ParamType::kInt: return "int";
    case ParamType::kDouble: return "double";
    case ParamType::kDoubleList: return "double-list";
  }
  return "?";
}

const ParamValue& ParameterSet::at(const std::string& k) const {
  auto it = values_.find(k);
  if (it == values_.end()) throw SpecificationError("unknown parameter '" + k + "'");
  return it->second;
}

bool ParameterSet::get_bool(const std::string& k) const {
  return std::get<bool>(at(k));
}
std::int64_t ParameterSet::get_int(const std::string& k) const {
  return std::get<std::int64_t>(at(k));
}
double ParameterSet::get_double(const std::string& k) const {
  return std::get<double>(at(k));
}
const std::vector<double>& ParameterSet::get_list(const std::string& k) const {
  return std::get<std::vector<double>>(at(k));
}

namespace {

ParamValue coerce(const ParamSpec& spec, const ParamValue& v) {
  auto bad = [&]() -> ValidationError {
    return ValidationError("parameter '" + spec.name + "' expects " +
                           param_type_name(spec.type));
  };
  switch (spec.type) {
    case ParamType::kBool:
      if (std::holds_alternative<bool>(v)) return v;
      throw bad();
    case ParamType::kInt:
      if (std::holds_alternative<std::int64_t>(v)) return v;
      if (auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d &&
                                              std::abs(*d) < 9e15)
        return static_cast<std::int64_t>(*d);
      throw bad();
    case ParamType::kDouble:
      if (auto* d = std::get_if<double>(&v)) return *d;
      if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      throw bad();
    case ParamType::kDoubleList:
      if (std::holds_alternative<std::vector<double>>(v)) return v;
      if (auto* d = std::get_if<double>(&v)) return std::vector<double>{*d};
      if (auto* i = std::get_if<std::int64_t>(&v))
        return std::vector<double>{static_cast<double>(*i)};
      throw bad();
  }
  throw bad();
}

}  // namespace

ParameterSet resolve_parameters(
    const std::vector<ParamSpec>& schema,
    const std::map<std::string, ParamValue>& overrides) {
  std::map<std::string, ParamValue> out;
  for (const auto& s : schema) out[s.name] = s.default_value;
  for (const auto& [k, v] : overrides) {
    const ParamSpec* spec = nullptr;
    for (const auto& s : schema)
      if (s.name == k) spec = &s;
    if (!spec) throw ValidationError("unknown parameter '" + k + "'");
    out[k] = coerce(*spec, v);
  }
  return ParameterSet(std::move(out));
}

const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> reg = {
      {"smart-grid", SolverRoute::kLq,
       "LQ energy-demand game; Riccati fixed point and closed-loop simulation",
       smart_grid_schema(), build_smart_grid},
      {"network-flow", SolverRoute::kTrajOpt,
       "two-source relay network with battery-limited nodes",
       network_flow_schema(), build_network_flow},
      {"mac", SolverRoute::kTrajOpt,
       "uplink multiple access with battery-limited users",
       mac_schema(), build_mac},
      {"prop-fair", SolverRoute::kValueIteration,
       "proportional-fair scheduling over periodic channels",
       prop_fair_schema(), build_prop_fair},
      {"equal-rate", SolverRoute::kValueIteration,
       "equal-rate scheduling over periodic channels",
       equal_rate_schema(), build_equal_rate},
  };
  return reg;
}

const ScenarioInfo& find_scenario(const std::string& id) {
  for (const auto& s : scenario_registry())
    if (s.id == id) return s;
  throw SpecificationError("unknown scenario '" + id + "'");
}

ScenarioBundle build_scenario(const ScenarioConfig& cfg) {
  return find_scenario(cfg.id).build(cfg);
}

}  // namespace dpg
