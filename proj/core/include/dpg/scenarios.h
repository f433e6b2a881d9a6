// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Builders for the bundled games: smart grid (LQ), network flow, multiple
// access, proportional-fair and equal-rate scheduling.

#ifndef DPG_SCENARIOS_H_
#define DPG_SCENARIOS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpg/game.h"
#include "dpg/lq.h"
#include "dpg/potential.h"
#include "dpg/traj_opt.h"
#include "dpg/value_iteration.h"

namespace dpg {

enum class SolverRoute { kLq, kTrajOpt, kValueIteration };
const char* route_name(SolverRoute r);

using ParamValue = std::variant<bool, std::int64_t, double, std::vector<double>>;

enum class ParamType { kBool, kInt, kDouble, kDoubleList };
const char* param_type_name(ParamType t);

struct ParamSpec {
  std::string name;
  ParamType type;
  ParamValue default_value;
  std::string doc;
};

// Resolved parameters: every schema entry present, types normalized.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::map<std::string, ParamValue> values)
      : values_(std::move(values)) {}

  bool get_bool(const std::string& k) const;
  std::int64_t get_int(const std::string& k) const;
  double get_double(const std::string& k) const;
  const std::vector<double>& get_list(const std::string& k) const;
  const std::map<std::string, ParamValue>& values() const { return values_; }

 private:
  const ParamValue& at(const std::string& k) const;
  std::map<std::string, ParamValue> values_;
};

struct ScenarioConfig {
  std::string id;
  std::map<std::string, ParamValue> overrides;
  std::uint64_t seed = 0;
};

// Type-checks overrides against a schema. Unknown keys and mistyped values
// raise ValidationError. Integers are accepted where reals are expected.
ParameterSet resolve_parameters(const std::vector<ParamSpec>& schema,
                                const std::map<std::string, ParamValue>& overrides);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ScenarioBundle {
  std::string id;
  SolverRoute route = SolverRoute::kTrajOpt;
  ParameterSet params;
  std::uint64_t seed = 0;

  DynamicGameSpec game;
  MocpSpec mocp;  // potential is the closed form
  SamplePlan sample_plan;

  // Route-specific pieces.
  std::optional<LqGameParams> lq_params;
  std::optional<LqProblem> lq;
  double action_limit = 0.0;
  // traj-opt route (also built for LQ, for gradient checks).
  std::optional<FiniteHorizonProblem> problem;
  std::optional<GridSpec> grid;
  int horizon = 0;            // simulation / optimization / rollout length
  bool infinite_horizon = false;

  // Plot-ready per-step table of a trajectory in scenario-native columns.
  std::function<Table(const Trajectory&)> trajectory_table;
};

ScenarioBundle build_smart_grid(const ScenarioConfig& cfg);
ScenarioBundle build_network_flow(const ScenarioConfig& cfg);
ScenarioBundle build_mac(const ScenarioConfig& cfg);
ScenarioBundle build_prop_fair(const ScenarioConfig& cfg);
ScenarioBundle build_equal_rate(const ScenarioConfig& cfg);

struct ScenarioInfo {
  std::string id;
  SolverRoute route;
  std::string summary;
  std::vector<ParamSpec> schema;
  std::function<ScenarioBundle(const ScenarioConfig&)> build;
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo& find_scenario(const std::string& id);  // SpecificationError
ScenarioBundle build_scenario(const ScenarioConfig& cfg);

std::vector<ParamSpec> smart_grid_schema();
std::vector<ParamSpec> network_flow_schema();
std::vector<ParamSpec> mac_schema();
std::vector<ParamSpec> prop_fair_schema();
std::vector<ParamSpec> equal_rate_schema();

// Network flow topology: rows L1..L6 by 2x4 path flows.
Mat network_flow_connectivity();

// Scheduling channel |h_t^i|^2 at periodic time tau.
double scheduling_channel(const ParameterSet& p, int user, int tau);
// Per-user average (prop-fair) or cumulative (equal-rate) rate reached
// after one period when the user transmits alone at full power.
Vec single_user_reference(const ScenarioBundle& b);

}  // namespace dpg

#endif  // DPG_SCENARIOS_H_
