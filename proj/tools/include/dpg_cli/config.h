// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration files. YAML by default; files ending in .json are read
// as JSON. A run manifest is itself a valid configuration.
//
//   scenario: mac
//   seed: 7
//   parameters: {horizon: 80, gains: [1.0, 0.9, 0.8, 0.7]}
//   solver: {gradient_tolerance: 1.0e-6, max_outer_iterations: 60}
//   value_iteration: {epsilon: 1.0e-4, threads: 1}
//   verify: {tolerance: 1.0e-3}

#ifndef DPG_CLI_CONFIG_H_
#define DPG_CLI_CONFIG_H_

#include <string>

#include "dpg/runner.h"
#include "dpg/scenarios.h"

namespace dpg::cli {

struct RunConfig {
  ScenarioConfig scenario;
  RunOptions options;
  double ne_tolerance = 1e-3;
};

// Throws ValidationError on schema errors and IoError on unreadable files.
RunConfig load_config(const std::string& path);
RunConfig parse_config_yaml(const std::string& text);
RunConfig parse_config_json(const std::string& text);

}  // namespace dpg::cli

#endif  // DPG_CLI_CONFIG_H_
