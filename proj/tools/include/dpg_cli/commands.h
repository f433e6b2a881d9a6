// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DPG_CLI_COMMANDS_H_
#define DPG_CLI_COMMANDS_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpg_cli/config.h"
#include "dpg_cli/report_io.h"

namespace dpg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNonConvergence = 2,
  kExitNotCertified = 3,
};

// Flags shared by every subcommand; unset fields leave the configuration
// untouched.
struct CommonFlags {
  std::optional<std::string> scenario;
  std::optional<std::string> config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<double> tol;
  std::optional<int> threads;
  Format format = Format::kJson;
};

// Config file (if any) overlaid with the command-line flags.
RunConfig resolve_run_config(const CommonFlags& flags);

int cmd_run(const CommonFlags& flags, std::ostream& log);
int cmd_check_potential(const CommonFlags& flags, std::ostream& log);
int cmd_verify_ne(const CommonFlags& flags, std::ostream& log);
int cmd_riccati(const CommonFlags& flags, std::ostream& log);
int cmd_list_scenarios(const CommonFlags& flags, std::ostream& out);

// Parses argv and dispatches; never throws.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dpg::cli

#endif  // DPG_CLI_COMMANDS_H_
