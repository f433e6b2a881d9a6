// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "dpg_cli/commands.h"

int main(int argc, char** argv) {
  return dpg::cli::run_cli(argc, argv, std::cout, std::cerr);
}
