// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "dpg/potential.h"
#include "dpg/scenarios.h"

namespace {

dpg::ScenarioBundle mac() {
  dpg::ScenarioConfig cfg;
  cfg.id = "mac";
  return dpg::build_mac(cfg);
}

void BM_CheckPotentialMac(benchmark::State& state) {
  auto b = mac();
  for (auto _ : state) {
    auto rep = dpg::check_potential_conditions(b.game, b.sample_plan);
    benchmark::DoNotOptimize(rep.max_residual);
  }
}
BENCHMARK(BM_CheckPotentialMac)->Unit(benchmark::kMillisecond);

// Quadrature order as the argument.
void BM_LineIntegralMac(benchmark::State& state) {
  auto b = mac();
  auto cert = dpg::check_potential_conditions(b.game, b.sample_plan);
  dpg::LineIntegralOptions opts;
  opts.quadrature_order = static_cast<int>(state.range(0));
  auto pot = dpg::build_potential_line_integral(b.game, dpg::Vec::Zero(4), dpg::Vec::Zero(4),
                                                opts, &cert);
  const dpg::Vec x = dpg::Vec::Constant(4, 20.0), u = dpg::Vec::Constant(4, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(pot(x, u, 0));
}
BENCHMARK(BM_LineIntegralMac)->Arg(8)->Arg(32)->Arg(128);

}  // namespace
