// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg_cli/commands.h"

#include <chrono>
#include <filesystem>
#include <functional>

#include "CLI11.hpp"
#include "dpg/errors.h"

#ifndef DPG_VERSION
#define DPG_VERSION "unknown"
#endif

namespace dpg::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json param_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

const char* inner_method_name(InnerMethod m) {
  return m == InnerMethod::kSpectral ? "spectral" : "newton-cg";
}

json options_json(const RunConfig& cfg) {
  const SolverOptions& s = cfg.options.solver;
  return {
      {"solver",
       {{"inner_method", inner_method_name(s.inner_method)},
        {"max_outer_iterations", s.max_outer_iterations},
        {"max_inner_iterations", s.max_inner_iterations},
        {"max_cg_iterations", s.max_cg_iterations},
        {"penalty_growth", s.penalty_growth},
        {"initial_penalty", s.initial_penalty},
        {"max_penalty", s.max_penalty},
        {"gradient_tolerance", s.gradient_tolerance},
        {"feasibility_tolerance", s.feasibility_tolerance},
        {"shrink", s.shrink},
        {"armijo", s.armijo},
        {"violation_decrease", s.violation_decrease},
        {"rng_seed", s.rng_seed}}},
      {"value_iteration",
       {{"epsilon", cfg.options.vi.epsilon},
        {"max_iterations", cfg.options.vi.max_iterations},
        {"threads", cfg.options.vi.threads}}},
      {"riccati",
       {{"tol", cfg.options.riccati_tol}, {"max_iter", cfg.options.riccati_max_iter}}},
      {"verify", {{"tolerance", cfg.ne_tolerance}}},
  };
}

// Everything needed to rerun: a manifest loads as a config.
json manifest_json(const std::string& command, const RunConfig& cfg,
                   const ScenarioBundle& b, const json& timings,
                   const std::vector<std::string>& outputs) {
  json params = json::object();
  for (const auto& [k, v] : b.params.values()) params[k] = param_json(v);
  json m = options_json(cfg);
  m["command"] = command;
  m["scenario"] = b.id;
  m["seed"] = b.seed;
  m["route"] = route_name(b.route);
  m["parameters"] = params;
  m["timings"] = timings;
  m["outputs"] = outputs;
  m["version"] = DPG_VERSION;
  return m;
}

std::string out_path(const CommonFlags& f, const std::string& name) {
  return (fs::path(f.out) / name).string();
}

void ensure_out_dir(const CommonFlags& f) {
  std::error_code ec;
  fs::create_directories(f.out, ec);
  if (ec) throw IoError("cannot create output directory " + f.out + ": " + ec.message());
}

std::string report_name(const std::string& stem, Format f) {
  return stem + "." + format_extension(f);
}

ScenarioBundle build(const RunConfig& cfg) { return build_scenario(cfg.scenario); }

Report solver_report(const ScenarioBundle& b, const ScenarioRun& run) {
  if (run.riccati) return make_report(*run.riccati);
  if (run.solve) return make_report(*run.solve, &b);
  return make_report(summarize(*run.vi, Grid(*b.grid)));
}

// Writes the machine-readable error report and maps the error to an exit
// status.
int fail(const CommonFlags& f, const std::string& command, const std::exception& e,
         std::ostream& log) {
  const auto* de = dynamic_cast<const Error*>(&e);
  const std::string kind = de ? de->kind() : "internal";
  int code = kExitUsage;
  json body = {{"type", "error"}, {"command", command}, {"kind", kind},
               {"message", e.what()}};
  if (const auto* nc = dynamic_cast<const NonConvergenceError*>(&e)) {
    code = kExitNonConvergence;
    body["last_residual"] = nc->last_residual();
    body["iterations"] = nc->iterations();
  } else if (dynamic_cast<const InstabilityError*>(&e)) {
    code = kExitNonConvergence;
  }
  body["exit_code"] = code;
  log << "dpg " << command << ": " << kind << ": " << e.what() << "\n";
  try {
    if (fs::is_directory(f.out)) write_file(out_path(f, "error.json"), body.dump(2) + "\n");
  } catch (const std::exception&) {
    // The diagnostic line above is all we can offer.
  }
  return code;
}

int guarded(const CommonFlags& f, const std::string& command, std::ostream& log,
            const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return fail(f, command, e, log);
  }
}

}  // namespace

RunConfig resolve_run_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (flags.config) cfg = load_config(*flags.config);
  if (flags.scenario) cfg.scenario.id = *flags.scenario;
  if (cfg.scenario.id.empty()) throw ValidationError("no scenario given (--scenario or config)");
  find_scenario(cfg.scenario.id);
  if (flags.seed) cfg.scenario.seed = *flags.seed;
  if (flags.horizon) cfg.scenario.overrides["horizon"] = std::int64_t{*flags.horizon};
  if (flags.tol) cfg.ne_tolerance = *flags.tol;
  if (flags.threads) {
    if (*flags.threads < 1) throw ValidationError("--threads must be >= 1");
    cfg.options.vi.threads = *flags.threads;
  }
  return cfg;
}

int cmd_run(const CommonFlags& flags, std::ostream& log) {
  return guarded(flags, "run", log, [&] {
    const RunConfig cfg = resolve_run_config(flags);
    ensure_out_dir(flags);
    const auto t0 = Clock::now();
    const ScenarioBundle b = build(cfg);
    const double t_build = seconds_since(t0);
    const ScenarioRun run = solve_scenario(b, cfg.options);
    const double t_solve = seconds_since(t0) - t_build;
    const NeReport ne = certify_scenario(b, run.trajectory, cfg.ne_tolerance, cfg.options);
    const double t_verify = seconds_since(t0) - t_build - t_solve;

    std::vector<std::string> outputs = {"trajectory.csv", report_name("solver", flags.format),
                                        report_name("ne", flags.format), "manifest.json"};
    write_file(out_path(flags, outputs[0]), render_csv(b.trajectory_table(run.trajectory)));
    emit_report(solver_report(b, run), flags.format, out_path(flags, outputs[1]));
    emit_report(make_report(ne), flags.format, out_path(flags, outputs[2]));
    const json timings = {{"build_s", t_build}, {"solve_s", t_solve}, {"verify_s", t_verify}};
    write_file(out_path(flags, outputs[3]),
               manifest_json("run", cfg, b, timings, outputs).dump(2) + "\n");

    log << b.id << ": " << route_name(b.route) << (run.converged ? " converged" : " did not converge")
        << ", residual " << format_double(run.residual) << "; NE "
        << (ne.certified ? "certified" : "not certified") << " (max relative improvement "
        << format_double(ne.max_relative_improvement) << ")\n";
    if (!run.converged) return int{kExitNonConvergence};
    return ne.certified ? int{kExitOk} : int{kExitNotCertified};
  });
}

int cmd_check_potential(const CommonFlags& flags, std::ostream& log) {
  return guarded(flags, "check-potential", log, [&] {
    const RunConfig cfg = resolve_run_config(flags);
    ensure_out_dir(flags);
    const ScenarioBundle b = build(cfg);
    SamplePlan plan = b.sample_plan;
    plan.rng_seed = cfg.scenario.seed;
    const double tol = flags.tol.value_or(1e-5);
    const ConservativityReport rep = check_potential_conditions(b.game, plan, 1e-4, tol);
    emit_report(make_report(rep), flags.format,
                out_path(flags, report_name("potential", flags.format)));
    log << b.id << ": potential conditions " << (rep.passed ? "passed" : "failed")
        << ", max residual " << format_double(rep.max_residual) << "\n";
    return rep.passed ? int{kExitOk} : int{kExitNotCertified};
  });
}

int cmd_verify_ne(const CommonFlags& flags, std::ostream& log) {
  return guarded(flags, "verify-ne", log, [&] {
    const RunConfig cfg = resolve_run_config(flags);
    ensure_out_dir(flags);
    const ScenarioBundle b = build(cfg);
    const ScenarioRun run = solve_scenario(b, cfg.options);
    const NeReport ne = certify_scenario(b, run.trajectory, cfg.ne_tolerance, cfg.options);
    emit_report(make_report(ne), flags.format, out_path(flags, report_name("ne", flags.format)));
    log << b.id << ": NE " << (ne.certified ? "certified" : "not certified")
        << " at tolerance " << format_double(ne.tolerance) << " (max relative improvement "
        << format_double(ne.max_relative_improvement) << ")\n";
    if (!run.converged) return int{kExitNonConvergence};
    return ne.certified ? int{kExitOk} : int{kExitNotCertified};
  });
}

int cmd_riccati(const CommonFlags& flags, std::ostream& log) {
  return guarded(flags, "riccati", log, [&] {
    const RunConfig cfg = resolve_run_config(flags);
    ensure_out_dir(flags);
    const ScenarioBundle b = build(cfg);
    if (!b.lq) throw SpecificationError("scenario " + b.id + " is not linear-quadratic");
    const RiccatiSolution sol =
        riccati_fixed_point(*b.lq, cfg.options.riccati_tol, cfg.options.riccati_max_iter);
    emit_report(make_report(sol), flags.format,
                out_path(flags, report_name("riccati", flags.format)));
    log << b.id << ": Riccati converged in " << sol.iterations << " iterations, residual "
        << format_double(sol.residual) << ", DARE residual "
        << format_double(dare_residual(*b.lq, sol.P)) << "\n";
    return int{kExitOk};
  });
}

int cmd_list_scenarios(const CommonFlags& flags, std::ostream& out) {
  const auto& reg = scenario_registry();
  if (flags.format == Format::kJson) {
    json a = json::array();
    for (const auto& s : reg) {
      json params = json::array();
      for (const auto& p : s.schema)
        params.push_back({{"name", p.name}, {"type", param_type_name(p.type)},
                          {"default", param_json(p.default_value)}, {"doc", p.doc}});
      a.push_back({{"id", s.id}, {"route", route_name(s.route)}, {"summary", s.summary},
                   {"parameters", params}});
    }
    out << a.dump(2) << "\n";
  } else if (flags.format == Format::kCsv) {
    out << "id,route,summary\n";
    for (const auto& s : reg) out << s.id << "," << route_name(s.route) << ",\"" << s.summary << "\"\n";
  } else {
    for (const auto& s : reg) {
      out << s.id << " (" << route_name(s.route) << "): " << s.summary << "\n";
      for (const auto& p : s.schema)
        out << "  " << p.name << " [" << param_type_name(p.type)
            << "] = " << param_json(p.default_value).dump()
            << (p.doc.empty() ? "" : "  " + p.doc) << "\n";
    }
  }
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic potential game toolkit", "dpg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DPG_VERSION);
  CommonFlags flags;
  std::string format = "json";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", flags.scenario, "scenario id (see list-scenarios)");
    sub->add_option("--config", flags.config, "YAML or JSON run configuration");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "scenario seed");
    sub->add_option("--horizon", flags.horizon, "horizon override");
    sub->add_option("--tol", flags.tol, "certification tolerance");
    sub->add_option("--threads", flags.threads, "worker threads for value iteration");
    sub->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  };
  CLI::App* run = app.add_subcommand("run", "solve a scenario and certify the result");
  CLI::App* pot = app.add_subcommand("check-potential", "test the potential-game conditions");
  CLI::App* ne = app.add_subcommand("verify-ne", "solve and run the deviation search");
  CLI::App* ric = app.add_subcommand("riccati", "Riccati fixed point of an LQ scenario");
  CLI::App* lst = app.add_subcommand("list-scenarios", "list bundled scenarios");
  for (CLI::App* s : {run, pot, ne, ric, lst}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << DPG_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "dpg: " << e.what() << "\n";
    return kExitUsage;
  }
  flags.format = parse_format(format);
  if (*run) return cmd_run(flags, err);
  if (*pot) return cmd_check_potential(flags, err);
  if (*ne) return cmd_verify_ne(flags, err);
  if (*ric) return cmd_riccati(flags, err);
  return cmd_list_scenarios(flags, out);
}

}  // namespace dpg::cli
