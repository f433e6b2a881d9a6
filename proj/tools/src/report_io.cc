// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpg_cli/report_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dpg/errors.h"

namespace dpg::cli {
namespace {

// JSON has no NaN or infinity; they are written as null.
double num(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vec_list(const std::vector<Vec>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

std::vector<Vec> vec_list_from(const json& j) {
  std::vector<Vec> out;
  for (const auto& e : j) out.push_back(vec_from_json(e));
  return out;
}

json worst_case_json(const WorstCase& w) {
  return {{"x", to_json(w.point.x)}, {"u", to_json(w.point.u)}, {"t", w.point.t},
          {"i", w.i}, {"j", w.j}, {"condition", condition_name(w.condition)}};
}

Condition condition_from(const std::string& s) {
  for (Condition c : {Condition::kStateAction, Condition::kStateState,
                      Condition::kActionAction, Condition::kStateGradient,
                      Condition::kActionGradient})
    if (s == condition_name(c)) return c;
  throw ValidationError("unknown condition '" + s + "'");
}

void flatten_text(const json& j, const std::string& prefix, std::string* out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      flatten_text(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  std::string value;
  if (j.is_number_float()) {
    value = format_double(j.get<double>());
  } else if (j.is_array() && j.size() > 8 && !j.empty() && !j[0].is_structured()) {
    value = "[" + std::to_string(j.size()) + " values]";
  } else {
    value = j.dump();
  }
  *out += prefix + ": " + value + "\n";
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "json") return Format::kJson;
  if (s == "csv") return Format::kCsv;
  if (s == "text") return Format::kText;
  throw ValidationError("format must be json, csv or text");
}

const char* format_extension(Format f) {
  switch (f) {
    case Format::kJson: return "json";
    case Format::kCsv: return "csv";
    case Format::kText: return "txt";
  }
  return "txt";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = num(j[i]);
  return v;
}

Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = num(j[r][c]);
  return m;
}

json to_json(const Trajectory& t) {
  json j = {{"horizon", t.horizon},
            {"states", vec_list(t.states)},
            {"actions", vec_list(t.actions)},
            {"per_player_returns", to_json(t.per_player_returns)}};
  j["potential_return"] = t.potential_return ? json(*t.potential_return) : json(nullptr);
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.horizon = j.at("horizon").get<int>();
  t.states = vec_list_from(j.at("states"));
  t.actions = vec_list_from(j.at("actions"));
  t.per_player_returns = vec_from_json(j.at("per_player_returns"));
  if (!j.at("potential_return").is_null()) t.potential_return = num(j["potential_return"]);
  return t;
}

ViSummary summarize(const ViResult& r, const Grid& grid) {
  ViSummary s;
  s.converged = r.converged;
  s.iterations = r.value.iterations;
  s.delta = r.value.delta;
  s.bellman_residual = r.value.bellman_residual;
  s.num_states = grid.num_states();
  s.num_actions = grid.num_actions();
  s.clamped_successors = r.clamped_successors;
  s.delta_history = r.value.delta_history;
  return s;
}

Report make_report(const ConservativityReport& r) {
  Report rep;
  rep.type = "conservativity";
  rep.body = {{"type", rep.type},
              {"passed", r.passed},
              {"max_residual", r.max_residual},
              {"tolerance", r.tolerance},
              {"fd_step", r.fd_step},
              {"samples", r.samples},
              {"worst_case", worst_case_json(r.worst_case)},
              {"per_condition_max", {r.per_condition_max[0], r.per_condition_max[1],
                                     r.per_condition_max[2]}},
              {"pair_residual", to_json(r.pair_residual)}};
  rep.table.header = {"passed", "max_residual", "tolerance", "fd_step", "samples",
                      "state_action_max", "state_state_max", "action_action_max",
                      "worst_i", "worst_j", "worst_t"};
  rep.table.rows.push_back({r.passed ? 1.0 : 0.0, r.max_residual, r.tolerance,
                            r.fd_step, static_cast<double>(r.samples),
                            r.per_condition_max[0], r.per_condition_max[1],
                            r.per_condition_max[2], static_cast<double>(r.worst_case.i),
                            static_cast<double>(r.worst_case.j),
                            static_cast<double>(r.worst_case.point.t)});
  return rep;
}

ConservativityReport conservativity_from_json(const json& j) {
  ConservativityReport r;
  r.passed = j.at("passed").get<bool>();
  r.max_residual = num(j.at("max_residual"));
  r.tolerance = num(j.at("tolerance"));
  r.fd_step = num(j.at("fd_step"));
  r.samples = j.at("samples").get<int>();
  const json& w = j.at("worst_case");
  r.worst_case.point.x = vec_from_json(w.at("x"));
  r.worst_case.point.u = vec_from_json(w.at("u"));
  r.worst_case.point.t = w.at("t").get<int>();
  r.worst_case.i = w.at("i").get<int>();
  r.worst_case.j = w.at("j").get<int>();
  r.worst_case.condition = condition_from(w.at("condition").get<std::string>());
  for (int k = 0; k < 3; ++k) r.per_condition_max[k] = num(j.at("per_condition_max")[k]);
  r.pair_residual = mat_from_json(j.at("pair_residual"));
  return r;
}

Report make_report(const NeReport& r) {
  Report rep;
  rep.type = "nash-equilibrium";
  rep.body = {{"type", rep.type},
              {"certified", r.certified},
              {"max_relative_improvement", r.max_relative_improvement},
              {"tolerance", r.tolerance},
              {"search_description", r.search_description},
              {"all_searches_converged", r.all_searches_converged},
              {"per_player_improvement", to_json(r.per_player_improvement)},
              {"per_player_relative", to_json(r.per_player_relative)},
              {"current_returns", to_json(r.current_returns)}};
  rep.table.header = {"player", "improvement", "relative_improvement", "current_return"};
  for (int i = 0; i < r.per_player_improvement.size(); ++i)
    rep.table.rows.push_back({static_cast<double>(i + 1), r.per_player_improvement[i],
                              r.per_player_relative[i], r.current_returns[i]});
  return rep;
}

NeReport ne_report_from_json(const json& j) {
  NeReport r;
  r.certified = j.at("certified").get<bool>();
  r.max_relative_improvement = num(j.at("max_relative_improvement"));
  r.tolerance = num(j.at("tolerance"));
  r.search_description = j.at("search_description").get<std::string>();
  r.all_searches_converged = j.at("all_searches_converged").get<bool>();
  r.per_player_improvement = vec_from_json(j.at("per_player_improvement"));
  r.per_player_relative = vec_from_json(j.at("per_player_relative"));
  r.current_returns = vec_from_json(j.at("current_returns"));
  return r;
}

Report make_report(const SolveResult& r, const ScenarioBundle* bundle) {
  Report rep;
  rep.type = "solve-result";
  rep.body = {{"type", rep.type},
              {"converged", r.converged},
              {"objective", r.objective},
              {"kkt_residual", r.kkt_residual},
              {"constraint_violation", r.constraint_violation},
              {"iterations", r.iterations},
              {"outer_iterations", r.outer_iterations},
              {"objective_history", r.objective_history},
              {"coupling_duals", vec_list(r.coupling_duals)},
              {"state_lower_duals", vec_list(r.state_lower_duals)},
              {"state_upper_duals", vec_list(r.state_upper_duals)},
              {"trajectory", to_json(r.trajectory)}};
  if (bundle && bundle->trajectory_table) {
    rep.table = bundle->trajectory_table(r.trajectory);
  } else {
    const Trajectory& t = r.trajectory;
    rep.table.header.push_back("t");
    const int m = t.actions.empty() ? 0 : static_cast<int>(t.actions[0].size());
    const int n = t.states.empty() ? 0 : static_cast<int>(t.states[0].size());
    for (int k = 0; k < m; ++k) rep.table.header.push_back("u_" + std::to_string(k + 1));
    for (int k = 0; k < n; ++k) rep.table.header.push_back("x_" + std::to_string(k + 1));
    for (int s = 0; s < t.horizon; ++s) {
      std::vector<double> row{static_cast<double>(s)};
      for (int k = 0; k < m; ++k) row.push_back(t.actions[s][k]);
      for (int k = 0; k < n; ++k) row.push_back(t.states[s][k]);
      rep.table.rows.push_back(std::move(row));
    }
  }
  return rep;
}

SolveResult solve_result_from_json(const json& j) {
  SolveResult r;
  r.converged = j.at("converged").get<bool>();
  r.objective = num(j.at("objective"));
  r.kkt_residual = num(j.at("kkt_residual"));
  r.constraint_violation = num(j.at("constraint_violation"));
  r.iterations = j.at("iterations").get<int>();
  r.outer_iterations = j.at("outer_iterations").get<int>();
  for (const auto& v : j.at("objective_history")) r.objective_history.push_back(num(v));
  r.coupling_duals = vec_list_from(j.at("coupling_duals"));
  r.state_lower_duals = vec_list_from(j.at("state_lower_duals"));
  r.state_upper_duals = vec_list_from(j.at("state_upper_duals"));
  r.trajectory = trajectory_from_json(j.at("trajectory"));
  return r;
}

Report make_report(const RiccatiSolution& r) {
  Report rep;
  rep.type = "riccati";
  rep.body = {{"type", rep.type},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"spectral_radius_A", r.spectral_radius_A},
              {"spectral_warning", r.spectral_warning},
              {"residual_history", r.residual_history},
              {"P", to_json(r.P)},
              {"K", to_json(r.K)}};
  rep.table.header = {"iteration", "residual"};
  for (size_t k = 0; k < r.residual_history.size(); ++k)
    rep.table.rows.push_back({static_cast<double>(k + 1), r.residual_history[k]});
  return rep;
}

RiccatiSolution riccati_from_json(const json& j) {
  RiccatiSolution r;
  r.iterations = j.at("iterations").get<int>();
  r.residual = num(j.at("residual"));
  r.spectral_radius_A = num(j.at("spectral_radius_A"));
  r.spectral_warning = j.at("spectral_warning").get<bool>();
  for (const auto& v : j.at("residual_history")) r.residual_history.push_back(num(v));
  r.P = mat_from_json(j.at("P"));
  r.K = mat_from_json(j.at("K"));
  return r;
}

Report make_report(const ViSummary& r) {
  Report rep;
  rep.type = "value-iteration";
  rep.body = {{"type", rep.type},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"delta", r.delta},
              {"bellman_residual", r.bellman_residual},
              {"num_states", r.num_states},
              {"num_actions", r.num_actions},
              {"clamped_successors", r.clamped_successors},
              {"delta_history", r.delta_history}};
  rep.table.header = {"iteration", "delta"};
  for (size_t k = 0; k < r.delta_history.size(); ++k)
    rep.table.rows.push_back({static_cast<double>(k + 1), r.delta_history[k]});
  return rep;
}

ViSummary vi_summary_from_json(const json& j) {
  ViSummary r;
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.delta = num(j.at("delta"));
  r.bellman_residual = num(j.at("bellman_residual"));
  r.num_states = j.at("num_states").get<std::int64_t>();
  r.num_actions = j.at("num_actions").get<int>();
  r.clamped_successors = j.at("clamped_successors").get<std::int64_t>();
  for (const auto& v : j.at("delta_history")) r.delta_history.push_back(num(v));
  return r;
}

std::string render_csv(const Table& t) {
  std::string out;
  for (size_t k = 0; k < t.header.size(); ++k) out += (k ? "," : "") + t.header[k];
  out += "\n";
  for (const auto& row : t.rows) {
    for (size_t k = 0; k < row.size(); ++k) {
      if (k) out += ",";
      out += format_double(row[k]);
    }
    out += "\n";
  }
  return out;
}

std::string render(const Report& r, Format f) {
  switch (f) {
    case Format::kJson: return r.body.dump(2) + "\n";
    case Format::kCsv: return render_csv(r.table);
    case Format::kText: {
      std::string out;
      flatten_text(r.body, "", &out);
      return out;
    }
  }
  return {};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

void emit_report(const Report& r, Format f, const std::string& path) {
  write_file(path, render(r, f));
}

}  // namespace dpg::cli
