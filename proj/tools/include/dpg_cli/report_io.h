// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

// Serialization of solver and certification reports. JSON is lossless and
// reads back to the same values; CSV and text are derived views.

#ifndef DPG_CLI_REPORT_IO_H_
#define DPG_CLI_REPORT_IO_H_

#include <string>

#include "dpg/equilibrium.h"
#include "dpg/lq.h"
#include "dpg/potential.h"
#include "dpg/scenarios.h"
#include "dpg/traj_opt.h"
#include "dpg/value_iteration.h"
#include "json.hpp"

namespace dpg::cli {

using nlohmann::json;

enum class Format { kJson, kCsv, kText };
Format parse_format(const std::string& s);  // ValidationError
const char* format_extension(Format f);

struct ViSummary {
  bool converged = false;
  int iterations = 0;
  double delta = 0.0;
  double bellman_residual = 0.0;
  std::int64_t num_states = 0;
  int num_actions = 0;
  std::int64_t clamped_successors = 0;
  std::vector<double> delta_history;
};
ViSummary summarize(const ViResult& r, const Grid& grid);

// A report ready for emission: its type tag, the lossless body and the
// tabular view used for CSV.
struct Report {
  std::string type;
  json body;
  Table table;
};

Report make_report(const ConservativityReport& r);
Report make_report(const NeReport& r);
Report make_report(const SolveResult& r, const ScenarioBundle* bundle = nullptr);
Report make_report(const RiccatiSolution& r);
Report make_report(const ViSummary& r);

json to_json(const Vec& v);
json to_json(const Mat& m);
json to_json(const Trajectory& t);
Vec vec_from_json(const json& j);
Mat mat_from_json(const json& j);
Trajectory trajectory_from_json(const json& j);

ConservativityReport conservativity_from_json(const json& j);
NeReport ne_report_from_json(const json& j);
SolveResult solve_result_from_json(const json& j);
RiccatiSolution riccati_from_json(const json& j);
ViSummary vi_summary_from_json(const json& j);

// %.17g
std::string format_double(double v);
std::string render_csv(const Table& t);
std::string render(const Report& r, Format f);

// Throws IoError when the file cannot be written.
void write_file(const std::string& path, const std::string& content);
void emit_report(const Report& r, Format f, const std::string& path);

}  // namespace dpg::cli

#endif  // DPG_CLI_REPORT_IO_H_
