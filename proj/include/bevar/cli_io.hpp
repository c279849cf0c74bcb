// Configuration parsing (JSON, unknown keys rejected, field-path errors),
// run orchestration (solve / compare / sweep / check-potential) and
// bit-stable serialization of trajectories and reports.
//
// Exit statuses: 0 success / verdict true, 1 verdict false or failed check,
// 2 invalid config, 3 internal error.

#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bevar/reference.hpp"
#include "bevar/solver.hpp"

namespace bevar {

inline constexpr const char* kToolName = "bevar";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  // domain
  int dim = 1;
  std::vector<double> lengths{1.0};
  std::vector<int> cells{64};
  // time
  double T = 1.0;
  int steps = 100;
  // operator
  double robin_alpha = 1.0;
  // potential
  PotentialFamily family = PotentialFamily::quadratic;
  double p = 2.0;
  CoefficientField a;
  double a0 = 1.0;
  std::vector<Breakpoint> table;
  // data
  FieldPreset f_preset;
  FieldPreset y0_preset;
  std::optional<std::pair<double, double>> box;
  // solver
  SolverConfig solver;
  // reference
  double reference_lambda = 1e-4;
  double reference_newton_tol = 1e-12;
  // output
  std::string output_directory = "out";
  std::vector<std::string> output_formats{"json", "csv"};
  // metadata: field paths that were filled with defaults during parsing
  std::vector<std::string> defaulted_fields;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;     // "field.path: message"
  std::vector<std::string> defaulted;  // paths filled with defaults
  bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& text);
nlohmann::ordered_json serialize_config(const RunConfig& cfg);

// Construction helpers (throw std::invalid_argument on bad parameters).
PotentialSpec make_potential(const RunConfig& cfg);
ProblemData make_problem(const RunConfig& cfg);

// Orchestration; out_dir overrides cfg.output_directory when non-empty.
// All return process exit statuses.
int run_solve(const RunConfig& cfg, const std::string& out_dir = "");
int run_compare(const RunConfig& cfg, const std::string& out_dir = "");

enum class SweepAxis { lambda, sigma, steps, cells };
std::optional<SweepAxis> sweep_axis_from_name(const std::string& name);

int run_sweep(const RunConfig& cfg, SweepAxis axis,
              const std::vector<double>& values,
              const std::string& out_dir = "", int jobs = 1);

int run_check_potential(const RunConfig& cfg, const std::string& out_dir = "");

// 17-significant-digit decimal form used by every CSV writer.
std::string fmt17(double v);

}  // namespace bevar
