#include "bevar/cli_io.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace bevar {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Field-level parser: collects errors with paths and records filled defaults.
class Parser {
 public:
  Parser(std::vector<std::string>& errors, std::vector<std::string>& defaulted)
      : errors_(errors), defaulted_(defaulted) {}

  void error(const std::string& path, const std::string& msg) {
    errors_.push_back(path + ": " + msg);
  }

  void reject_unknown(const json& obj, const std::string& path,
                      std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* k : known)
        if (key == k) ok = true;
      if (!ok) error(join_path(path, key), "unknown key");
    }
  }

  const json* object(const json& parent, const std::string& path,
                     const char* key) {
    if (!parent.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return nullptr;
    }
    if (!parent.at(key).is_object()) {
      error(join_path(path, key), "must be an object");
      return nullptr;
    }
    return &parent.at(key);
  }

  double number(const json& obj, const std::string& path, const char* key,
                double def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    if (!obj.at(key).is_number()) {
      error(join_path(path, key), "must be a number");
      return def;
    }
    return obj.at(key).get<double>();
  }

  int integer(const json& obj, const std::string& path, const char* key,
              int def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    if (!obj.at(key).is_number_integer()) {
      error(join_path(path, key), "must be an integer");
      return def;
    }
    return obj.at(key).get<int>();
  }

  bool boolean(const json& obj, const std::string& path, const char* key,
               bool def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    if (!obj.at(key).is_boolean()) {
      error(join_path(path, key), "must be a boolean");
      return def;
    }
    return obj.at(key).get<bool>();
  }

  std::string str(const json& obj, const std::string& path, const char* key,
                  const std::string& def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    if (!obj.at(key).is_string()) {
      error(join_path(path, key), "must be a string");
      return def;
    }
    return obj.at(key).get<std::string>();
  }

  std::vector<double> num_array(const json& obj, const std::string& path,
                                const char* key,
                                const std::vector<double>& def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      error(join_path(path, key), "must be an array of numbers");
      return def;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) {
        error(join_path(path, key), "must be an array of numbers");
        return def;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> int_array(const json& obj, const std::string& path,
                             const char* key, const std::vector<int>& def) {
    if (!obj.contains(key)) {
      defaulted_.push_back(join_path(path, key));
      return def;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      error(join_path(path, key), "must be an array of integers");
      return def;
    }
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        error(join_path(path, key), "must be an array of integers");
        return def;
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

 private:
  std::vector<std::string>& errors_;
  std::vector<std::string>& defaulted_;
};

FieldPreset parse_preset(Parser& P, const json* obj, const std::string& path,
                         FieldPreset def) {
  if (!obj) return def;
  P.reject_unknown(*obj, path,
                   {"preset", "amplitude", "center", "width", "switch_time"});
  FieldPreset out = def;
  const std::string kind = P.str(*obj, path, "preset",
                                 preset_kind_name(def.kind));
  if (auto k = preset_kind_from_name(kind))
    out.kind = *k;
  else
    P.error(join_path(path, "preset"), "unknown (" + kind + ")");
  out.amplitude = P.number(*obj, path, "amplitude", def.amplitude);
  const std::vector<double> c =
      P.num_array(*obj, path, "center", {def.center.x0, def.center.x1});
  if (!c.empty()) {
    out.center.x0 = c[0];
    out.center.x1 = c.size() > 1 ? c[1] : 0.0;
  }
  out.width = P.number(*obj, path, "width", def.width);
  if (out.kind == FieldPreset::Kind::gaussian_bump && !(out.width > 0.0))
    P.error(join_path(path, "width"), "must be > 0");
  out.switch_time = P.number(*obj, path, "switch_time", def.switch_time);
  return out;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  RunConfig cfg;
  Parser P(result.errors, result.defaulted);

  const json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object()) {
    result.errors.push_back("config: not a valid JSON object");
    return result;
  }
  P.reject_unknown(root, "",
                   {"domain", "time", "robin_alpha", "potential", "data",
                    "solver", "reference", "output"});

  if (const json* dom = P.object(root, "", "domain")) {
    P.reject_unknown(*dom, "domain", {"dim", "lengths", "cells"});
    cfg.dim = P.integer(*dom, "domain", "dim", cfg.dim);
    if (cfg.dim != 1 && cfg.dim != 2)
      P.error("domain.dim", "must be 1 or 2");
    cfg.lengths = P.num_array(*dom, "domain", "lengths",
                              std::vector<double>(cfg.dim, 1.0));
    cfg.cells = P.int_array(*dom, "domain", "cells",
                            std::vector<int>(cfg.dim, 64));
    if (cfg.dim == 1 || cfg.dim == 2) {
      if (static_cast<int>(cfg.lengths.size()) != cfg.dim)
        P.error("domain.lengths", "size must equal dim");
      if (static_cast<int>(cfg.cells.size()) != cfg.dim)
        P.error("domain.cells", "size must equal dim");
    }
    for (double L : cfg.lengths)
      if (!(L > 0.0)) P.error("domain.lengths", "entries must be > 0");
    for (int c : cfg.cells)
      if (c < 2) P.error("domain.cells", "entries must be >= 2");
  } else {
    cfg.lengths = {1.0};
    cfg.cells = {64};
  }

  if (const json* tm = P.object(root, "", "time")) {
    P.reject_unknown(*tm, "time", {"T", "steps"});
    cfg.T = P.number(*tm, "time", "T", cfg.T);
    cfg.steps = P.integer(*tm, "time", "steps", cfg.steps);
    if (!(cfg.T > 0.0)) P.error("time.T", "must be > 0");
    if (cfg.steps < 1) P.error("time.steps", "must be >= 1");
  }

  cfg.robin_alpha = P.number(root, "", "robin_alpha", cfg.robin_alpha);
  if (!(cfg.robin_alpha > 0.0)) P.error("robin_alpha", "must be > 0");

  if (const json* pot = P.object(root, "", "potential")) {
    P.reject_unknown(*pot, "potential", {"family", "p", "a", "a0", "table"});
    const std::string fam =
        P.str(*pot, "potential", "family", family_name(cfg.family));
    if (auto f = family_from_name(fam))
      cfg.family = *f;
    else
      P.error("potential.family", "unknown (" + fam + ")");
    cfg.p = P.number(*pot, "potential", "p", cfg.p);
    if (cfg.family == PotentialFamily::power && !(cfg.p > 1.0))
      P.error("potential.p", "must be > 1");
    if (const json* a = P.object(*pot, "potential", "a")) {
      P.reject_unknown(*a, "potential.a", {"kind", "base", "amplitude"});
      const std::string kind = P.str(*a, "potential.a", "kind",
                                     coefficient_kind_name(cfg.a.kind));
      if (auto k = coefficient_kind_from_name(kind))
        cfg.a.kind = *k;
      else
        P.error("potential.a.kind", "unknown (" + kind + ")");
      cfg.a.base = P.number(*a, "potential.a", "base", cfg.a.base);
      cfg.a.amplitude =
          P.number(*a, "potential.a", "amplitude", cfg.a.amplitude);
    }
    cfg.a0 = P.number(*pot, "potential", "a0", cfg.a0);
    if ((cfg.family == PotentialFamily::log_type ||
         cfg.family == PotentialFamily::exp_type) &&
        !(cfg.a0 > 0.0))
      P.error("potential.a0", "must be > 0");
    if (pot->contains("table")) {
      const json& tab = pot->at("table");
      if (!tab.is_array()) {
        P.error("potential.table", "must be an array of [r, lo, hi] rows");
      } else {
        for (std::size_t i = 0; i < tab.size(); ++i) {
          const json& row = tab[i];
          if (!row.is_array() || row.size() != 3 || !row[0].is_number() ||
              !row[1].is_number() || !row[2].is_number()) {
            P.error("potential.table[" + std::to_string(i) + "]",
                    "must be [r, lo, hi]");
            continue;
          }
          cfg.table.push_back(Breakpoint{row[0].get<double>(),
                                         row[1].get<double>(),
                                         row[2].get<double>()});
        }
      }
    } else if (cfg.family == PotentialFamily::custom_tabulated) {
      P.error("potential.table", "required for custom_tabulated");
    }
  }

  if (const json* dat = P.object(root, "", "data")) {
    P.reject_unknown(*dat, "data", {"f", "y0", "box"});
    cfg.f_preset = parse_preset(P, P.object(*dat, "data", "f"), "data.f",
                                cfg.f_preset);
    FieldPreset y0_def = cfg.y0_preset;
    cfg.y0_preset =
        parse_preset(P, P.object(*dat, "data", "y0"), "data.y0", y0_def);
    if (cfg.y0_preset.kind == FieldPreset::Kind::step_in_time)
      P.error("data.y0.preset", "step_in_time is not a valid initial state");
    if (dat->contains("box")) {
      const json& b = dat->at("box");
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() ||
          !b[1].is_number()) {
        P.error("data.box", "must be [y_m, y_M]");
      } else {
        cfg.box = {b[0].get<double>(), b[1].get<double>()};
        if (!(cfg.box->first < cfg.box->second))
          P.error("data.box", "requires y_m < y_M");
      }
    }
  }

  if (const json* sol = P.object(root, "", "solver")) {
    P.reject_unknown(*sol, "solver",
                     {"lambda_schedule", "sigma_schedule", "grad_tol",
                      "gap_tol", "max_inner_iters", "backtracking",
                      "warm_start"});
    cfg.solver.lambda_schedule = P.num_array(
        *sol, "solver", "lambda_schedule", cfg.solver.lambda_schedule);
    cfg.solver.sigma_schedule = P.num_array(*sol, "solver", "sigma_schedule",
                                            cfg.solver.sigma_schedule);
    cfg.solver.grad_tol =
        P.number(*sol, "solver", "grad_tol", cfg.solver.grad_tol);
    cfg.solver.gap_tol = P.number(*sol, "solver", "gap_tol", cfg.solver.gap_tol);
    cfg.solver.max_inner_iters =
        P.integer(*sol, "solver", "max_inner_iters", cfg.solver.max_inner_iters);
    if (const json* bt = P.object(*sol, "solver", "backtracking")) {
      P.reject_unknown(*bt, "solver.backtracking",
                       {"initial_step", "shrink", "sufficient_decrease"});
      cfg.solver.backtracking.initial_step =
          P.number(*bt, "solver.backtracking", "initial_step",
                   cfg.solver.backtracking.initial_step);
      cfg.solver.backtracking.shrink = P.number(
          *bt, "solver.backtracking", "shrink", cfg.solver.backtracking.shrink);
      cfg.solver.backtracking.sufficient_decrease =
          P.number(*bt, "solver.backtracking", "sufficient_decrease",
                   cfg.solver.backtracking.sufficient_decrease);
    }
    cfg.solver.warm_start =
        P.boolean(*sol, "solver", "warm_start", cfg.solver.warm_start);
    try {
      cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
      P.error("solver", e.what());
    }
  }

  if (const json* ref = P.object(root, "", "reference")) {
    P.reject_unknown(*ref, "reference", {"lambda", "newton_tol"});
    cfg.reference_lambda =
        P.number(*ref, "reference", "lambda", cfg.reference_lambda);
    cfg.reference_newton_tol =
        P.number(*ref, "reference", "newton_tol", cfg.reference_newton_tol);
    if (!(cfg.reference_lambda > 0.0))
      P.error("reference.lambda", "must be > 0");
    if (!(cfg.reference_newton_tol > 0.0))
      P.error("reference.newton_tol", "must be > 0");
  }

  if (const json* out = P.object(root, "", "output")) {
    P.reject_unknown(*out, "output", {"directory", "formats"});
    cfg.output_directory =
        P.str(*out, "output", "directory", cfg.output_directory);
    if (out->contains("formats")) {
      const json& f = out->at("formats");
      if (!f.is_array()) {
        P.error("output.formats", "must be an array of strings");
      } else {
        cfg.output_formats.clear();
        for (const auto& e : f) {
          if (!e.is_string()) {
            P.error("output.formats", "must be an array of strings");
            break;
          }
          const std::string s = e.get<std::string>();
          if (s != "json" && s != "csv")
            P.error("output.formats", "unknown format (" + s + ")");
          cfg.output_formats.push_back(s);
        }
      }
    } else {
      result.defaulted.push_back("output.formats");
    }
  }

  if (result.errors.empty()) {
    cfg.defaulted_fields = result.defaulted;
    result.config = cfg;
  }
  return result;
}

nlohmann::ordered_json serialize_config(const RunConfig& cfg) {
  ojson j;
  j["domain"] = {{"dim", cfg.dim}, {"lengths", cfg.lengths},
                 {"cells", cfg.cells}};
  j["time"] = {{"T", cfg.T}, {"steps", cfg.steps}};
  j["robin_alpha"] = cfg.robin_alpha;
  ojson pot;
  pot["family"] = family_name(cfg.family);
  pot["p"] = cfg.p;
  pot["a"] = {{"kind", coefficient_kind_name(cfg.a.kind)},
              {"base", cfg.a.base},
              {"amplitude", cfg.a.amplitude}};
  pot["a0"] = cfg.a0;
  if (!cfg.table.empty()) {
    ojson tab = ojson::array();
    for (const Breakpoint& b : cfg.table)
      tab.push_back({b.r, b.lo, b.hi});
    pot["table"] = tab;
  }
  j["potential"] = pot;
  const auto preset_json = [](const FieldPreset& p) {
    return ojson{{"preset", preset_kind_name(p.kind)},
                 {"amplitude", p.amplitude},
                 {"center", {p.center.x0, p.center.x1}},
                 {"width", p.width},
                 {"switch_time", p.switch_time}};
  };
  ojson dat;
  dat["f"] = preset_json(cfg.f_preset);
  dat["y0"] = preset_json(cfg.y0_preset);
  if (cfg.box) dat["box"] = {cfg.box->first, cfg.box->second};
  j["data"] = dat;
  j["solver"] = {
      {"lambda_schedule", cfg.solver.lambda_schedule},
      {"sigma_schedule", cfg.solver.sigma_schedule},
      {"grad_tol", cfg.solver.grad_tol},
      {"gap_tol", cfg.solver.gap_tol},
      {"max_inner_iters", cfg.solver.max_inner_iters},
      {"backtracking",
       {{"initial_step", cfg.solver.backtracking.initial_step},
        {"shrink", cfg.solver.backtracking.shrink},
        {"sufficient_decrease", cfg.solver.backtracking.sufficient_decrease}}},
      {"warm_start", cfg.solver.warm_start}};
  j["reference"] = {{"lambda", cfg.reference_lambda},
                    {"newton_tol", cfg.reference_newton_tol}};
  j["output"] = {{"directory", cfg.output_directory},
                 {"formats", cfg.output_formats}};
  return j;
}

PotentialSpec make_potential(const RunConfig& cfg) {
  switch (cfg.family) {
    case PotentialFamily::quadratic:
      return PotentialSpec::quadratic();
    case PotentialFamily::power:
      return PotentialSpec::power(cfg.p);
    case PotentialFamily::log_type:
      return PotentialSpec::log_type(cfg.a, cfg.a0);
    case PotentialFamily::exp_type:
      return PotentialSpec::exp_type(cfg.a, cfg.a0);
    case PotentialFamily::abs_value:
      return PotentialSpec::abs_value();
    case PotentialFamily::custom_tabulated:
      return PotentialSpec::custom_tabulated(cfg.table);
  }
  throw std::invalid_argument("make_potential: unknown family");
}

ProblemData make_problem(const RunConfig& cfg) {
  auto grid = std::make_shared<const Grid>(
      build_grid(cfg.dim, cfg.lengths, cfg.cells));
  auto op = build_robin_operator(grid, cfg.robin_alpha);
  return make_problem_data(grid, op, cfg.T, cfg.steps, cfg.f_preset,
                           cfg.y0_preset, cfg.box);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const RunConfig& cfg, const std::string& out_dir) {
  fs::path dir = out_dir.empty() ? fs::path(cfg.output_directory)
                                 : fs::path(out_dir);
  fs::create_directories(dir);
  return dir;
}

bool wants(const RunConfig& cfg, const std::string& format) {
  for (const std::string& f : cfg.output_formats)
    if (f == format) return true;
  return false;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ojson report_json(const RunConfig& cfg, const SolveReport& rep,
                  const VerifyRecord& verify,
                  const std::vector<std::string>& defaulted, double total_ms) {
  ojson j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = serialize_config(cfg);
  j["defaulted"] = defaulted;
  ojson stages = ojson::array();
  ojson stage_ms = ojson::array();
  for (const StageStats& s : rep.stages) {
    stages.push_back({{"lambda", s.lambda},
                      {"sigma", s.sigma},
                      {"iterations", s.iterations},
                      {"grad_norm", s.grad_norm},
                      {"J", s.J},
                      {"unregularized_gap", s.unregularized_gap},
                      {"converged", s.converged}});
    stage_ms.push_back(s.wall_ms);
  }
  j["report"] = {{"final_J", rep.final_J},
                 {"pointwise_gap", rep.pointwise_gap},
                 {"energy_residual", rep.energy_residual},
                 {"inclusion_violation", rep.inclusion_violation},
                 {"constraint_residual", rep.constraint_residual},
                 {"verdict", rep.verdict},
                 {"partial", rep.partial},
                 {"failed_stage", rep.failed_stage},
                 {"zero_data_short_circuit", rep.zero_data_short_circuit},
                 {"warnings", rep.warnings},
                 {"stages", stages}};
  j["verify"] = {{"constraint_residual", verify.constraint_residual},
                 {"energy_residual", verify.energy_residual},
                 {"pointwise_gap", verify.gap},
                 {"constraint_ok", verify.constraint_ok},
                 {"energy_ok", verify.energy_ok},
                 {"gap_ok", verify.gap_ok},
                 {"verdict", verify.verdict},
                 {"box_checked", verify.box_checked},
                 {"box_ok", verify.box_ok},
                 {"y_min", verify.y_min},
                 {"y_max", verify.y_max}};
  // Wall-clock isolated in one sub-record so determinism checks can strip it.
  j["timings"] = {{"total_ms", total_ms}, {"stage_ms", stage_ms}};
  return j;
}

std::string trajectory_csv(const Trajectory& traj, const ProblemData& data,
                           const PotentialSpec& spec) {
  const Grid& g = *data.grid;
  std::string out = g.dim == 1 ? "k,t,node,x,y,w,midpoint_gap\n"
                               : "k,t,node,x,y_coord,y,w,midpoint_gap\n";
  const std::vector<Field> ybar = midpoint_states(traj);
  for (int k = 0; k <= data.steps; ++k) {
    const double t = data.time_at(k);
    for (int i = 0; i < g.node_count(); ++i) {
      double w = 0.0, gap = 0.0;
      if (k >= 1) {
        w = traj.w[k][i];
        gap = spec.j(t, g.coords[i], ybar[k][i]) +
              spec.conjugate(t, g.coords[i], w) - ybar[k][i] * w;
      }
      out += std::to_string(k);
      out += ',';
      out += fmt17(t);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += fmt17(g.coords[i].x0);
      out += ',';
      if (g.dim == 2) {
        out += fmt17(g.coords[i].x1);
        out += ',';
      }
      out += fmt17(traj.y[k][i]);
      out += ',';
      out += fmt17(w);
      out += ',';
      out += fmt17(gap);
      out += '\n';
    }
  }
  return out;
}

}  // namespace

int run_solve(const RunConfig& cfg, const std::string& out_dir) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    PotentialSpec spec = make_potential(cfg);
    ProblemData data = make_problem(cfg);
    auto [traj, report] = continuation_solve(data, spec, cfg.solver);
    VerifyTolerances tols;
    tols.gap_tol = cfg.solver.gap_tol;
    const VerifyRecord verify = verify_weak_solution(traj, data, spec, tols);
    const double total_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
    const fs::path dir = resolve_out_dir(cfg, out_dir);
    if (wants(cfg, "json"))
      write_text(dir / "report.json",
                 report_json(cfg, report, verify, cfg.defaulted_fields,
                             total_ms)
                         .dump(2) +
                     "\n");
    if (wants(cfg, "csv"))
      write_text(dir / "trajectory.csv", trajectory_csv(traj, data, spec));
    return verify.verdict ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_compare(const RunConfig& cfg, const std::string& out_dir) {
  try {
    PotentialSpec spec = make_potential(cfg);
    ProblemData data = make_problem(cfg);
    auto [traj_v, report] = continuation_solve(data, spec, cfg.solver);
    NewtonConfig ncfg;
    ncfg.tol = cfg.reference_newton_tol;
    const Trajectory traj_r =
        solve_reference(data, spec, cfg.reference_lambda, ncfg);

    const Grid& g = *data.grid;
    const double dt = data.dt();
    std::string csv = "k,t,l2_diff,vdual_diff\n";
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= data.steps; ++k) {
      const Field diff = traj_v.y[k] - traj_r.y[k];
      const double l2 = g.l2_norm(diff);
      csv += std::to_string(k) + "," + fmt17(data.time_at(k)) + "," +
             fmt17(l2) + "," + fmt17(data.op->vdual_norm(diff)) + "\n";
      if (k >= 1) {
        num += dt * l2 * l2;
        den += dt * g.l2_norm(traj_r.y[k]) * g.l2_norm(traj_r.y[k]);
      }
    }
    const double dist = std::sqrt(num);
    const double rel = den > 0.0 ? dist / std::sqrt(den) : dist;

    const fs::path dir = resolve_out_dir(cfg, out_dir);
    if (wants(cfg, "csv")) write_text(dir / "comparison.csv", csv);
    if (wants(cfg, "json")) {
      ojson j;
      j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
      j["config"] = serialize_config(cfg);
      j["comparison"] = {{"relative_l2_distance", rel},
                         {"l2_distance", dist},
                         {"reference_lambda", cfg.reference_lambda},
                         {"variational_gap", report.pointwise_gap}};
      write_text(dir / "comparison_summary.json", j.dump(2) + "\n");
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

std::optional<SweepAxis> sweep_axis_from_name(const std::string& name) {
  if (name == "lambda") return SweepAxis::lambda;
  if (name == "sigma") return SweepAxis::sigma;
  if (name == "steps") return SweepAxis::steps;
  if (name == "cells") return SweepAxis::cells;
  return std::nullopt;
}

int run_sweep(const RunConfig& cfg, SweepAxis axis,
              const std::vector<double>& values, const std::string& out_dir,
              int jobs) {
  try {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0))
        throw std::invalid_argument("sweep values must be positive");
      if (i > 0 && values[i] == values[i - 1])
        throw std::invalid_argument("sweep values must be distinct");
    }

    struct Row {
      double value = 0.0;
      double gap = 0.0;
      double energy = 0.0;
      long iterations = 0;
      double runtime_ms = 0.0;
      std::string status = "ok";
    };
    std::vector<Row> rows(values.size());

    const auto run_one = [&](std::size_t idx) {
      Row& row = rows[idx];
      row.value = values[idx];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        RunConfig c = cfg;
        switch (axis) {
          case SweepAxis::lambda:
            c.solver.lambda_schedule = {values[idx]};
            break;
          case SweepAxis::sigma:
            c.solver.sigma_schedule = {values[idx]};
            break;
          case SweepAxis::steps:
            c.steps = static_cast<int>(values[idx]);
            break;
          case SweepAxis::cells:
            for (int& n : c.cells) n = static_cast<int>(values[idx]);
            break;
        }
        PotentialSpec spec = make_potential(c);
        ProblemData data = make_problem(c);
        auto [traj, rep] = continuation_solve(data, spec, c.solver);
        row.gap = rep.pointwise_gap;
        row.energy = rep.energy_residual;
        for (const StageStats& s : rep.stages) row.iterations += s.iterations;
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      row.runtime_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    };

    if (jobs <= 1) {
      for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      const int nthreads =
          std::min<std::size_t>(jobs, std::max<std::size_t>(values.size(), 1));
      for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < values.size();
               i = next.fetch_add(1))
            run_one(i);
        });
      for (auto& th : pool) th.join();
    }

    std::string csv = "value,pointwise_gap,energy_residual,iterations,runtime_ms,status\n";
    for (const Row& r : rows) {
      csv += fmt17(r.value) + "," + fmt17(r.gap) + "," + fmt17(r.energy) +
             "," + std::to_string(r.iterations) + "," + fmt17(r.runtime_ms) +
             ",\"" + r.status + "\"\n";
    }
    const fs::path dir = resolve_out_dir(cfg, out_dir);
    write_text(dir / "sweep.csv", csv);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_check_potential(const RunConfig& cfg, const std::string& out_dir) {
  (void)out_dir;
  try {
    PotentialSpec spec = make_potential(cfg);
    const FenchelReport fen = check_fenchel_young(spec, 10000);
    const CoercivityReport coer = check_coercivity(spec, 1e3);
    const SymmetryCert sym = check_symmetry(spec, 10.0, 1.0, 0.0);
    const AffineMinorant min = affine_minorant(spec);

    const bool fenchel_ok =
        fen.max_inequality_violation <= 1e-8 && fen.max_equality_gap <= 1e-6;
    std::printf("check               status  detail\n");
    std::printf("fenchel_young       %-6s  max_violation=%s equality_gap=%s\n",
                fenchel_ok ? "pass" : "FAIL",
                fmt17(fen.max_inequality_violation).c_str(),
                fmt17(fen.max_equality_gap).c_str());
    std::printf("coercivity          %-6s  superlinear_j=%d superlinear_jstar=%d\n",
                coer.weakly_coercive() ? "pass" : "warn", coer.superlinear_j,
                coer.superlinear_jstar);
    std::printf("symmetry            %-6s  gamma1=1 gamma2=0 worst_r=%s\n",
                sym.holds ? "pass" : "warn",
                fmt17(sym.worst_ratio_location).c_str());
    std::printf("affine_minorant     info    k1=%s k2=%s k3=%s k4=%s\n",
                fmt17(min.k1).c_str(), fmt17(min.k2).c_str(),
                fmt17(min.k3).c_str(), fmt17(min.k4).c_str());
    return fenchel_ok ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace bevar
