// Python bindings for the solver core: potentials and their convex-analysis
// operations, the Robin operator, the state equation, the variational solver
// with its certificates, the implicit-Euler reference solver, and the
// config-driven runners.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bevar/cli_io.hpp"

namespace py = pybind11;
using namespace bevar;

namespace {

Point to_point(const std::vector<double>& x) {
  Point p;
  if (!x.empty()) p.x0 = x[0];
  if (x.size() > 1) p.x1 = x[1];
  return p;
}

CoefficientField make_coefficient(const std::string& kind, double base,
                                  double amplitude) {
  const auto k = coefficient_kind_from_name(kind);
  if (!k) throw py::value_error("unknown coefficient kind: " + kind);
  return CoefficientField{*k, base, amplitude};
}

FieldPreset make_preset(const std::string& kind, double amplitude,
                        const std::vector<double>& center, double width,
                        double switch_time) {
  const auto k = preset_kind_from_name(kind);
  if (!k) throw py::value_error("unknown preset: " + kind);
  FieldPreset p;
  p.kind = *k;
  p.amplitude = amplitude;
  p.center = to_point(center);
  p.width = width;
  p.switch_time = switch_time;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kToolVersion;

  py::class_<GraphValue>(m, "GraphValue")
      .def_readonly("lo", &GraphValue::lo)
      .def_readonly("hi", &GraphValue::hi)
      .def("selection", &GraphValue::selection)
      .def("distance", &GraphValue::distance)
      .def("__repr__", [](const GraphValue& g) {
        return "GraphValue(lo=" + std::to_string(g.lo) +
               ", hi=" + std::to_string(g.hi) + ")";
      });

  py::class_<CoefficientField>(m, "CoefficientField")
      .def(py::init(&make_coefficient), py::arg("kind") = "constant",
           py::arg("base") = 1.0, py::arg("amplitude") = 0.0)
      .def("__call__",
           [](const CoefficientField& c, double t, const std::vector<double>& x) {
             return c(t, to_point(x));
           });

  py::class_<PotentialSpec>(m, "PotentialSpec")
      .def_static("quadratic", &PotentialSpec::quadratic)
      .def_static("power", &PotentialSpec::power, py::arg("p"))
      .def_static("log_type", &PotentialSpec::log_type, py::arg("a"),
                  py::arg("a0") = 1.0)
      .def_static("exp_type", &PotentialSpec::exp_type, py::arg("a"),
                  py::arg("a0") = 1.0)
      .def_static("abs_value", &PotentialSpec::abs_value)
      .def_static(
          "custom_tabulated",
          [](const std::vector<std::array<double, 3>>& rows) {
            std::vector<Breakpoint> table;
            for (const auto& r : rows) table.push_back({r[0], r[1], r[2]});
            return PotentialSpec::custom_tabulated(table);
          },
          py::arg("table"))
      .def("family",
           [](const PotentialSpec& s) { return family_name(s.family()); })
      .def("j",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double r) { return s.j(t, to_point(x), r); })
      .def("beta",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double r) { return s.beta(t, to_point(x), r); })
      .def("resolvent",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double lambda, double r) {
             return s.resolvent(t, to_point(x), lambda, r);
           })
      .def("yosida",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double lambda, double r) {
             return s.yosida(t, to_point(x), lambda, r);
           })
      .def("moreau",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double lambda, double r) {
             return s.moreau(t, to_point(x), lambda, r);
           })
      .def("conjugate",
           [](const PotentialSpec& s, double t, const std::vector<double>& x,
              double omega) { return s.conjugate(t, to_point(x), omega); });

  py::class_<ValueSlope>(m, "ValueSlope")
      .def_readonly("value", &ValueSlope::value)
      .def_readonly("slope", &ValueSlope::slope);

  py::class_<RegularizedPotential>(m, "RegularizedPotential")
      .def(py::init<PotentialSpec, double, double>(), py::arg("base"),
           py::arg("lam"), py::arg("sigma"))
      .def_property_readonly("lam", &RegularizedPotential::lambda)
      .def_property_readonly("sigma", &RegularizedPotential::sigma)
      .def("value",
           [](const RegularizedPotential& r, double t,
              const std::vector<double>& x, double v) {
             return r.value(t, to_point(x), v);
           })
      .def("conjugate",
           [](const RegularizedPotential& r, double t,
              const std::vector<double>& x, double w) {
             return r.conjugate(t, to_point(x), w);
           })
      .def("conjugate_value",
           [](const RegularizedPotential& r, double t,
              const std::vector<double>& x, double w) {
             return r.conjugate_value(t, to_point(x), w);
           });

  py::class_<FenchelReport>(m, "FenchelReport")
      .def_readonly("max_inequality_violation",
                    &FenchelReport::max_inequality_violation)
      .def_readonly("max_equality_gap", &FenchelReport::max_equality_gap)
      .def_readonly("samples", &FenchelReport::samples);
  py::class_<SymmetryCert>(m, "SymmetryCert")
      .def_readonly("gamma1", &SymmetryCert::gamma1)
      .def_readonly("gamma2", &SymmetryCert::gamma2)
      .def_readonly("holds", &SymmetryCert::holds)
      .def_readonly("worst_ratio_location", &SymmetryCert::worst_ratio_location)
      .def_readonly("worst_excess", &SymmetryCert::worst_excess);
  py::class_<CoercivityReport>(m, "CoercivityReport")
      .def_readonly("superlinear_j", &CoercivityReport::superlinear_j)
      .def_readonly("superlinear_jstar", &CoercivityReport::superlinear_jstar)
      .def("weakly_coercive", &CoercivityReport::weakly_coercive)
      .def_readonly("j_ratios", &CoercivityReport::j_ratios)
      .def_readonly("jstar_ratios", &CoercivityReport::jstar_ratios);
  py::class_<AffineMinorant>(m, "AffineMinorant")
      .def_readonly("k1", &AffineMinorant::k1)
      .def_readonly("k2", &AffineMinorant::k2)
      .def_readonly("k3", &AffineMinorant::k3)
      .def_readonly("k4", &AffineMinorant::k4);

  m.def(
      "check_fenchel_young",
      [](const PotentialSpec& s, std::int64_t n) {
        return check_fenchel_young(s, n);
      },
      py::arg("spec"), py::arg("sample_count") = 10000);
  m.def("check_symmetry", &check_symmetry, py::arg("spec"),
        py::arg("probe_radius"), py::arg("gamma1"), py::arg("gamma2"));
  m.def("check_coercivity", &check_coercivity, py::arg("spec"),
        py::arg("r_max") = 1e3);
  m.def("affine_minorant", &affine_minorant, py::arg("spec"));

  py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
      .def_property_readonly("dim", [](const Grid& g) { return g.dim; })
      .def_property_readonly("node_count", &Grid::node_count)
      .def_property_readonly("quad_weights",
                             [](const Grid& g) { return g.quad_weights; })
      .def_property_readonly("boundary_nodes",
                             [](const Grid& g) { return g.boundary_nodes; })
      .def_property_readonly(
          "coords",
          [](const Grid& g) {
            Eigen::MatrixXd m(g.node_count(), 2);
            for (int i = 0; i < g.node_count(); ++i) {
              m(i, 0) = g.coords[i].x0;
              m(i, 1) = g.coords[i].x1;
            }
            return m;
          })
      .def("domain_measure", &Grid::domain_measure)
      .def("boundary_measure", &Grid::boundary_measure);

  m.def(
      "build_grid",
      [](int dim, const std::vector<double>& lengths,
         const std::vector<int>& cells) {
        return std::make_shared<Grid>(build_grid(dim, lengths, cells));
      },
      py::arg("dim"), py::arg("lengths"), py::arg("cells"));

  py::class_<RobinOperator, std::shared_ptr<RobinOperator>>(m, "RobinOperator")
      .def_property_readonly("alpha", &RobinOperator::alpha)
      .def("apply", &RobinOperator::apply)
      .def("solve", &RobinOperator::solve, py::arg("rhs"),
           py::arg("tol") = 1e-10)
      .def("v_norm", &RobinOperator::v_norm)
      .def("vdual_inner", &RobinOperator::vdual_inner)
      .def("vdual_norm", &RobinOperator::vdual_norm);

  m.def(
      "build_robin_operator",
      [](std::shared_ptr<Grid> grid, double alpha) {
        return std::make_shared<RobinOperator>(grid, alpha);
      },
      py::arg("grid"), py::arg("alpha"));

  py::class_<FieldPreset>(m, "FieldPreset")
      .def(py::init(&make_preset), py::arg("preset") = "constant",
           py::arg("amplitude") = 0.0,
           py::arg("center") = std::vector<double>{0.5, 0.5},
           py::arg("width") = 0.1, py::arg("switch_time") = 0.0)
      .def("__call__",
           [](const FieldPreset& p, double t, const std::vector<double>& x) {
             return p(t, to_point(x));
           });

  py::class_<ProblemData>(m, "ProblemData")
      .def_property_readonly("steps",
                             [](const ProblemData& d) { return d.steps; })
      .def_property_readonly("T", [](const ProblemData& d) { return d.T; })
      .def_property_readonly("y0", [](const ProblemData& d) { return d.y0; })
      .def("dt", &ProblemData::dt)
      .def("time_at", &ProblemData::time_at);

  m.def(
      "make_problem_data",
      [](std::shared_ptr<Grid> grid, std::shared_ptr<RobinOperator> op,
         double T, int steps, const FieldPreset& f, const FieldPreset& y0,
         std::optional<std::pair<double, double>> box) {
        return make_problem_data(grid, op, T, steps, f, y0, box);
      },
      py::arg("grid"), py::arg("op"), py::arg("T"), py::arg("steps"),
      py::arg("f"), py::arg("y0"), py::arg("box") = py::none());

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("y", [](const Trajectory& t) { return t.y; })
      .def_property_readonly("w", [](const Trajectory& t) { return t.w; })
      .def_property_readonly("steps", &Trajectory::steps);

  m.def("zero_flux", &zero_flux);
  m.def("integrate_state", &integrate_state, py::arg("w"), py::arg("data"));
  m.def("midpoint_states", &midpoint_states);
  m.def("constraint_residual", &constraint_residual);
  m.def("adjoint_gradient", &adjoint_gradient, py::arg("w"), py::arg("data"),
        py::arg("reg"));

  py::class_<BacktrackingParams>(m, "BacktrackingParams")
      .def(py::init<>())
      .def_readwrite("initial_step", &BacktrackingParams::initial_step)
      .def_readwrite("shrink", &BacktrackingParams::shrink)
      .def_readwrite("sufficient_decrease",
                     &BacktrackingParams::sufficient_decrease);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("lambda_schedule", &SolverConfig::lambda_schedule)
      .def_readwrite("sigma_schedule", &SolverConfig::sigma_schedule)
      .def_readwrite("grad_tol", &SolverConfig::grad_tol)
      .def_readwrite("gap_tol", &SolverConfig::gap_tol)
      .def_readwrite("max_inner_iters", &SolverConfig::max_inner_iters)
      .def_readwrite("backtracking", &SolverConfig::backtracking)
      .def_readwrite("warm_start", &SolverConfig::warm_start);

  py::class_<InnerStats>(m, "InnerStats")
      .def_readonly("iterations", &InnerStats::iterations)
      .def_readonly("value_evals", &InnerStats::value_evals)
      .def_readonly("grad_norm", &InnerStats::grad_norm)
      .def_readonly("final_J", &InnerStats::final_J)
      .def_readonly("converged", &InnerStats::converged);
  py::class_<InnerResult>(m, "InnerResult")
      .def_readonly("w", &InnerResult::w)
      .def_readonly("trajectory", &InnerResult::trajectory)
      .def_readonly("stats", &InnerResult::stats);
  py::class_<StageStats>(m, "StageStats")
      .def_readonly("lam", &StageStats::lambda)
      .def_readonly("sigma", &StageStats::sigma)
      .def_readonly("iterations", &StageStats::iterations)
      .def_readonly("grad_norm", &StageStats::grad_norm)
      .def_readonly("J", &StageStats::J)
      .def_readonly("unregularized_gap", &StageStats::unregularized_gap)
      .def_readonly("converged", &StageStats::converged);
  py::class_<GapDetail>(m, "GapDetail")
      .def_readonly("value", &GapDetail::value)
      .def_readonly("infinite", &GapDetail::infinite)
      .def_readonly("worst_k", &GapDetail::worst_k)
      .def_readonly("worst_node", &GapDetail::worst_node)
      .def_readonly("worst_term", &GapDetail::worst_term);
  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("final_J", &SolveReport::final_J)
      .def_readonly("pointwise_gap", &SolveReport::pointwise_gap)
      .def_readonly("energy_residual", &SolveReport::energy_residual)
      .def_readonly("inclusion_violation", &SolveReport::inclusion_violation)
      .def_readonly("constraint_residual", &SolveReport::constraint_residual)
      .def_readonly("stages", &SolveReport::stages)
      .def_readonly("verdict", &SolveReport::verdict)
      .def_readonly("partial", &SolveReport::partial)
      .def_readonly("zero_data_short_circuit",
                    &SolveReport::zero_data_short_circuit)
      .def_readonly("warnings", &SolveReport::warnings);
  py::class_<VerifyRecord>(m, "VerifyRecord")
      .def_readonly("constraint_residual", &VerifyRecord::constraint_residual)
      .def_readonly("energy_residual", &VerifyRecord::energy_residual)
      .def_readonly("gap", &VerifyRecord::gap)
      .def_readonly("verdict", &VerifyRecord::verdict)
      .def_readonly("box_checked", &VerifyRecord::box_checked)
      .def_readonly("box_ok", &VerifyRecord::box_ok)
      .def_readonly("y_min", &VerifyRecord::y_min)
      .def_readonly("y_max", &VerifyRecord::y_max);

  m.def("eval_J", &eval_J, py::arg("w"), py::arg("data"), py::arg("reg"));
  m.def(
      "pointwise_gap",
      [](const Trajectory& t, const ProblemData& d, const PotentialSpec& s) {
        return pointwise_gap(t, d, s);
      },
      py::arg("trajectory"), py::arg("data"), py::arg("spec"));
  m.def("energy_identity_residual", &energy_identity_residual);
  m.def("inner_minimize", &inner_minimize, py::arg("w_init"), py::arg("data"),
        py::arg("reg"), py::arg("config"));
  m.def("continuation_solve", &continuation_solve, py::arg("data"),
        py::arg("spec"), py::arg("config"));
  m.def(
      "verify_weak_solution",
      [](const Trajectory& t, const ProblemData& d, const PotentialSpec& s,
         double constraint_tol, double energy_tol, double gap_tol) {
        VerifyTolerances tol;
        tol.constraint_tol = constraint_tol;
        tol.energy_tol = energy_tol;
        tol.gap_tol = gap_tol;
        return verify_weak_solution(t, d, s, tol);
      },
      py::arg("trajectory"), py::arg("data"), py::arg("spec"),
      py::arg("constraint_tol") = 1e-8, py::arg("energy_tol") = 1e-9,
      py::arg("gap_tol") = 1e-7);

  py::class_<NewtonConfig>(m, "NewtonConfig")
      .def(py::init<>())
      .def_readwrite("tol", &NewtonConfig::tol)
      .def_readwrite("max_iters", &NewtonConfig::max_iters)
      .def_readwrite("damping_min", &NewtonConfig::damping_min);

  m.def(
      "solve_reference",
      [](const ProblemData& d, const PotentialSpec& s, double lambda,
         const NewtonConfig& cfg) { return solve_reference(d, s, lambda, cfg); },
      py::arg("data"), py::arg("spec"), py::arg("lam") = 1e-4,
      py::arg("config") = NewtonConfig{});
  m.def(
      "contraction_check",
      [](const ProblemData& d, const PotentialSpec& s, double lambda,
         const Field& a, const Field& b) {
        return contraction_check(d, s, lambda, a, b);
      },
      py::arg("data"), py::arg("spec"), py::arg("lam"), py::arg("y0_a"),
      py::arg("y0_b"));

  // Config-driven runners (JSON in, artifacts + exit status out).
  py::class_<RunConfig>(m, "RunConfig");
  m.def("parse_config_json", [](const std::string& text) {
    ParseResult r = parse_config(text);
    if (!r.ok()) {
      std::string msg;
      for (const std::string& e : r.errors) msg += e + "\n";
      throw py::value_error(msg);
    }
    return *r.config;
  });
  m.def("run_solve", &run_solve, py::arg("config"), py::arg("out_dir") = "");
  m.def("run_compare", &run_compare, py::arg("config"),
        py::arg("out_dir") = "");
  m.def(
      "run_sweep",
      [](const RunConfig& cfg, const std::string& axis,
         const std::vector<double>& values, const std::string& out_dir,
         int jobs) {
        const auto a = sweep_axis_from_name(axis);
        if (!a) throw py::value_error("unknown sweep axis: " + axis);
        return run_sweep(cfg, *a, values, out_dir, jobs);
      },
      py::arg("config"), py::arg("axis"), py::arg("values"),
      py::arg("out_dir") = "", py::arg("jobs") = 1);
  m.def("run_check_potential", &run_check_potential, py::arg("config"),
        py::arg("out_dir") = "");
}
