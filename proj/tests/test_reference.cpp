#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bevar/reference.hpp"
#include "bevar/solver.hpp"

using namespace bevar;

namespace {

CoefficientField one() { return {CoefficientKind::constant, 1.0, 0.0}; }

ProblemData heat_problem(int cells, int steps, double T = 0.1,
                         double f_amp = 0.0, double y0_amp = 1.0) {
  auto grid = std::make_shared<const Grid>(build_grid(1, {1.0}, {cells}));
  auto op = build_robin_operator(grid, 1.0);
  FieldPreset f{FieldPreset::Kind::constant, f_amp};
  FieldPreset y0{FieldPreset::Kind::gaussian_bump, y0_amp, Point{0.5, 0.0},
                 0.1};
  return make_problem_data(grid, op, T, steps, f, y0);
}

}  // namespace

TEST_CASE("implicit_euler_step: zero data stays zero") {
  ProblemData data = heat_problem(8, 4, 0.1, 0.0, 0.0);
  NewtonConfig cfg;
  for (const PotentialSpec& spec :
       {PotentialSpec::quadratic(), PotentialSpec::log_type(one()),
        PotentialSpec::abs_value()}) {
    const auto [y, w] = implicit_euler_step(Field::Zero(9), data, spec, 1e-3,
                                            1, cfg);
    CHECK(y.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(w.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("implicit_euler_step: quadratic family is a linear solve") {
  ProblemData data = heat_problem(16, 10, 0.1, 0.5);
  NewtonConfig cfg;
  cfg.tol = 1e-12;
  const double lambda = 1e-4;
  const auto [y, w] =
      implicit_euler_step(data.y0, data, PotentialSpec::quadratic(), lambda, 1,
                          cfg);
  // Dense oracle: (I + dt c A) y = y_prev + dt f with c = 1/(1+lambda).
  const int n = data.grid->node_count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  const double c = 1.0 / (1.0 + lambda);
  for (int j = 0; j < n; ++j) {
    Field e = Field::Zero(n);
    e[j] = 1.0;
    M.col(j) += data.dt() * c * data.op->apply(e);
  }
  const Field dense =
      M.fullPivLu().solve(Field(data.y0 + data.dt() * data.f[1]));
  CHECK((y - dense).cwiseAbs().maxCoeff() < 1e-10);
  // Residual of the nonlinear form.
  const Field res = y + data.dt() * data.op->apply(w) -
                    (data.y0 + data.dt() * data.f[1]);
  CHECK(data.grid->l2_norm(res) < 1e-10);
}

TEST_CASE("implicit_euler_step: log family matches a damped fixed point") {
  ProblemData data = heat_problem(32, 20, 0.01, 0.3);
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const double lambda = 1e-3;
  const PotentialSpec spec = PotentialSpec::log_type(one());
  const auto [y, w] = implicit_euler_step(data.y0, data, spec, lambda, 1, cfg);
  const Field res =
      y + data.dt() * data.op->apply(w) - (data.y0 + data.dt() * data.f[1]);
  CHECK(data.grid->l2_norm(res) < 1e-10);

  // Independent oracle: damped fixed-point iteration on
  //   y <- y + theta (rhs - y - dt A beta_lambda(y)).
  const Field rhs = data.y0 + data.dt() * data.f[1];
  const double t1 = data.time_at(1);
  Field z = data.y0;
  const double theta = 0.25;
  for (int it = 0; it < 20000; ++it) {
    Field b(z.size());
    for (int i = 0; i < z.size(); ++i)
      b[i] = spec.yosida(t1, data.grid->coords[i], lambda, z[i]);
    z += theta * (rhs - z - data.dt() * data.op->apply(b));
  }
  CHECK((y - z).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solve_reference: zero data and feasibility") {
  ProblemData zero = heat_problem(8, 5, 0.1, 0.0, 0.0);
  NewtonConfig cfg;
  const Trajectory t =
      solve_reference(zero, PotentialSpec::log_type(one()), 1e-4, cfg);
  for (int k = 0; k <= zero.steps; ++k)
    CHECK(t.y[k].cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  ProblemData data = heat_problem(32, 20, 0.1, 0.4);
  const Trajectory tr =
      solve_reference(data, PotentialSpec::log_type(one()), 1e-4, cfg);
  // Residual per step is the Newton residual divided by dt.
  CHECK(constraint_residual(tr, data) < cfg.tol / data.dt() * 10.0 + 1e-9);
}

TEST_CASE("solve_reference: first-order self convergence (heat)") {
  const PotentialSpec quad = PotentialSpec::quadratic();
  NewtonConfig cfg;
  ProblemData fine = heat_problem(16, 800, 0.1);
  const Trajectory ref = solve_reference(fine, quad, 1e-8, cfg);
  std::vector<double> errs;
  for (int K : {25, 50, 100}) {
    ProblemData coarse = heat_problem(16, K, 0.1);
    const Trajectory t = solve_reference(coarse, quad, 1e-8, cfg);
    double acc = 0.0;
    for (int k = 1; k <= K; ++k) {
      const Field diff = t.y[k] - ref.y[k * (800 / K)];
      acc += coarse.dt() * coarse.grid->weighted_inner(diff, diff);
    }
    errs.push_back(std::sqrt(acc));
  }
  CHECK(errs[0] / errs[1] > 1.7);
  CHECK(errs[1] / errs[2] > 1.7);
}

TEST_CASE("monotone step: Yosida increments align with state increments") {
  ProblemData data = heat_problem(16, 8, 0.1);
  const PotentialSpec lg = PotentialSpec::log_type(one());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double lambda = 1e-3;
  for (int trial = 0; trial < 50; ++trial) {
    Field y1(17), y2(17);
    for (int i = 0; i < 17; ++i) {
      y1[i] = nd(rng);
      y2[i] = nd(rng);
    }
    Field b1(17), b2(17);
    for (int i = 0; i < 17; ++i) {
      b1[i] = lg.yosida(0.05, data.grid->coords[i], lambda, y1[i]);
      b2[i] = lg.yosida(0.05, data.grid->coords[i], lambda, y2[i]);
    }
    CHECK(data.grid->weighted_inner(b1 - b2, y1 - y2) >= -1e-12);
  }
}

TEST_CASE("contraction_check: V' distances are non-increasing") {
  ProblemData data = heat_problem(24, 30, 0.1, 0.2);
  const PotentialSpec quad = PotentialSpec::quadratic();
  const PotentialSpec lg = PotentialSpec::log_type(one());

  // Identical initial states: identically zero distances.
  const auto dz = contraction_check(data, quad, 1e-4, data.y0, data.y0);
  for (double d : dz) CHECK(d == doctest::Approx(0.0));

  // Bump-perturbed initial state.
  Field bumped = data.y0;
  for (int i = 0; i < bumped.size(); ++i) {
    const double x = data.grid->coords[i].x0;
    bumped[i] += 0.5 * std::exp(-40.0 * (x - 0.3) * (x - 0.3));
  }
  for (const PotentialSpec& spec : {quad, lg}) {
    const auto d = contraction_check(data, spec, 1e-4, data.y0, bumped);
    REQUIRE(d.size() == static_cast<std::size_t>(data.steps) + 1);
    const double slack = 1e-12 * (1.0 + d[0]);
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] <= d[k - 1] + slack);
    CHECK(d.back() < d.front());
  }

  // Two random initial fields, log family.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 0.5);
  Field ya(data.y0.size()), yb(data.y0.size());
  for (int i = 0; i < ya.size(); ++i) {
    ya[i] = nd(rng);
    yb[i] = nd(rng);
  }
  const auto d = contraction_check(data, lg, 1e-4, ya, yb);
  const double slack = 1e-12 * (1.0 + d[0]);
  for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] <= d[k - 1] + slack);
}

TEST_CASE("reference vs variational: O(dt) agreement on the heat case") {
  ProblemData data = heat_problem(32, 40, 0.1);
  SolverConfig scfg;
  scfg.lambda_schedule = {1e-2, 1e-4, 1e-6};
  scfg.sigma_schedule = {1e-2, 1e-4, 1e-6};
  scfg.grad_tol = 1e-11;
  const auto [tv, rep] =
      continuation_solve(data, PotentialSpec::quadratic(), scfg);
  REQUIRE(rep.verdict);
  NewtonConfig ncfg;
  const Trajectory tr = solve_reference(data, PotentialSpec::quadratic(),
                                        1e-8, ncfg);
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= data.steps; ++k) {
    const Field diff = tv.y[k] - tr.y[k];
    num += data.grid->weighted_inner(diff, diff);
    den += data.grid->weighted_inner(tr.y[k], tr.y[k]);
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("newton config validation") {
  NewtonConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NewtonConfig{};
  cfg.damping_min = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NewtonConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
