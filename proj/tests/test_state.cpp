#include <doctest.h>

#include <cmath>
#include <random>

#include "bevar/solver.hpp"
#include "bevar/state.hpp"

using namespace bevar;

namespace {

ProblemData heat_problem(int cells, int steps, double T = 0.1,
                         double f_amp = 0.0, double y0_amp = 1.0) {
  auto grid = std::make_shared<const Grid>(build_grid(1, {1.0}, {cells}));
  auto op = build_robin_operator(grid, 1.0);
  FieldPreset f{FieldPreset::Kind::constant, f_amp};
  FieldPreset y0{FieldPreset::Kind::gaussian_bump, y0_amp, Point{0.5, 0.0},
                 0.1};
  return make_problem_data(grid, op, T, steps, f, y0);
}

FluxTrajectory random_flux(const ProblemData& data, std::mt19937_64& rng,
                           double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  FluxTrajectory w = zero_flux(data);
  for (int k = 1; k <= data.steps; ++k)
    for (int i = 0; i < data.grid->node_count(); ++i) w[k][i] = n(rng);
  return w;
}

}  // namespace

TEST_CASE("integrate_state: constant and stationary cases") {
  ProblemData data = heat_problem(8, 5);
  // w = 0, f = 0: state stays at y0.
  const Trajectory frozen = integrate_state(zero_flux(data), data);
  for (int k = 0; k <= data.steps; ++k)
    CHECK((frozen.y[k] - data.y0).cwiseAbs().maxCoeff() == 0.0);

  // Stationary balance: w[k] = A^{-1} f[k] keeps y at y0.
  ProblemData forced = heat_problem(8, 5, 0.1, 2.0);
  FluxTrajectory w = zero_flux(forced);
  for (int k = 1; k <= forced.steps; ++k) w[k] = forced.f_dual[k];
  const Trajectory stat = integrate_state(w, forced);
  for (int k = 0; k <= forced.steps; ++k)
    CHECK((stat.y[k] - forced.y0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integrate_state: single backward-difference step") {
  ProblemData data = heat_problem(8, 1, 1.0, 0.0);
  std::mt19937_64 rng(3);
  FluxTrajectory w = random_flux(data, rng);
  const Field g = data.op->apply(w[1]);
  const Trajectory traj = integrate_state(w, data);
  CHECK((traj.y[1] - (data.y0 - g)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("midpoint_states") {
  ProblemData data = heat_problem(4, 2);
  Trajectory traj = integrate_state(zero_flux(data), data);
  traj.y[0] = Field::Zero(5);
  traj.y[1] = Field::Constant(5, 2.0);
  const auto ybar = midpoint_states(traj);
  CHECK(ybar[1][2] == doctest::Approx(1.0));
  // Constant trajectory: midpoints equal the constant.
  Trajectory c = traj;
  c.y[0] = c.y[1] = c.y[2] = Field::Constant(5, 3.0);
  for (int k = 1; k <= 2; ++k)
    CHECK((midpoint_states(c)[k] - Field::Constant(5, 3.0))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("constraint_residual: zero on integrated output, scales linearly") {
  ProblemData data = heat_problem(16, 10);
  std::mt19937_64 rng(5);
  const FluxTrajectory w = random_flux(data, rng);
  Trajectory traj = integrate_state(w, data);
  CHECK(constraint_residual(traj, data) < 1e-12);

  const double eps = 1e-3;
  Trajectory bad = traj;
  bad.y[3][4] += eps;
  const double r1 = constraint_residual(bad, data);
  Trajectory bad2 = traj;
  bad2.y[3][4] += 2.0 * eps;
  const double r2 = constraint_residual(bad2, data);
  CHECK(r1 > 0.0);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-9));
}

TEST_CASE("affinity: state difference depends only on flux difference") {
  ProblemData data = heat_problem(12, 8);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FluxTrajectory w1 = random_flux(data, rng);
    const FluxTrajectory w2 = random_flux(data, rng);
    const FluxTrajectory shift = random_flux(data, rng);
    FluxTrajectory w1s = w1, w2s = w2;
    for (int k = 1; k <= data.steps; ++k) {
      w1s[k] += shift[k];
      w2s[k] += shift[k];
    }
    const Trajectory t1 = integrate_state(w1, data);
    const Trajectory t2 = integrate_state(w2, data);
    const Trajectory t1s = integrate_state(w1s, data);
    const Trajectory t2s = integrate_state(w2s, data);
    for (int k = 0; k <= data.steps; ++k) {
      const Field d = (t1.y[k] - t2.y[k]) - (t1s.y[k] - t2s.y[k]);
      CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("exact discrete energy identity") {
  std::mt19937_64 rng(11);
  ProblemData data = heat_problem(32, 20, 0.1, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const FluxTrajectory w = random_flux(data, rng);
    const Trajectory traj = integrate_state(w, data);
    CHECK(energy_identity_residual(traj, data) < 1e-9);
  }
  // Zero case: both sides vanish.
  ProblemData zero = heat_problem(8, 4, 0.1, 0.0, 0.0);
  const Trajectory tz = integrate_state(zero_flux(zero), zero);
  CHECK(energy_identity_residual(tz, zero) == doctest::Approx(0.0));
  // Infeasible pair: residual grows linearly with the perturbation.
  const FluxTrajectory w = random_flux(data, rng);
  Trajectory traj = integrate_state(w, data);
  Trajectory bad = traj;
  bad.y[5].array() += 1e-3;
  const double r1 = energy_identity_residual(bad, data);
  Trajectory bad2 = traj;
  bad2.y[5].array() += 2e-3;
  const double r2 = energy_identity_residual(bad2, data);
  CHECK(r1 > 1e-12);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-3));
}

TEST_CASE("adjoint gradient matches central finite differences") {
  ProblemData data = heat_problem(16, 8, 0.1, 0.7);
  std::mt19937_64 rng(13);
  std::vector<RegularizedPotential> regs;
  regs.emplace_back(PotentialSpec::quadratic(), 1e-2, 1e-2);
  regs.emplace_back(
      PotentialSpec::log_type({CoefficientKind::constant, 1.0, 0.0}), 1e-2,
      1e-2);
  regs.emplace_back(PotentialSpec::abs_value(), 1e-2, 1e-2);
  for (const RegularizedPotential& reg : regs) {
    const FluxTrajectory w = random_flux(data, rng, 0.5);
    const FluxTrajectory grad = adjoint_gradient(w, data, reg);
    const double J0 = eval_J(w, data, reg);
    CHECK(std::isfinite(J0));
    double worst = 0.0;
    std::uniform_int_distribution<int> pick_k(1, data.steps);
    std::uniform_int_distribution<int> pick_i(0, 16);
    for (int probe = 0; probe < 24; ++probe) {
      const int k = pick_k(rng), i = pick_i(rng);
      const double h = 1e-6 * std::max(1.0, std::abs(w[k][i]));
      FluxTrajectory wp = w, wm = w;
      wp[k][i] += h;
      wm[k][i] -= h;
      const double fd = (eval_J(wp, data, reg) - eval_J(wm, data, reg)) /
                        (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[k][i]) /
                                  (1.0 + std::abs(grad[k][i])));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("adjoint gradient: zero at the trivial stationary solution") {
  ProblemData zero = heat_problem(8, 4, 0.1, 0.0, 0.0);
  const RegularizedPotential reg(PotentialSpec::quadratic(), 1e-2, 1e-2);
  const FluxTrajectory g = adjoint_gradient(zero_flux(zero), zero, reg);
  for (int k = 1; k <= zero.steps; ++k)
    CHECK(g[k].cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("functional_with_gradient agrees with eval_J") {
  ProblemData data = heat_problem(12, 6, 0.1, 0.4);
  const RegularizedPotential reg(
      PotentialSpec::log_type({CoefficientKind::constant, 1.0, 0.0}), 0.05,
      0.02);
  std::mt19937_64 rng(17);
  const FluxTrajectory w = random_flux(data, rng, 0.3);
  const FunctionalEval e = functional_with_gradient(w, data, reg);
  CHECK(e.value == doctest::Approx(eval_J(w, data, reg)).epsilon(1e-12));
  const FluxTrajectory g = adjoint_gradient(w, data, reg);
  for (int k = 1; k <= data.steps; ++k)
    CHECK((e.gradient[k] - g[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("field presets") {
  const FieldPreset c{FieldPreset::Kind::constant, 2.5};
  CHECK(c(0.3, Point{0.1, 0.0}) == doctest::Approx(2.5));
  const FieldPreset g{FieldPreset::Kind::gaussian_bump, 2.0, Point{0.5, 0.0},
                      0.2};
  CHECK(g(0.0, Point{0.5, 0.0}) == doctest::Approx(2.0));
  CHECK(g(0.0, Point{0.7, 0.0}) ==
        doctest::Approx(2.0 * std::exp(-0.04 / 0.08)));
  FieldPreset s{FieldPreset::Kind::step_in_time, 1.0};
  s.switch_time = 0.5;
  CHECK(s(0.4, Point{}) == doctest::Approx(0.0));
  CHECK(s(0.6, Point{}) == doctest::Approx(1.0));
}
