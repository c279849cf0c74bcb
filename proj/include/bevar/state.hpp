// Discrete linear state equation dy/dt + A w = f:
//
//   y[k] = y[k-1] + dt (f[k] - A w[k]),  k = 1..K,  y[0] = y0,
//
// with midpoint states ybar[k] = (y[k-1]+y[k])/2. The midpoint pairing makes
// the discrete energy identity
//
//   -sum_k dt <ybar[k], w[k]> = 1/2|y[K]|_{V'}^2 - 1/2|y0|_{V'}^2
//                               - sum_k dt <ybar[k], A^{-1} f[k]>
//
// an exact algebraic identity, and the adjoint sweep the exact gradient of
// the discrete functional.

#pragma once

#include <optional>
#include <utility>

#include "bevar/grid.hpp"
#include "bevar/potential.hpp"

namespace bevar {

// Preset catalog for the source f and the initial state y0.
struct FieldPreset {
  enum class Kind { constant, gaussian_bump, step_in_time };
  Kind kind = Kind::constant;
  double amplitude = 0.0;
  Point center{0.5, 0.5};
  double width = 0.1;        // gaussian_bump
  double switch_time = 0.0;  // step_in_time: amplitude * 1[t >= switch_time]

  double operator()(double t, const Point& x) const;
};

const char* preset_kind_name(FieldPreset::Kind k);
std::optional<FieldPreset::Kind> preset_kind_from_name(const std::string&);

struct ProblemData {
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const RobinOperator> op;
  double T = 1.0;
  int steps = 1;  // K
  FieldPreset f_preset;
  FieldPreset y0_preset;
  std::optional<std::pair<double, double>> box;  // [y_m, y_M]

  // Derived, filled by make_problem_data:
  Field y0;                    // nodal initial state
  std::vector<Field> f;        // f[k], k = 1..K (index 0 unused)
  std::vector<Field> f_dual;   // A^{-1} f[k], cached

  double dt() const { return T / steps; }
  double time_at(int k) const { return T * k / steps; }
};

ProblemData make_problem_data(std::shared_ptr<const Grid> grid,
                              std::shared_ptr<const RobinOperator> op,
                              double T, int steps, FieldPreset f_preset,
                              FieldPreset y0_preset,
                              std::optional<std::pair<double, double>> box = {});

// Swap the initial state (used by the contraction check).
ProblemData with_initial_state(const ProblemData& data, const Field& y0);

// State y at k = 0..K, flux w at k = 1..K (w[0] kept zero, unused).
struct Trajectory {
  std::vector<Field> y;
  std::vector<Field> w;
  int steps() const { return static_cast<int>(w.size()) - 1; }
};

// Flux trajectories are handled as vectors of fields indexed 1..K like
// Trajectory::w.
using FluxTrajectory = std::vector<Field>;

FluxTrajectory zero_flux(const ProblemData& data);

Trajectory integrate_state(const FluxTrajectory& w, const ProblemData& data);

// ybar[k] = (y[k-1] + y[k]) / 2, k = 1..K (index 0 unused).
std::vector<Field> midpoint_states(const Trajectory& traj);

// max_k | (y[k]-y[k-1])/dt + A w[k] - f[k] | in the weighted L2 norm.
double constraint_residual(const Trajectory& traj, const ProblemData& data);

// Exact gradient of the discrete functional (see solver.hpp eval_J) with
// respect to the flux trajectory, one backward sweep: O(K) operator
// applications plus one solve per step (the per-step solves A^{-1} f[k] are
// precomputed in ProblemData). Requires sigma > 0 in reg.
FluxTrajectory adjoint_gradient(const FluxTrajectory& w,
                                const ProblemData& data,
                                const RegularizedPotential& reg);

// Functional value, gradient and trajectory in a single pass (the conjugate
// solve yields value and maximizer together); the optimizer's workhorse.
// magnitude sums |contributions| so callers can bound the roundoff floor of
// the value (J near 0 is a cancellation of O(magnitude) pieces).
struct FunctionalEval {
  double value = 0.0;
  double magnitude = 0.0;
  FluxTrajectory gradient;
  Trajectory trajectory;
};
FunctionalEval functional_with_gradient(const FluxTrajectory& w,
                                        const ProblemData& data,
                                        const RegularizedPotential& reg);

}  // namespace bevar
