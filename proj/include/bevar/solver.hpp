// Minimization of the discrete convex functional
//
//   J(w) = sum_k dt sum_i q_i [ j_{ls}(t_k, x_i, ybar[k]_i)
//                             + j*_{ls}(t_k, x_i, w[k]_i) ]
//          + 1/2 |y[K]|_{V'}^2 - 1/2 |y0|_{V'}^2
//          - sum_k dt <ybar[k], A^{-1} f[k]>,      y = integrate_state(w),
//
// over the flux trajectory w, by accelerated gradient descent with Armijo
// backtracking on the (lambda, sigma)-regularized potential, continued along a
// decreasing (lambda, sigma) schedule. The exact discrete energy identity
// makes J equal to the nonnegative pointwise Fenchel-gap quadrature, so a
// small final gap certifies the pointwise inclusion w in beta(ybar).

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bevar/state.hpp"

namespace bevar {

class LineSearchError : public std::runtime_error {
 public:
  LineSearchError(const std::string& what, double grad_norm, double step)
      : std::runtime_error(what + " (|grad| = " + std::to_string(grad_norm) +
                           ", step = " + std::to_string(step) + ")"),
        grad_norm(grad_norm),
        step(step) {}
  double grad_norm, step;
};

struct BacktrackingParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct SolverConfig {
  std::vector<double> lambda_schedule{1e-1, 1e-2, 1e-3};
  std::vector<double> sigma_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  double grad_tol = 1e-9;
  double gap_tol = 1e-7;
  int max_inner_iters = 50000;
  BacktrackingParams backtracking;
  bool warm_start = true;

  void validate() const;  // schedules strictly decreasing positive, tols > 0
};

struct InnerStats {
  int iterations = 0;
  int value_evals = 0;
  double grad_norm = 0.0;
  double final_J = 0.0;
  bool converged = false;
  std::vector<double> j_history;  // J at every accepted iterate
};

struct InnerResult {
  FluxTrajectory w;
  Trajectory trajectory;
  InnerStats stats;
};

struct StageStats {
  double lambda = 0.0;
  double sigma = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  double J = 0.0;
  double unregularized_gap = 0.0;
  double wall_ms = 0.0;
  bool converged = false;
};

struct GapDetail {
  double value = 0.0;
  bool infinite = false;
  int worst_k = 0;
  int worst_node = 0;
  double worst_term = 0.0;
};

struct SolveReport {
  double final_J = 0.0;            // regularized J at the last stage
  double pointwise_gap = 0.0;      // unregularized certificate
  double energy_residual = 0.0;
  double inclusion_violation = 0.0;
  double constraint_residual = 0.0;
  GapDetail gap_detail;
  std::vector<StageStats> stages;
  bool verdict = false;            // gap <= gap_tol
  bool partial = false;            // some stage hit the iteration cap
  int failed_stage = -1;
  bool zero_data_short_circuit = false;
  std::vector<std::string> warnings;
};

// J value; sigma may be 0 here (the conjugate of j_lambda is j* + l/2 w^2).
double eval_J(const FluxTrajectory& w, const ProblemData& data,
              const RegularizedPotential& reg);

// Unregularized pointwise Fenchel gap quadrature
//   sum_k dt sum_i q_i [ j(ybar) + j*(w) - ybar w ]  >= 0,
// zero iff w[k]_i in beta(t_k, x_i, ybar[k]_i) everywhere. Values of w outside
// the effective domain of j* are reported as an infinite gap with location.
GapDetail pointwise_gap(const Trajectory& traj, const ProblemData& data,
                        const PotentialSpec& spec);
GapDetail pointwise_gap(const Trajectory& traj, const ProblemData& data,
                        const RegularizedPotential& reg);

// |lhs - rhs| / (1 + |rhs|) of the discrete energy identity.
double energy_identity_residual(const Trajectory& traj,
                                const ProblemData& data);

// max over (k,i) of dist(w[k]_i, beta(t_k, x_i, ybar[k]_i)).
double inclusion_violation(const Trajectory& traj, const ProblemData& data,
                           const PotentialSpec& spec);

// Accelerated gradient descent (momentum restart on non-decrease) with Armijo
// backtracking; monotone non-increase of J across accepted iterates;
// deterministic. Iteration cap -> non-converged flag; line-search failure ->
// LineSearchError.
InnerResult inner_minimize(const FluxTrajectory& w_init,
                           const ProblemData& data,
                           const RegularizedPotential& reg,
                           const SolverConfig& cfg);

// Paired descent over the (lambda, sigma) schedule (sigma first within each
// lambda), warm-starting each stage; final certificate with the unregularized
// potential. Degenerate data (f == 0, y0 == 0, 0 in beta(0)) short-circuits
// to the zero trajectory.
std::pair<Trajectory, SolveReport> continuation_solve(const ProblemData& data,
                                                      const PotentialSpec& spec,
                                                      const SolverConfig& cfg);

struct VerifyTolerances {
  double constraint_tol = 1e-8;
  double energy_tol = 1e-9;
  double gap_tol = 1e-7;
};

struct VerifyRecord {
  double constraint_residual = 0.0;
  double energy_residual = 0.0;
  double gap = 0.0;
  bool constraint_ok = false;
  bool energy_ok = false;
  bool gap_ok = false;
  bool verdict = false;  // constraint_ok && energy_ok && gap_ok
  bool box_checked = false;
  bool box_ok = true;    // reported separately from the verdict
  double y_min = 0.0;
  double y_max = 0.0;
};

VerifyRecord verify_weak_solution(const Trajectory& traj,
                                  const ProblemData& data,
                                  const PotentialSpec& spec,
                                  const VerifyTolerances& tols);

}  // namespace bevar
