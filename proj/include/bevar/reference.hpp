// Classical implicit-Euler stepping for the Yosida-regularized equation
//
//   (y_k - y_{k-1}) / dt + A beta_lambda(t_k, ., y_k) = f_k,
//
// solved per step by damped Newton. Used as an independent oracle for
// cross-validating the variational route and for the V'-contraction
// (uniqueness) check.

#pragma once

#include "bevar/state.hpp"

namespace bevar {

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, std::vector<double> residual_history)
      : std::runtime_error(what), residual_history(std::move(residual_history)) {}
  std::vector<double> residual_history;
};

struct NewtonConfig {
  double tol = 1e-12;        // residual tolerance, relative to the step scale
  int max_iters = 50;
  double damping_min = 1e-4; // smallest accepted damping factor

  void validate() const;
};

// One implicit step from y_prev at time level k (uses data.f[k] and t_k).
// Returns (y_next, w_next = beta_lambda(t_k, ., y_next)).
std::pair<Field, Field> implicit_euler_step(const Field& y_prev,
                                            const ProblemData& data,
                                            const PotentialSpec& spec,
                                            double lambda, int k,
                                            const NewtonConfig& cfg);

// Full trajectory with the same data layout as the variational output.
Trajectory solve_reference(const ProblemData& data, const PotentialSpec& spec,
                           double lambda, const NewtonConfig& cfg);

// Runs two reference solves with identical sources and initial states y0_a,
// y0_b; returns d_k = |y_a[k] - y_b[k]|_{V'}, k = 0..K. The sequence is
// non-increasing (discrete shadow of the monotonicity of beta).
std::vector<double> contraction_check(const ProblemData& data,
                                      const PotentialSpec& spec, double lambda,
                                      const Field& y0_a, const Field& y0_b,
                                      const NewtonConfig& cfg = {});

}  // namespace bevar
