#include "bevar/reference.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace bevar {

void NewtonConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("NewtonConfig: tol must be > 0");
  if (max_iters < 1)
    throw std::invalid_argument("NewtonConfig: max_iters must be >= 1");
  if (!(damping_min > 0.0 && damping_min <= 1.0))
    throw std::invalid_argument("NewtonConfig: damping_min must be in (0,1]");
}

std::pair<Field, Field> implicit_euler_step(const Field& y_prev,
                                            const ProblemData& data,
                                            const PotentialSpec& spec,
                                            double lambda, int k,
                                            const NewtonConfig& cfg) {
  cfg.validate();
  if (!(lambda > 0.0))
    throw std::invalid_argument("implicit_euler_step: lambda must be > 0");
  const Grid& g = *data.grid;
  const RobinOperator& A = *data.op;
  const int n = g.node_count();
  const double dt = data.dt();
  const double t = data.time_at(k);
  const Field rhs = y_prev + dt * data.f[k];

  const auto beta_l = [&](const Field& y) {
    Field b(n);
    for (int i = 0; i < n; ++i) b[i] = spec.yosida(t, g.coords[i], lambda, y[i]);
    return b;
  };
  const auto residual = [&](const Field& y, const Field& b) {
    return Field(y + dt * A.apply(b) - rhs);
  };

  Field y = y_prev;
  Field b = beta_l(y);
  Field res = residual(y, b);
  double res_norm = g.l2_norm(res);
  std::vector<double> history{res_norm};
  // Convergence scale includes the stiff term dt*A*b whose roundoff floors
  // the achievable residual.
  const auto res_scale = [&](const Field& bb) {
    return std::max({1.0, g.l2_norm(rhs), dt * g.l2_norm(A.apply(bb))});
  };
  double scale = res_scale(b);

  // Newton on the weighted form: (W + dt G diag(beta_lambda')) delta = -W res.
  const Eigen::SparseMatrix<double>& G = A.form_matrix();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it < cfg.max_iters && res_norm > cfg.tol * scale; ++it) {
    Eigen::SparseMatrix<double> Jmat = G;
    Field slopes(n);
    for (int i = 0; i < n; ++i)
      slopes[i] = spec.yosida_slope(t, g.coords[i], lambda, y[i]);
    // W + dt * G * diag(slopes): scale columns of G, add W on the diagonal.
    Jmat = Jmat * Eigen::SparseMatrix<double>(
                      Field(dt * slopes).asDiagonal());
    Jmat += Eigen::SparseMatrix<double>(
        Eigen::SparseMatrix<double>(g.quad_weights.asDiagonal()));
    lu.compute(Jmat);
    if (lu.info() != Eigen::Success)
      throw NewtonError("implicit_euler_step: Jacobian factorization failed",
                        history);
    const Field delta = lu.solve(Field(-res.cwiseProduct(g.quad_weights)));

    // Damping: halve until the residual norm decreases.
    double theta = 1.0;
    while (true) {
      const Field y_try = y + theta * delta;
      const Field b_try = beta_l(y_try);
      const Field res_try = residual(y_try, b_try);
      const double rn_try = g.l2_norm(res_try);
      if (rn_try < res_norm) {
        y = y_try;
        b = b_try;
        res = res_try;
        res_norm = rn_try;
        scale = res_scale(b);
        break;
      }
      theta *= 0.5;
      if (theta < cfg.damping_min)
        throw NewtonError(
            "implicit_euler_step: damped Newton stalled (residual " +
                std::to_string(res_norm) + ")",
            history);
    }
    history.push_back(res_norm);
  }
  if (res_norm > cfg.tol * scale)
    throw NewtonError("implicit_euler_step: Newton did not converge in " +
                          std::to_string(cfg.max_iters) + " iterations",
                      history);
  return {y, b};
}

Trajectory solve_reference(const ProblemData& data, const PotentialSpec& spec,
                           double lambda, const NewtonConfig& cfg) {
  Trajectory traj;
  traj.y.resize(data.steps + 1);
  traj.w.assign(data.steps + 1, Field::Zero(data.grid->node_count()));
  traj.y[0] = data.y0;
  for (int k = 1; k <= data.steps; ++k) {
    auto [y, w] = implicit_euler_step(traj.y[k - 1], data, spec, lambda, k, cfg);
    traj.y[k] = std::move(y);
    traj.w[k] = std::move(w);
  }
  return traj;
}

std::vector<double> contraction_check(const ProblemData& data,
                                      const PotentialSpec& spec, double lambda,
                                      const Field& y0_a, const Field& y0_b,
                                      const NewtonConfig& cfg) {
  const Trajectory ta =
      solve_reference(with_initial_state(data, y0_a), spec, lambda, cfg);
  const Trajectory tb =
      solve_reference(with_initial_state(data, y0_b), spec, lambda, cfg);
  std::vector<double> d(data.steps + 1);
  for (int k = 0; k <= data.steps; ++k)
    d[k] = data.op->vdual_norm(ta.y[k] - tb.y[k]);
  return d;
}

}  // namespace bevar
