#include "bevar/solver.hpp"

#include <chrono>
#include <cmath>
#include <functional>

namespace bevar {

namespace {

Eigen::VectorXd flatten(const FluxTrajectory& w, int K, int n) {
  Eigen::VectorXd v(K * n);
  for (int k = 1; k <= K; ++k) v.segment((k - 1) * n, n) = w[k];
  return v;
}

FluxTrajectory unflatten(const Eigen::VectorXd& v, int K, int n) {
  FluxTrajectory w(K + 1, Field::Zero(n));
  for (int k = 1; k <= K; ++k) w[k] = v.segment((k - 1) * n, n);
  return w;
}

}  // namespace

void SolverConfig::validate() const {
  const auto check_schedule = [](const std::vector<double>& s,
                                 const char* name) {
    if (s.empty())
      throw std::invalid_argument(std::string(name) + ": must be non-empty");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(s[i] > 0.0))
        throw std::invalid_argument(std::string(name) + ": entries must be > 0");
      if (i > 0 && !(s[i] < s[i - 1]))
        throw std::invalid_argument(std::string(name) +
                                    ": must be strictly decreasing");
    }
  };
  check_schedule(lambda_schedule, "lambda_schedule");
  check_schedule(sigma_schedule, "sigma_schedule");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
  if (!(gap_tol > 0.0)) throw std::invalid_argument("gap_tol must be > 0");
  if (max_inner_iters < 1)
    throw std::invalid_argument("max_inner_iters must be >= 1");
  if (!(backtracking.initial_step > 0.0))
    throw std::invalid_argument("backtracking.initial_step must be > 0");
  if (!(backtracking.shrink > 0.0 && backtracking.shrink < 1.0))
    throw std::invalid_argument("backtracking.shrink must be in (0,1)");
  if (!(backtracking.sufficient_decrease > 0.0 &&
        backtracking.sufficient_decrease < 1.0))
    throw std::invalid_argument(
        "backtracking.sufficient_decrease must be in (0,1)");
}

double eval_J(const FluxTrajectory& w, const ProblemData& data,
              const RegularizedPotential& reg) {
  const Grid& g = *data.grid;
  const int n = g.node_count();
  const int K = data.steps;
  const double dt = data.dt();
  const Field& q = g.quad_weights;

  const Trajectory traj = integrate_state(w, data);
  const std::vector<Field> ybar = midpoint_states(traj);

  double integral = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double t = data.time_at(k);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double jy = reg.value(t, g.coords[i], ybar[k][i]).value;
      const double jsw = reg.conjugate_value(t, g.coords[i], w[k][i]);
      acc += q[i] * (jy + jsw - ybar[k][i] * data.f_dual[k][i]);
    }
    integral += dt * acc;
  }
  return integral + 0.5 * data.op->vdual_inner(traj.y[K], traj.y[K]) -
         0.5 * data.op->vdual_inner(data.y0, data.y0);
}

namespace {

GapDetail gap_quadrature(const Trajectory& traj, const ProblemData& data,
                         const std::function<double(double, const Point&,
                                                    double, double)>& term_fn) {
  const Grid& g = *data.grid;
  const double dt = data.dt();
  GapDetail out;
  out.worst_term = -std::numeric_limits<double>::infinity();
  const std::vector<Field> ybar = midpoint_states(traj);
  double total = 0.0;
  for (int k = 1; k <= data.steps; ++k) {
    const double t = data.time_at(k);
    for (int i = 0; i < g.node_count(); ++i) {
      const double term = term_fn(t, g.coords[i], ybar[k][i], traj.w[k][i]);
      if (std::isinf(term)) {
        out.infinite = true;
        out.value = term;
        out.worst_k = k;
        out.worst_node = i;
        out.worst_term = term;
        return out;
      }
      if (term > out.worst_term) {
        out.worst_term = term;
        out.worst_k = k;
        out.worst_node = i;
      }
      total += dt * g.quad_weights[i] * term;
    }
  }
  out.value = total;
  return out;
}

}  // namespace

GapDetail pointwise_gap(const Trajectory& traj, const ProblemData& data,
                        const PotentialSpec& spec) {
  return gap_quadrature(
      traj, data, [&](double t, const Point& x, double ybar, double w) {
        return spec.j(t, x, ybar) + spec.conjugate(t, x, w) - ybar * w;
      });
}

GapDetail pointwise_gap(const Trajectory& traj, const ProblemData& data,
                        const RegularizedPotential& reg) {
  return gap_quadrature(
      traj, data, [&](double t, const Point& x, double ybar, double w) {
        return reg.value(t, x, ybar).value + reg.conjugate_value(t, x, w) -
               ybar * w;
      });
}

double energy_identity_residual(const Trajectory& traj,
                                const ProblemData& data) {
  const Grid& g = *data.grid;
  const double dt = data.dt();
  const std::vector<Field> ybar = midpoint_states(traj);
  double lhs = 0.0, source = 0.0;
  for (int k = 1; k <= data.steps; ++k) {
    lhs -= dt * g.weighted_inner(ybar[k], traj.w[k]);
    source += dt * g.weighted_inner(ybar[k], data.f_dual[k]);
  }
  const double rhs =
      0.5 * data.op->vdual_inner(traj.y[data.steps], traj.y[data.steps]) -
      0.5 * data.op->vdual_inner(traj.y[0], traj.y[0]) - source;
  return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
}

double inclusion_violation(const Trajectory& traj, const ProblemData& data,
                           const PotentialSpec& spec) {
  const Grid& g = *data.grid;
  const std::vector<Field> ybar = midpoint_states(traj);
  double worst = 0.0;
  for (int k = 1; k <= data.steps; ++k) {
    const double t = data.time_at(k);
    for (int i = 0; i < g.node_count(); ++i)
      worst = std::max(
          worst, spec.beta(t, g.coords[i], ybar[k][i]).distance(traj.w[k][i]));
  }
  return worst;
}

namespace {

// Exact Newton direction for the reduced functional via a discrete-time
// Riccati sweep: the second-order model
//   min_dw  g^T dw + 1/2 sum_k [ dybar_k^T Q_k dybar_k + dw_k^T R_k dw_k ]
//           + 1/2 dy_K^T P dy_K,   dy_k = dy_{k-1} + B dw_k,  B = -dt A,
// with Q_k = dt W j''(ybar_k), R_k = dt W (j*)''(w_k) diagonal and
// P = W G^{-1} W, is a linear-quadratic control problem solved exactly by a
// backward Riccati recursion and a forward rollout, O(K n^3).
Eigen::VectorXd newton_direction_riccati(const Eigen::VectorXd& gflat,
                                         const FluxTrajectory& w,
                                         const ProblemData& data,
                                         const RegularizedPotential& reg) {
  const Grid& g = *data.grid;
  const int n = g.node_count();
  const int K = data.steps;
  const double dt = data.dt();
  const Field& q = g.quad_weights;

  const Trajectory traj = integrate_state(w, data);
  const std::vector<Field> ybar = midpoint_states(traj);

  // Sparse B = -dt W^{-1} G.
  Eigen::SparseMatrix<double> B = data.op->form_matrix();
  B = Eigen::SparseMatrix<double>(
          Field(-dt / q.array()).matrix().asDiagonal()) *
      B;

  // Terminal metric P = W G^{-1} W, column by column through the cached
  // factorization.
  Eigen::MatrixXd P(n, n);
  for (int j = 0; j < n; ++j) {
    Field e = Field::Zero(n);
    e[j] = 1.0;
    P.col(j) = q.cwiseProduct(data.op->solve(e));
  }
  P = 0.5 * (P + P.transpose());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::MatrixXd> gain_K(K + 1);
  std::vector<Eigen::VectorXd> gain_d(K + 1);
  for (int k = K; k >= 1; --k) {
    const double t = data.time_at(k);
    Field qk(n), rk(n);
    for (int i = 0; i < n; ++i) {
      qk[i] = dt * q[i] *
              (reg.base().yosida_slope(t, g.coords[i], reg.lambda(),
                                       ybar[k][i]) +
               reg.sigma());
      const double rstar = reg.conjugate(t, g.coords[i], w[k][i]).slope;
      rk[i] = dt * q[i] /
              (reg.base().yosida_slope(t, g.coords[i], reg.lambda(), rstar) +
               reg.sigma());
    }
    // Midpoint state: dybar = dy_{k-1} + B dw / 2.
    const Eigen::MatrixXd QB = qk.asDiagonal() * B;        // Q_k B
    const Eigen::MatrixXd PB = P * B;                      // P_k B
    const Eigen::MatrixXd N = 0.5 * QB + PB;               // S^T + B^T P ... transposed below
    Eigen::MatrixXd M = 0.25 * B.transpose() * QB + B.transpose() * PB;
    M += Eigen::MatrixXd(rk.asDiagonal());
    M = 0.5 * (M + M.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    // Gains: w* = -Kc y - dc.
    gain_K[k] = llt.solve(N.transpose());
    gain_d[k] = llt.solve(
        Eigen::VectorXd(gflat.segment((k - 1) * n, n) + B.transpose() * p));
    // Value-function update.
    P = Eigen::MatrixXd(qk.asDiagonal()) + P - N * gain_K[k];
    P = 0.5 * (P + P.transpose());
    p = p - N * gain_d[k];
  }

  Eigen::VectorXd d(K * n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= K; ++k) {
    const Eigen::VectorXd dw = -gain_K[k] * y - gain_d[k];
    d.segment((k - 1) * n, n) = dw;
    y += B * dw;
  }
  return d;
}

}  // namespace

InnerResult inner_minimize(const FluxTrajectory& w_init,
                           const ProblemData& data,
                           const RegularizedPotential& reg,
                           const SolverConfig& cfg) {
  if (!(reg.sigma() > 0.0))
    throw std::invalid_argument("inner_minimize: requires sigma > 0");
  const int K = data.steps;
  const int n = data.grid->node_count();
  const BacktrackingParams& bt = cfg.backtracking;

  InnerStats stats;
  struct Eval {
    double J = 0.0;
    Eigen::VectorXd g;
    double noise = 0.0;  // roundoff floor of the value
  };
  const auto value_and_grad = [&](const Eigen::VectorXd& v) {
    ++stats.value_evals;
    FunctionalEval e = functional_with_gradient(unflatten(v, K, n), data, reg);
    const double eps = std::numeric_limits<double>::epsilon();
    return Eval{e.value, flatten(e.gradient, K, n),
                32.0 * eps * (1.0 + e.magnitude)};
  };
  const auto value_only = [&](const Eigen::VectorXd& v) {
    ++stats.value_evals;
    return eval_J(unflatten(v, K, n), data, reg);
  };
  const auto finish = [&](const Eigen::VectorXd& v, double J, double gnorm,
                          bool converged) {
    stats.grad_norm = gnorm;
    stats.final_J = J;
    stats.converged = converged;
    stats.j_history.push_back(J);
    FluxTrajectory w = unflatten(v, K, n);
    Trajectory traj = integrate_state(w, data);
    return InnerResult{std::move(w), std::move(traj), stats};
  };

  Eigen::VectorXd X = flatten(w_init, K, n);
  Eval ex = value_and_grad(X);
  double Jx = ex.J;
  if (ex.g.norm() <= cfg.grad_tol) return finish(X, Jx, ex.g.norm(), true);
  stats.j_history.push_back(Jx);

  // Phase 1 -- monotone accelerated gradient with Armijo backtracking. The
  // accepted iterate X is the best value seen; rejected candidates still feed
  // the momentum sequence; the momentum restarts when it stops pointing
  // downhill.
  Eigen::VectorXd Y = X;
  double theta = 1.0;
  double step = bt.initial_step;
  int value_floor_hits = 0;  // consecutive iterations with sub-roundoff gains
  double g_watch = std::numeric_limits<double>::infinity();
  int g_watch_age = 0;  // iterations since the watched gradient norm halved

  while (stats.iterations < cfg.max_inner_iters && value_floor_hits < 8 &&
         g_watch_age < 40) {
    ++stats.iterations;
    Eval ey = value_and_grad(Y);
    const double gyn = ey.g.norm();
    if (gyn < 0.5 * g_watch) {
      g_watch = gyn;
      g_watch_age = 0;
    } else {
      ++g_watch_age;
    }
    if (gyn <= cfg.grad_tol && ey.J <= Jx + ey.noise)
      return finish(Y, ey.J, gyn, true);

    Eigen::VectorXd Z;
    double Jz = 0.0, tau = step;
    bool armijo = false;
    for (int attempt = 0; attempt < 2 && !armijo; ++attempt) {
      tau = step;
      for (int ls = 0; ls < 80; ++ls) {
        Z = Y - tau * ey.g;
        Jz = value_only(Z);
        if (Jz <= ey.J - bt.sufficient_decrease * tau * gyn * gyn) {
          armijo = true;
          break;
        }
        tau *= bt.shrink;
        if (tau < 1e-18 * bt.initial_step) break;
      }
      if (!armijo) {
        if ((Y - X).norm() == 0.0) break;  // even plain descent is floored
        Y = X;                             // drop the momentum, retry once
        theta = 1.0;
        ey = value_and_grad(Y);
        if (ey.g.norm() <= cfg.grad_tol)
          return finish(Y, ey.J, ey.g.norm(), true);
      }
    }
    if (!armijo) break;  // value floor reached: refine in phase 2

    value_floor_hits = (ey.J - Jz <= ey.noise) ? value_floor_hits + 1 : 0;
    step = std::min(tau * 2.0, bt.initial_step * 1e6);

    const double theta_next =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const Eigen::VectorXd X_old = X;
    if (Jz <= Jx) {
      X = Z;
      Jx = Jz;
    }
    stats.j_history.push_back(Jx);
    Y = X + (theta / theta_next) * (Z - X) +
        ((theta - 1.0) / theta_next) * (X - X_old);
    theta = theta_next;
    if (ey.g.dot(X - X_old) > 0.0) {
      theta = 1.0;
      Y = X;
    }
  }

  // Phase 2 -- truncated Newton on the local model: near the minimum the
  // value decrease drowns in its own roundoff while the adjoint gradient
  // stays accurate, so solve H d = -g by Jacobi-preconditioned conjugate
  // gradients with Hessian-vector products from gradient differences, and
  // accept on a strict decrease of |g|.
  const Grid& grd = *data.grid;
  const Eigen::SparseMatrix<double>& Gm = data.op->form_matrix();
  const double dt = data.dt();
  // Column sums sum_l G_lj^2 / q_l weighted by a nodal field, for the
  // grad-grad part of the Hessian diagonal.
  const auto weighted_colsq = [&](const Field& weight) {
    Field out = Field::Zero(n);
    for (int col = 0; col < Gm.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(Gm, col); itr;
           ++itr)
        out[col] += weight[itr.row()] * itr.value() * itr.value() /
                    grd.quad_weights[itr.row()];
    return out;
  };
  const auto hess_diag = [&](const Eigen::VectorXd& v) {
    const FluxTrajectory w = unflatten(v, K, n);
    const Trajectory traj = integrate_state(w, data);
    const std::vector<Field> ybar = midpoint_states(traj);
    Field Gdiag(n);
    for (int j = 0; j < n; ++j) Gdiag[j] = Gm.coeff(j, j);
    std::vector<Field> S(K + 1);
    Eigen::VectorXd diag(K * n);
    for (int k = 1; k <= K; ++k) {
      const double t = data.time_at(k);
      Field jpp(n);
      for (int i = 0; i < n; ++i)
        jpp[i] = reg.base().yosida_slope(t, grd.coords[i], reg.lambda(),
                                         ybar[k][i]) +
                 reg.sigma();
      S[k] = weighted_colsq(jpp);
    }
    Field suffix = Field::Zero(n);  // sum_{k>m} S[k]
    for (int m = K; m >= 1; --m) {
      const double t = data.time_at(m);
      Field row(n);
      for (int j = 0; j < n; ++j) {
        const double rstar =
            reg.conjugate(t, grd.coords[j], w[m][j]).slope;
        const double jspp =
            1.0 / (reg.base().yosida_slope(t, grd.coords[j], reg.lambda(),
                                           rstar) +
                   reg.sigma());
        row[j] = dt * grd.quad_weights[j] * jspp + dt * dt * Gdiag[j] +
                 dt * dt * dt * (0.25 * S[m][j] + suffix[j]);
      }
      diag.segment((m - 1) * n, n) = row;
      suffix += S[m];
    }
    return diag;
  };

  ex = value_and_grad(X);
  double gxn = ex.g.norm();
  const double x_scale = 1.0 + X.norm();
  for (int outer = 0; outer < 60 && stats.iterations < cfg.max_inner_iters;
       ++outer) {
    ++stats.iterations;
    if (gxn <= cfg.grad_tol) return finish(X, Jx, gxn, true);
    Eigen::VectorXd d;
    if (n <= 256) {
      // Exact Newton direction by the Riccati sweep.
      d = newton_direction_riccati(Eigen::VectorXd(-ex.g), unflatten(X, K, n),
                                   data, reg);
    } else {
      const auto hessian_vec = [&](const Eigen::VectorXd& v) {
        const double s = 1e-7 * x_scale / std::max(v.norm(), 1e-300);
        const Eval ep = value_and_grad(X + s * v);
        return Eigen::VectorXd((ep.g - ex.g) / s);
      };
      const Eigen::VectorXd Minv =
          hess_diag(X).cwiseMax(1e-300).cwiseInverse();
      // Preconditioned CG on H d = -g down to a 0.05 |g| forcing term.
      d = Eigen::VectorXd::Zero(X.size());
      Eigen::VectorXd r = -ex.g;
      Eigen::VectorXd zp = Minv.cwiseProduct(r);
      Eigen::VectorXd p = zp;
      double rz = r.dot(zp);
      const double cg_tol = 0.05 * gxn;
      for (int cg = 0; cg < 400 && r.norm() > cg_tol; ++cg) {
        const Eigen::VectorXd Hp = hessian_vec(p);
        const double pHp = p.dot(Hp);
        if (!(pHp > 0.0)) break;  // curvature noise: use the current d
        const double alpha = rz / pHp;
        d += alpha * p;
        r -= alpha * Hp;
        zp = Minv.cwiseProduct(r);
        const double rz_new = r.dot(zp);
        p = zp + (rz_new / rz) * p;
        rz = rz_new;
      }
    }
    if (d.squaredNorm() == 0.0) d = -ex.g;
    // Damped acceptance on the true gradient.
    double damp = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd Xt = X + damp * d;
      const Eval et = value_and_grad(Xt);
      if (et.g.norm() < gxn && et.J <= Jx + ex.noise) {
        X = Xt;
        ex = et;
        gxn = et.g.norm();
        Jx = std::min(Jx, et.J);
        stats.j_history.push_back(Jx);
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved)
      throw LineSearchError(
          "inner_minimize: no descent direction at the numerical floor", gxn,
          damp);
  }

  return finish(X, Jx, gxn, gxn <= cfg.grad_tol);
}

std::pair<Trajectory, SolveReport> continuation_solve(const ProblemData& data,
                                                      const PotentialSpec& spec,
                                                      const SolverConfig& cfg) {
  cfg.validate();
  SolveReport report;

  const CoercivityReport coer = check_coercivity(spec, 1e3);
  if (!coer.weakly_coercive())
    report.warnings.push_back(
        "potential is not weakly coercive on the probe ladder (superlinear_j=" +
        std::string(coer.superlinear_j ? "true" : "false") +
        ", superlinear_jstar=" +
        std::string(coer.superlinear_jstar ? "true" : "false") + ")");
  const SymmetryCert sym = check_symmetry(spec, 10.0, 1.0, 0.0);
  if (!sym.holds)
    report.warnings.push_back(
        "potential fails the symmetry bound j(t,-r) <= j(t,r) near r = " +
        std::to_string(sym.worst_ratio_location));

  // Degenerate data: zero source and initial state with 0 in beta(0).
  const bool zero_f = [&] {
    for (int k = 1; k <= data.steps; ++k)
      if (data.f[k].cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
  }();
  if (zero_f && data.y0.cwiseAbs().maxCoeff() == 0.0 &&
      spec.zero_in_beta_at_zero()) {
    Trajectory traj = integrate_state(zero_flux(data), data);
    report.zero_data_short_circuit = true;
    report.verdict = true;
    return {std::move(traj), report};
  }

  // Stationary warm start: A w = f keeps y at y0.
  FluxTrajectory w(data.steps + 1, Field::Zero(data.grid->node_count()));
  for (int k = 1; k <= data.steps; ++k) w[k] = data.f_dual[k];

  Trajectory traj = integrate_state(w, data);
  for (double lambda : cfg.lambda_schedule) {
    for (double sigma : cfg.sigma_schedule) {
      const RegularizedPotential reg(spec, lambda, sigma);
      const auto start = std::chrono::steady_clock::now();
      InnerResult res = inner_minimize(w, data, reg, cfg);
      const auto end = std::chrono::steady_clock::now();
      StageStats st;
      st.lambda = lambda;
      st.sigma = sigma;
      st.iterations = res.stats.iterations;
      st.grad_norm = res.stats.grad_norm;
      st.J = res.stats.final_J;
      st.converged = res.stats.converged;
      st.wall_ms =
          std::chrono::duration<double, std::milli>(end - start).count();
      st.unregularized_gap = pointwise_gap(res.trajectory, data, spec).value;
      report.stages.push_back(st);
      if (cfg.warm_start)
        w = res.w;
      traj = std::move(res.trajectory);
      if (!st.converged) {
        report.partial = true;
        report.failed_stage = static_cast<int>(report.stages.size()) - 1;
        break;
      }
    }
    if (report.partial) break;
  }

  report.final_J = report.stages.empty() ? 0.0 : report.stages.back().J;
  report.gap_detail = pointwise_gap(traj, data, spec);
  report.pointwise_gap = report.gap_detail.value;
  report.energy_residual = energy_identity_residual(traj, data);
  report.inclusion_violation = inclusion_violation(traj, data, spec);
  report.constraint_residual = constraint_residual(traj, data);
  report.verdict = report.pointwise_gap <= cfg.gap_tol;
  return {std::move(traj), report};
}

VerifyRecord verify_weak_solution(const Trajectory& traj,
                                  const ProblemData& data,
                                  const PotentialSpec& spec,
                                  const VerifyTolerances& tols) {
  VerifyRecord rec;
  rec.constraint_residual = constraint_residual(traj, data);
  rec.energy_residual = energy_identity_residual(traj, data);
  rec.gap = pointwise_gap(traj, data, spec).value;
  rec.constraint_ok = rec.constraint_residual <= tols.constraint_tol;
  rec.energy_ok = rec.energy_residual <= tols.energy_tol;
  rec.gap_ok = rec.gap <= tols.gap_tol;
  rec.verdict = rec.constraint_ok && rec.energy_ok && rec.gap_ok;
  if (data.box) {
    rec.box_checked = true;
    rec.y_min = std::numeric_limits<double>::infinity();
    rec.y_max = -std::numeric_limits<double>::infinity();
    for (const Field& y : traj.y) {
      rec.y_min = std::min(rec.y_min, y.minCoeff());
      rec.y_max = std::max(rec.y_max, y.maxCoeff());
    }
    rec.box_ok = rec.y_min >= data.box->first && rec.y_max <= data.box->second;
  }
  return rec;
}

}  // namespace bevar
