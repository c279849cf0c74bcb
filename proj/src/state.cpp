#include "bevar/state.hpp"

#include <cmath>
#include <stdexcept>

namespace bevar {

double FieldPreset::operator()(double t, const Point& x) const {
  switch (kind) {
    case Kind::constant:
      return amplitude;
    case Kind::gaussian_bump: {
      const double dx0 = x.x0 - center.x0, dx1 = x.x1 - center.x1;
      return amplitude *
             std::exp(-(dx0 * dx0 + dx1 * dx1) / (2.0 * width * width));
    }
    case Kind::step_in_time:
      return t >= switch_time ? amplitude : 0.0;
  }
  return 0.0;
}

const char* preset_kind_name(FieldPreset::Kind k) {
  switch (k) {
    case FieldPreset::Kind::constant: return "constant";
    case FieldPreset::Kind::gaussian_bump: return "gaussian_bump";
    case FieldPreset::Kind::step_in_time: return "step_in_time";
  }
  return "?";
}

std::optional<FieldPreset::Kind> preset_kind_from_name(const std::string& s) {
  for (FieldPreset::Kind k :
       {FieldPreset::Kind::constant, FieldPreset::Kind::gaussian_bump,
        FieldPreset::Kind::step_in_time})
    if (s == preset_kind_name(k)) return k;
  return std::nullopt;
}

ProblemData make_problem_data(std::shared_ptr<const Grid> grid,
                              std::shared_ptr<const RobinOperator> op,
                              double T, int steps, FieldPreset f_preset,
                              FieldPreset y0_preset,
                              std::optional<std::pair<double, double>> box) {
  if (!(T > 0.0)) throw std::invalid_argument("ProblemData: T must be > 0");
  if (steps < 1) throw std::invalid_argument("ProblemData: steps must be >= 1");
  if (box && !(box->first < box->second))
    throw std::invalid_argument("ProblemData: box requires y_m < y_M");
  ProblemData d;
  d.grid = std::move(grid);
  d.op = std::move(op);
  d.T = T;
  d.steps = steps;
  d.f_preset = f_preset;
  d.y0_preset = y0_preset;
  d.box = box;
  d.y0 = d.grid->sample(0.0, y0_preset);
  d.f.resize(steps + 1);
  d.f_dual.resize(steps + 1);
  d.f[0] = Field::Zero(d.grid->node_count());
  d.f_dual[0] = Field::Zero(d.grid->node_count());
  for (int k = 1; k <= steps; ++k) {
    d.f[k] = d.grid->sample(d.time_at(k), f_preset);
    d.f_dual[k] = d.op->solve(d.f[k]);
  }
  return d;
}

ProblemData with_initial_state(const ProblemData& data, const Field& y0) {
  if (y0.size() != data.grid->node_count())
    throw std::invalid_argument("with_initial_state: field size mismatch");
  ProblemData d = data;
  d.y0 = y0;  // d.y0_preset no longer describes the initial state
  return d;
}

FluxTrajectory zero_flux(const ProblemData& data) {
  FluxTrajectory w(data.steps + 1);
  for (auto& f : w) f = Field::Zero(data.grid->node_count());
  return w;
}

Trajectory integrate_state(const FluxTrajectory& w, const ProblemData& data) {
  if (static_cast<int>(w.size()) != data.steps + 1)
    throw std::invalid_argument("integrate_state: flux trajectory size mismatch");
  Trajectory traj;
  traj.y.resize(data.steps + 1);
  traj.w = w;
  traj.w[0] = Field::Zero(data.grid->node_count());
  traj.y[0] = data.y0;
  const double dt = data.dt();
  for (int k = 1; k <= data.steps; ++k)
    traj.y[k] = traj.y[k - 1] + dt * (data.f[k] - data.op->apply(w[k]));
  return traj;
}

std::vector<Field> midpoint_states(const Trajectory& traj) {
  std::vector<Field> ybar(traj.y.size());
  ybar[0] = Field::Zero(traj.y[0].size());
  for (std::size_t k = 1; k < traj.y.size(); ++k)
    ybar[k] = 0.5 * (traj.y[k - 1] + traj.y[k]);
  return ybar;
}

double constraint_residual(const Trajectory& traj, const ProblemData& data) {
  const double dt = data.dt();
  double worst = 0.0;
  for (int k = 1; k <= data.steps; ++k) {
    const Field res =
        (traj.y[k] - traj.y[k - 1]) / dt + data.op->apply(traj.w[k]) - data.f[k];
    worst = std::max(worst, data.grid->l2_norm(res));
  }
  return worst;
}

FunctionalEval functional_with_gradient(const FluxTrajectory& w,
                                        const ProblemData& data,
                                        const RegularizedPotential& reg) {
  if (!(reg.sigma() > 0.0))
    throw std::invalid_argument("adjoint_gradient: requires sigma > 0");
  const Grid& g = *data.grid;
  const RobinOperator& A = *data.op;
  const int n = g.node_count();
  const int K = data.steps;
  const double dt = data.dt();
  const Field& q = g.quad_weights;

  FunctionalEval out;
  out.trajectory = integrate_state(w, data);
  const std::vector<Field> ybar = midpoint_states(out.trajectory);

  // Pointwise slopes of j_{lambda,sigma} at ybar and of its conjugate at w,
  // accumulating the functional value in the same pass.
  double integral = 0.0;
  double magnitude = 0.0;
  std::vector<Field> gtilde(K + 1);   // dt W (j'_{ls}(ybar) - A^{-1} f)
  std::vector<Field> dstar(K + 1);    // conjugate maximizers at w
  for (int k = 1; k <= K; ++k) {
    const double t = data.time_at(k);
    Field slope_y(n), dk(n);
    double acc = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i) {
      const ValueSlope jy = reg.value(t, g.coords[i], ybar[k][i]);
      const ValueSlope jsw = reg.conjugate(t, g.coords[i], w[k][i]);
      slope_y[i] = jy.slope;
      dk[i] = jsw.slope;
      acc += q[i] * (jy.value + jsw.value - ybar[k][i] * data.f_dual[k][i]);
      mag += q[i] * (std::abs(jy.value) + std::abs(jsw.value) +
                     std::abs(ybar[k][i] * data.f_dual[k][i]));
    }
    integral += dt * acc;
    magnitude += dt * mag;
    gtilde[k] = dt * q.cwiseProduct(slope_y - data.f_dual[k]);
    dstar[k] = std::move(dk);
  }
  const Field& yK = out.trajectory.y[K];
  const double terminal = 0.5 * A.vdual_inner(yK, yK);
  const double initial = 0.5 * A.vdual_inner(data.y0, data.y0);
  out.value = integral + terminal - initial;
  out.magnitude = magnitude + terminal + initial;

  // Backward sweep. S_m = sum_{k>m} gtilde[k] + gtilde[m]/2 + W A^{-1} y[K];
  // grad[m] = dt (W dstar[m] - G W^{-1} S_m).
  const Eigen::SparseMatrix<double>& G = A.form_matrix();
  Field S = 0.5 * gtilde[K] + q.cwiseProduct(A.solve(yK));
  out.gradient.assign(K + 1, Field::Zero(n));
  for (int m = K; m >= 1; --m) {
    out.gradient[m] = dt * (q.cwiseProduct(dstar[m]) -
                            Field(G * Field(S.cwiseQuotient(q))));
    if (m > 1) S += 0.5 * (gtilde[m - 1] + gtilde[m]);
  }
  return out;
}

FluxTrajectory adjoint_gradient(const FluxTrajectory& w,
                                const ProblemData& data,
                                const RegularizedPotential& reg) {
  return functional_with_gradient(w, data, reg).gradient;
}

}  // namespace bevar
