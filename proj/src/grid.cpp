#include "bevar/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bevar {

double Grid::domain_measure() const { return quad_weights.sum(); }
double Grid::boundary_measure() const { return boundary_weights.sum(); }

double Grid::weighted_inner(const Field& u, const Field& v) const {
  return (quad_weights.array() * u.array() * v.array()).sum();
}

double Grid::l2_norm(const Field& u) const {
  return std::sqrt(weighted_inner(u, u));
}

Grid build_grid(int dim, const std::vector<double>& lengths,
                const std::vector<int>& cells) {
  if (dim == 3)
    throw std::invalid_argument("build_grid: dim = 3 is unsupported");
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("build_grid: dim must be 1 or 2");
  if (static_cast<int>(lengths.size()) != dim ||
      static_cast<int>(cells.size()) != dim)
    throw std::invalid_argument("build_grid: lengths/cells size must equal dim");
  for (int d = 0; d < dim; ++d) {
    if (!(lengths[d] > 0.0))
      throw std::invalid_argument("build_grid: lengths must be > 0");
    if (cells[d] < 2)
      throw std::invalid_argument("build_grid: need >= 2 cells per axis");
  }

  Grid g;
  g.dim = dim;
  g.lengths = lengths;
  g.cells = cells;
  for (int d = 0; d < dim; ++d) g.nodes_per_axis.push_back(cells[d] + 1);

  // Per-axis trapezoid weights (half weight at the ends).
  const auto axis_weights = [&](int d) {
    const double h = g.spacing(d);
    std::vector<double> w(g.nodes_per_axis[d], h);
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
  };

  if (dim == 1) {
    const int n = g.nodes_per_axis[0];
    const auto wx = axis_weights(0);
    g.quad_weights.resize(n);
    g.coords.resize(n);
    for (int i = 0; i < n; ++i) {
      g.quad_weights[i] = wx[i];
      g.coords[i] = Point{i * g.spacing(0), 0.0};
    }
    // 0-dimensional boundary: counting measure.
    g.boundary_nodes = {0, n - 1};
    g.boundary_weights = Field::Ones(2);
  } else {
    const int n0 = g.nodes_per_axis[0], n1 = g.nodes_per_axis[1];
    const auto wx = axis_weights(0);
    const auto wy = axis_weights(1);
    g.quad_weights.resize(n0 * n1);
    g.coords.resize(n0 * n1);
    std::vector<double> bweight(n0 * n1, 0.0);
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        const int idx = i + n0 * j;
        g.quad_weights[idx] = wx[i] * wy[j];
        g.coords[idx] = Point{i * g.spacing(0), j * g.spacing(1)};
        // Faces x = 0 and x = L0 carry the y-trapezoid measure and vice
        // versa; corners accumulate both incident faces.
        if (i == 0 || i == n0 - 1) bweight[idx] += wy[j];
        if (j == 0 || j == n1 - 1) bweight[idx] += wx[i];
      }
    }
    for (int idx = 0; idx < n0 * n1; ++idx) {
      if (bweight[idx] > 0.0) g.boundary_nodes.push_back(idx);
    }
    g.boundary_weights.resize(static_cast<int>(g.boundary_nodes.size()));
    for (std::size_t b = 0; b < g.boundary_nodes.size(); ++b)
      g.boundary_weights[static_cast<int>(b)] = bweight[g.boundary_nodes[b]];
  }
  return g;
}

RobinOperator::RobinOperator(std::shared_ptr<const Grid> grid, double alpha)
    : grid_(std::move(grid)), alpha_(alpha) {
  if (!(alpha_ > 0.0))
    throw std::invalid_argument(
        "build_robin_operator: alpha must be > 0 (A must be invertible)");
  const Grid& g = *grid_;
  const int n = g.node_count();
  std::vector<Eigen::Triplet<double>> trip;

  // Edge-difference quadrature of grad u . grad v: each lattice edge along
  // axis d contributes (du dv / h_d^2) * (h_d * transverse weight). This
  // yields the 5-point (3-point in 1D) stencil with off-diagonals <= 0.
  if (g.dim == 1) {
    const double h = g.spacing(0);
    for (int i = 0; i + 1 < g.nodes_per_axis[0]; ++i) {
      const double c = 1.0 / h;
      trip.emplace_back(i, i, c);
      trip.emplace_back(i + 1, i + 1, c);
      trip.emplace_back(i, i + 1, -c);
      trip.emplace_back(i + 1, i, -c);
    }
  } else {
    const int n0 = g.nodes_per_axis[0], n1 = g.nodes_per_axis[1];
    const double h0 = g.spacing(0), h1 = g.spacing(1);
    const auto tw = [&](int idx_along, int count, double h) {
      return (idx_along == 0 || idx_along == count - 1) ? 0.5 * h : h;
    };
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i + 1 < n0; ++i) {
        const double c = tw(j, n1, h1) / h0;
        const int a = i + n0 * j, b = a + 1;
        trip.emplace_back(a, a, c);
        trip.emplace_back(b, b, c);
        trip.emplace_back(a, b, -c);
        trip.emplace_back(b, a, -c);
      }
    }
    for (int j = 0; j + 1 < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        const double c = tw(i, n0, h0) / h1;
        const int a = i + n0 * j, b = a + n0;
        trip.emplace_back(a, a, c);
        trip.emplace_back(b, b, c);
        trip.emplace_back(a, b, -c);
        trip.emplace_back(b, a, -c);
      }
    }
  }
  for (std::size_t b = 0; b < g.boundary_nodes.size(); ++b)
    trip.emplace_back(g.boundary_nodes[b], g.boundary_nodes[b],
                      alpha_ * g.boundary_weights[static_cast<int>(b)]);

  G_.resize(n, n);
  G_.setFromTriplets(trip.begin(), trip.end());
  G_.makeCompressed();
  ldlt_.compute(G_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("RobinOperator: factorization of A failed");
}

Field RobinOperator::apply(const Field& u) const {
  if (u.size() != grid_->node_count())
    throw std::invalid_argument("apply_A: field size mismatch");
  return (G_ * u).cwiseQuotient(grid_->quad_weights);
}

Field RobinOperator::solve(const Field& rhs, double tol) const {
  if (rhs.size() != grid_->node_count())
    throw std::invalid_argument("solve_A: field size mismatch");
  const Field z = ldlt_.solve(rhs.cwiseProduct(grid_->quad_weights));
  const double rhs_norm = grid_->l2_norm(rhs);
  if (rhs_norm > 0.0) {
    const double res = grid_->l2_norm(apply(z) - rhs);
    if (!(res <= tol * rhs_norm))
      throw std::runtime_error("solve_A: residual above tolerance");
  }
  return z;
}

double RobinOperator::v_norm_sq(const Field& u) const {
  if (u.size() != grid_->node_count())
    throw std::invalid_argument("v_norm: field size mismatch");
  return u.dot(G_ * u);
}

double RobinOperator::v_norm(const Field& u) const {
  return std::sqrt(std::max(0.0, v_norm_sq(u)));
}

double RobinOperator::vdual_inner(const Field& u, const Field& v) const {
  if (u.size() != grid_->node_count() || v.size() != grid_->node_count())
    throw std::invalid_argument("vdual_inner: field size mismatch");
  const Field av = ldlt_.solve(v.cwiseProduct(grid_->quad_weights));
  return u.cwiseProduct(grid_->quad_weights).dot(av);
}

double RobinOperator::vdual_norm(const Field& u) const {
  return std::sqrt(std::max(0.0, vdual_inner(u, u)));
}

std::shared_ptr<const RobinOperator> build_robin_operator(
    std::shared_ptr<const Grid> grid, double alpha) {
  return std::make_shared<const RobinOperator>(std::move(grid), alpha);
}

}  // namespace bevar
