// Vertex-centered uniform lattice on a box (1D/2D) with trapezoid quadrature,
// and the discrete Robin elliptic operator A assembled from the bilinear form
//
//   <A u, v> = sum_edges  grad u . grad v  quadrature + alpha * sum_boundary u v s_b,
//
// symmetric positive definite in the weighted L2 inner product
// <u,v> = sum_i w_i u_i v_i. A induces the V norm |u|_V^2 = <A u, u> and the
// dual V' inner product (u,v)_{V'} = <u, A^{-1} v>.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "bevar/potential.hpp"  // Point

namespace bevar {

using Field = Eigen::VectorXd;

struct Grid {
  int dim = 1;                        // 1 or 2
  std::vector<double> lengths;        // per-axis extents
  std::vector<int> cells;             // per-axis cell counts
  std::vector<int> nodes_per_axis;    // cells + 1
  Field quad_weights;                 // interior quadrature w_i (volume)
  std::vector<Point> coords;          // node coordinates
  std::vector<int> boundary_nodes;    // indices into the nodal vector
  Field boundary_weights;             // surface measure s_b per boundary node

  int node_count() const { return static_cast<int>(coords.size()); }
  double spacing(int axis) const { return lengths[axis] / cells[axis]; }
  double domain_measure() const;
  double boundary_measure() const;

  // Weighted L2: <u,v> = sum_i w_i u_i v_i.
  double weighted_inner(const Field& u, const Field& v) const;
  double l2_norm(const Field& u) const;

  // Samples g(t, x_i) into a nodal field.
  template <class G>
  Field sample(double t, G&& g) const {
    Field out(node_count());
    for (int i = 0; i < node_count(); ++i) out[i] = g(t, coords[i]);
    return out;
  }
};

// dim in {1,2}; cells >= 2 per axis; lengths > 0. dim == 3 is rejected.
Grid build_grid(int dim, const std::vector<double>& lengths,
                const std::vector<int>& cells);

class RobinOperator {
 public:
  RobinOperator(std::shared_ptr<const Grid> grid, double alpha);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  double alpha() const { return alpha_; }

  // A u = W^{-1} G u (second-order centered Laplacian with Robin closure).
  Field apply(const Field& u) const;

  // A^{-1} rhs by the cached direct factorization; the residual
  // |A out - rhs| <= tol |rhs| is verified.
  Field solve(const Field& rhs, double tol = 1e-10) const;

  // |u|_V^2 = <A u, u> = u^T G u.
  double v_norm_sq(const Field& u) const;
  double v_norm(const Field& u) const;

  // (u, v)_{V'} = <u, A^{-1} v> (symmetric positive definite).
  double vdual_inner(const Field& u, const Field& v) const;
  double vdual_norm(const Field& u) const;

  // The symmetric form matrix G (grad-grad quadrature + alpha boundary mass).
  const Eigen::SparseMatrix<double>& form_matrix() const { return G_; }

 private:
  std::shared_ptr<const Grid> grid_;
  double alpha_;
  Eigen::SparseMatrix<double> G_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

std::shared_ptr<const RobinOperator> build_robin_operator(
    std::shared_ptr<const Grid> grid, double alpha);

}  // namespace bevar
