#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bevar/grid.hpp"

using namespace bevar;

namespace {

std::shared_ptr<const Grid> grid1d(int cells, double L = 1.0) {
  return std::make_shared<const Grid>(build_grid(1, {L}, {cells}));
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g.node_count());
  for (int i = 0; i < f.size(); ++i) f[i] = n(rng);
  return f;
}

}  // namespace

TEST_CASE("build_grid: 1D weights and boundary") {
  const auto g = grid1d(4);
  CHECK(g->node_count() == 5);
  CHECK(g->spacing(0) == doctest::Approx(0.25));
  const std::vector<double> expect{0.125, 0.25, 0.25, 0.25, 0.125};
  for (int i = 0; i < 5; ++i)
    CHECK(g->quad_weights[i] == doctest::Approx(expect[i]));
  REQUIRE(g->boundary_nodes.size() == 2);
  CHECK(g->boundary_nodes[0] == 0);
  CHECK(g->boundary_nodes[1] == 4);
  CHECK(g->boundary_weights[0] == doctest::Approx(1.0));
  CHECK(g->boundary_weights[1] == doctest::Approx(1.0));
  CHECK(g->domain_measure() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("build_grid: 2D unit square") {
  const Grid g = build_grid(2, {1.0, 1.0}, {2, 2});
  CHECK(g.node_count() == 9);
  CHECK(g.domain_measure() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(g.boundary_measure() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(g.boundary_nodes.size() == 8);  // all but the center
}

TEST_CASE("build_grid: rejects bad arguments") {
  CHECK_THROWS_AS(build_grid(3, {1, 1, 1}, {4, 4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1, {0.0}, {4}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1, {1.0}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(2, {1.0}, {4, 4}), std::invalid_argument);
}

TEST_CASE("robin operator: rejects alpha <= 0") {
  CHECK_THROWS_AS(RobinOperator(grid1d(8), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RobinOperator(grid1d(8), -1.0), std::invalid_argument);
}

TEST_CASE("robin operator: solve is the inverse of apply") {
  std::mt19937_64 rng(3);
  for (int cells : {8, 33}) {
    const auto op = build_robin_operator(grid1d(cells), 1.0);
    const Field z = random_field(op->grid(), rng);
    const Field back = op->solve(op->apply(z));
    CHECK((back - z).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(op->solve(Field::Zero(op->grid().node_count())).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("robin operator: constant function sees only the boundary term") {
  const auto op = build_robin_operator(grid1d(16), 1.0);
  const Field c = Field::Constant(17, 3.0);
  // <A u, u> = alpha (u(0)^2 + u(1)^2) = 2 c^2
  CHECK(op->v_norm_sq(c) == doctest::Approx(2.0 * 9.0).epsilon(1e-13));
  const Field ones = Field::Ones(17);
  CHECK(op->v_norm(ones) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("robin operator: weighted symmetry and positivity") {
  std::mt19937_64 rng(5);
  for (int dim : {1, 2}) {
    const auto gp = dim == 1
                        ? grid1d(24)
                        : std::make_shared<const Grid>(
                              build_grid(2, {1.0, 2.0}, {6, 9}));
    const auto op = build_robin_operator(gp, 0.7);
    for (int k = 0; k < 100; ++k) {
      const Field u = random_field(*gp, rng);
      const Field v = random_field(*gp, rng);
      const double left = gp->weighted_inner(op->apply(u), v);
      const double right = gp->weighted_inner(u, op->apply(v));
      CHECK(std::abs(left - right) <=
            1e-12 * (1.0 + std::abs(left) + std::abs(right)));
      if (u.cwiseAbs().maxCoeff() > 0.0) CHECK(op->v_norm_sq(u) > 0.0);
    }
  }
}

TEST_CASE("apply_A: linearity, zero, interior stencil") {
  std::mt19937_64 rng(7);
  const auto op = build_robin_operator(grid1d(10), 1.0);
  const Grid& g = op->grid();
  CHECK(op->apply(Field::Zero(11)).cwiseAbs().maxCoeff() == 0.0);
  const Field u = random_field(g, rng), v = random_field(g, rng);
  const Field lin = op->apply(u + v) - op->apply(u) - op->apply(v);
  CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);
  // u = x is harmonic: centered second difference vanishes at interior nodes.
  Field x(11);
  for (int i = 0; i < 11; ++i) x[i] = g.coords[i].x0;
  const Field ax = op->apply(x);
  for (int i = 2; i < 9; ++i) CHECK(std::abs(ax[i]) < 1e-10);
}

TEST_CASE("solve_A matches a dense factorization oracle") {
  const auto op = build_robin_operator(grid1d(64), 1.0);
  const int n = op->grid().node_count();
  // Independent route: assemble dense A column by column, dense LU solve.
  Eigen::MatrixXd A(n, n);
  for (int jcol = 0; jcol < n; ++jcol) {
    Field e = Field::Zero(n);
    e[jcol] = 1.0;
    A.col(jcol) = op->apply(e);
  }
  const Field rhs = Field::Ones(n);
  const Field dense = A.fullPivLu().solve(rhs);
  const Field fast = op->solve(rhs);
  CHECK((dense - fast).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("v-norm and dual inner product identities") {
  std::mt19937_64 rng(11);
  const auto op = build_robin_operator(grid1d(20), 1.0);
  const Grid& g = op->grid();
  for (int k = 0; k < 100; ++k) {
    const Field z = random_field(g, rng);
    const Field az = op->apply(z);
    CHECK(op->vdual_inner(az, az) ==
          doctest::Approx(op->v_norm_sq(z)).epsilon(1e-11));
    const Field u = random_field(g, rng), v = random_field(g, rng);
    CHECK(op->vdual_inner(u, v) ==
          doctest::Approx(op->vdual_inner(v, u)).epsilon(1e-11));
    if (u.cwiseAbs().maxCoeff() > 0.0) CHECK(op->vdual_inner(u, u) > 0.0);
  }
}

TEST_CASE("discrete integration by parts") {
  // <A u, v> equals the assembled bilinear form: per-edge differences plus
  // the alpha boundary term (1D check with independently coded form).
  std::mt19937_64 rng(13);
  const int cells = 32;
  const auto op = build_robin_operator(grid1d(cells), 0.9);
  const Grid& g = op->grid();
  const double h = g.spacing(0);
  for (int k = 0; k < 50; ++k) {
    const Field u = random_field(g, rng), v = random_field(g, rng);
    double form = 0.0;
    for (int i = 0; i < cells; ++i)
      form += (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / h;
    form += 0.9 * (u[0] * v[0] + u[cells] * v[cells]);
    const double lhs = g.weighted_inner(op->apply(u), v);
    CHECK(std::abs(lhs - form) <= 1e-12 * (1.0 + std::abs(form)));
  }
}

TEST_CASE("mesh refinement: second order for cos(pi x)") {
  // <A u, u> -> int |u'|^2 + alpha (u(0)^2 + u(1)^2) = pi^2/2 + 2 alpha.
  const double alpha = 1.0;
  const double exact = M_PI * M_PI / 2.0 + 2.0 * alpha;
  std::vector<double> errors;
  for (int cells : {16, 32, 64, 128}) {
    const auto op = build_robin_operator(grid1d(cells), alpha);
    const Grid& g = op->grid();
    Field u(g.node_count());
    for (int i = 0; i < u.size(); ++i) u[i] = std::cos(M_PI * g.coords[i].x0);
    errors.push_back(std::abs(op->v_norm_sq(u) - exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i)
    CHECK(errors[i - 1] / errors[i] > 3.5);  // ~4x per refinement
}

TEST_CASE("M-matrix stencil: off-diagonal entries nonpositive") {
  for (int dim : {1, 2}) {
    const auto gp = dim == 1 ? grid1d(12)
                             : std::make_shared<const Grid>(
                                   build_grid(2, {1.0, 1.0}, {5, 7}));
    const auto op = build_robin_operator(gp, 1.0);
    const auto& G = op->form_matrix();
    for (int k = 0; k < G.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(G, k); it; ++it)
        if (it.row() != it.col()) CHECK(it.value() <= 0.0);
  }
}
