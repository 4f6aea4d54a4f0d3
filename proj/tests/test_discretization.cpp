#include <doctest.h>

#include <cmath>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <random>

#include "support.hpp"

using namespace rtrb;
using namespace rtrb::test;

namespace {

// L2 error against an analytic function with a 12-point rule per axis.
double l2_error(const DGSpace& space, const Vector& f, const std::function<double(const Point&)>& exact) {
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    space.element_rule(e, 12, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      double v = 0.0;
      for (int k = 0; k < space.block_size(); ++k) v += f[e * space.block_size() + k] * space.basis(e, k, pts[q]);
      sum += wts[q] * std::pow(v - exact(pts[q]), 2);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("orthonormal Legendre values") {
  std::vector<double> x, w;
  gauss_legendre_rule(6, x, w);
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) {
      double s = 0.0;
      for (std::size_t q = 0; q < x.size(); ++q) s += 0.5 * w[q] * legendre_orthonormal(a, x[q]) * legendre_orthonormal(b, x[q]);
      CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-14).scale(1.0));
    }
  CHECK(legendre_orthonormal(1, 0.5) == doctest::Approx(std::sqrt(3.0) * 0.5));
  CHECK(legendre_orthonormal_derivative(2, 0.5) == doctest::Approx(std::sqrt(5.0) * 1.5));
}

TEST_CASE("mesh geometry") {
  const auto p = build_example(ExampleId::plane_scattering);
  const Mesh m = build_mesh(p, 4, 5);
  CHECK(m.num_elements() == 20);
  CHECK(m.hx == 2.5);
  CHECK(m.hy == 2.0);
  CHECK(m.locate({0.0, 0.0}) == 0);
  CHECK(m.locate({2.5, 1.0}) == 0);
  CHECK(m.locate({2.6, 2.0}) == 1);
  CHECK(m.locate({10.0, 10.0}) == 19);
  CHECK(m.center(m.element(1, 2)).x == 3.75);
  CHECK(m.center(m.element(1, 2)).y == 5.0);
  CHECK_THROWS_AS(m.locate({10.5, 1.0}), std::out_of_range);
  CHECK_THROWS_AS(build_mesh(p, 0, 3), std::invalid_argument);
}

TEST_CASE("field evaluation and projection") {
  const auto p = build_example(ExampleId::slab_scattering);
  const DGSpace space(build_mesh(p, 20), 1);
  const Vector one = project(space, [](const Point&) { return 1.0; });
  for (double x : {0.0, 0.3, 5.0, 9.99, 10.0}) CHECK(eval_field(space, one, {x, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l2_norm(space, one) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));

  const Vector lin = project(space, [](const Point& q) { return 2.0 * q.x - 1.0; });
  for (double x : {0.1, 2.2, 7.77}) CHECK(eval_field(space, lin, {x, 0}) == doctest::Approx(2.0 * x - 1.0).epsilon(1e-13));

  // a discontinuous field: interfaces report the left element trace
  Vector jump = Vector::Zero(space.num_dofs());
  jump.segment(0, 2) = project(space, [](const Point&) { return 3.0; }).segment(0, 2);
  CHECK(eval_field(space, jump, {0.5, 0}) == doctest::Approx(3.0));
  CHECK(eval_field(space, jump, {0.5000001, 0}) == 0.0);
  CHECK_THROWS_AS(eval_field(space, jump, {11.0, 0}), std::out_of_range);

  const auto p2 = build_example(ExampleId::plane_transport);
  const DGSpace s2(build_mesh(p2, 5, 5), 1);
  const Vector bil = project(s2, [](const Point& q) { return 1.0 + q.x - 2.0 * q.y + 0.5 * q.x * q.y; });
  CHECK(eval_field(s2, bil, {3.3, 7.1}) == doctest::Approx(1.0 + 3.3 - 14.2 + 0.5 * 3.3 * 7.1).epsilon(1e-13));
}

TEST_CASE("mass matrix is the identity and reaction matrices are symmetric") {
  const auto p = build_example(ExampleId::plane_checkerboard);
  const DGSpace space(build_mesh(p, 10, 10), 1);
  const Matrix m = Matrix(mass_matrix(space).to_sparse());
  CHECK((m - Matrix::Identity(space.num_dofs(), space.num_dofs())).cwiseAbs().maxCoeff() < 1e-13);
  std::mt19937 rng(3);
  for (int t = 0; t < 5; ++t) {
    const Vector f = random_vector(space.num_dofs(), rng);
    CHECK(f.dot(m * f) > 0.0);
  }
  const Matrix st = Matrix(assemble_reaction(space, p.sigma_t).to_sparse());
  CHECK((st - st.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("volumetric source matches a 10-point Gauss oracle") {
  const auto p = build_example(ExampleId::plane_transport);
  const DGSpace space(build_mesh(p, 40, 40), 1);
  const Vector g = assemble_source(space, p, Direction::planar(0.3));
  std::vector<double> x, w;
  gauss_legendre_rule(10, x, w);
  const Mesh& mesh = space.mesh();
  double max_err = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Point c = mesh.center(e);
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
          const Point q{c.x + 0.5 * mesh.hx * x[a], c.y + 0.5 * mesh.hy * x[b]};
          s += 0.25 * mesh.hx * mesh.hy * w[a] * w[b] * p.source(q) * space.basis(e, k, q);
        }
      max_err = std::max(max_err, std::abs(s - g[e * 4 + k]));
    }
  }
  CHECK(max_err < 1e-7 * g.cwiseAbs().maxCoeff());
}

TEST_CASE("inflow term of the two-material slab") {
  const auto p = build_example(ExampleId::slab_two_material_2);
  const DGSpace space(build_mesh(p, 88), 1);
  for (double v : {0.2, 0.9}) {
    const auto dir = Direction::slab(v);
    const Vector b = assemble_source(space, p, dir, true) - assemble_source(space, p, dir, false);
    const double h = space.mesh().hx;
    CHECK(b[0] == doctest::Approx(5.0 * v / std::sqrt(h)).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(-5.0 * v * std::sqrt(3.0 / h)).epsilon(1e-13));
    CHECK(b.tail(b.size() - 2).cwiseAbs().maxCoeff() == 0.0);
  }
  const auto back = Direction::slab(-0.5);
  CHECK((assemble_source(space, p, back, true) - assemble_source(space, p, back, false)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweep order makes the system block lower triangular") {
  const auto p = build_example(ExampleId::plane_checkerboard);
  const auto space = space_for(p, 6, 5);
  const BlockDiagonal st = assemble_reaction(*space, p.sigma_t);
  const auto q = uniform_circle(8);
  for (const auto& dir : q.directions) {
    const StreamingOperator u = assemble_streaming(*space, dir);
    std::vector<int> position(u.num_elements);
    for (int i = 0; i < u.num_elements; ++i) position[u.ordering[i]] = i;
    const SparseMatrix a = u.to_sparse() + st.to_sparse();
    for (int col = 0; col < a.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
        if (it.value() == 0.0) continue;
        CHECK(position[it.row() / u.block] >= position[it.col() / u.block]);
      }
  }
  for (double v : {-0.7, 0.4}) {
    const auto pslab = build_example(ExampleId::slab_scattering);
    const auto s1 = space_for(pslab, 12);
    const StreamingOperator u = assemble_streaming(*s1, Direction::slab(v));
    CHECK(u.ordering.front() == (v > 0 ? 0 : 11));
  }
}

TEST_CASE("a sweep solves the direction system exactly") {
  const auto p = build_example(ExampleId::plane_checkerboard);
  const auto space = space_for(p, 8, 8);
  const auto q = uniform_circle(4);
  const DGOperators ops = assemble_operators(space, p, q.directions);
  std::mt19937 rng(11);
  const Vector rho = random_vector(space->num_dofs(), rng);
  const auto fields = transport_sweep(ops, rho);
  Vector srho;
  ops.sigma_s.apply(rho, srho);
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto& op = *ops.directions[j];
    const SparseMatrix a = op.streaming.to_sparse() + ops.sigma_t.to_sparse();
    const Vector rhs = srho + op.source;
    CHECK((a * fields[j] - rhs).norm() <= 1e-10 * rhs.norm());
    Eigen::SparseLU<SparseMatrix> lu(a);
    CHECK((lu.solve(rhs) - fields[j]).norm() <= 1e-10 * fields[j].norm());
    Vector y;
    op.streaming.apply(fields[j], y);
    CHECK((y - op.streaming.to_sparse() * fields[j]).norm() <= 1e-12 * y.norm());
  }
}

TEST_CASE("particle balance for a purely scattering slab") {
  const auto p = build_example(ExampleId::slab_scattering);
  const auto space = space_for(p, 20);
  const auto q = gauss_legendre(8);
  const DGOperators ops = assemble_operators(space, p, q.directions);
  const auto sol = coupled_direct_solve(ops, q.weights);
  double outflow = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double v = q.directions[j].v();
    const Point x{v > 0 ? 10.0 : 0.0, 0.0};
    // eval_field takes the left trace; the outflow at x=0 needs the first element
    double trace = 0.0;
    const int e = v > 0 ? 19 : 0;
    for (int k = 0; k < 2; ++k) trace += sol.fields[j][e * 2 + k] * space->basis(e, k, x);
    outflow += q.weights[j] * std::abs(v) * trace;
  }
  CHECK(outflow == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("streaming discretization converges at second order") {
  const auto p = slab_problem(1.0, 1.0, 0.0, 1.0);
  const double v = 0.5;
  auto exact = [v](const Point& x) { return 1.0 - std::exp(-x.x / v); };
  std::vector<double> errors;
  for (int n : {10, 20, 40, 80}) {
    const auto space = space_for(p, n);
    const std::vector<Direction> dirs{Direction::slab(v)};
    const DGOperators ops = assemble_operators(space, p, dirs);
    Vector f;
    sweep_direction(*ops.directions[0], ops.directions[0]->source, f);
    errors.push_back(l2_error(*space, f, exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("direction subsets share operators") {
  const auto p = build_example(ExampleId::slab_transport);
  const auto space = space_for(p, 10);
  const auto q = gauss_legendre(6);
  const DGOperators ops = assemble_operators(space, p, q.directions);
  const std::vector<int> idx{4, 1};
  const DGOperators sub = ops.subset(idx);
  CHECK(sub.num_directions() == 2u);
  CHECK(sub.directions[0].get() == ops.directions[4].get());
  const auto extra = assemble_direction(ops, p, Direction::slab(0.123));
  CHECK(extra->direction.v() == 0.123);
}

TEST_CASE("field CSV layout") {
  const auto p = build_example(ExampleId::plane_scattering);
  const DGSpace space(build_mesh(p, 2, 2), 1);
  const Vector f = Vector::LinSpaced(space.num_dofs(), 0.0, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "rtrb_field_test.csv";
  write_field_csv(space, f, path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "element,x_center,y_center,c0,c1,c2,c3");
  CHECK(row.rfind("0,2.50000000000000000e+00,2.50000000000000000e+00,0.00000000000000000e+00,", 0) == 0);
  std::filesystem::remove(path);
}
