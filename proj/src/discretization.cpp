#include "rtrb/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>

#include "rtrb/kernels.hpp"

namespace rtrb {

namespace {

// Points per axis for operator integrals: exact for K=1 with piecewise
// constant or linear coefficients.
int operator_points(int degree) { return degree + 2; }
// Sources and inflow data may be far from polynomial (the Gaussian source).
constexpr int kSourcePoints = 8;

struct Face {
  Point normal;
  int neighbor;      // -1 on the domain boundary
  Point a, b;        // end points (a == b in 1D)
};

std::vector<Face> element_faces(const Mesh& m, int e) {
  const int ix = m.ix(e), iy = m.iy(e);
  const double x0 = m.x_node(ix), x1 = m.x_node(ix + 1);
  std::vector<Face> faces;
  if (m.dimension == 1) {
    faces.push_back({{-1.0, 0.0}, ix > 0 ? e - 1 : -1, {x0, 0.0}, {x0, 0.0}});
    faces.push_back({{1.0, 0.0}, ix + 1 < m.nx ? e + 1 : -1, {x1, 0.0}, {x1, 0.0}});
    return faces;
  }
  const double y0 = m.y_node(iy), y1 = m.y_node(iy + 1);
  faces.push_back({{-1.0, 0.0}, ix > 0 ? m.element(ix - 1, iy) : -1, {x0, y0}, {x0, y1}});
  faces.push_back({{1.0, 0.0}, ix + 1 < m.nx ? m.element(ix + 1, iy) : -1, {x1, y0}, {x1, y1}});
  faces.push_back({{0.0, -1.0}, iy > 0 ? m.element(ix, iy - 1) : -1, {x0, y0}, {x1, y0}});
  faces.push_back({{0.0, 1.0}, iy + 1 < m.ny ? m.element(ix, iy + 1) : -1, {x0, y1}, {x1, y1}});
  return faces;
}

// Quadrature on a face: a single unit-weight point in 1D.
void face_rule(const Face& f, int dim, int n, std::vector<Point>& pts, std::vector<double>& wts) {
  pts.clear();
  wts.clear();
  if (dim == 1) {
    pts.push_back(f.a);
    wts.push_back(1.0);
    return;
  }
  std::vector<double> xi, w;
  gauss_legendre_rule(n, xi, w);
  const double len = std::hypot(f.b.x - f.a.x, f.b.y - f.a.y);
  for (int q = 0; q < n; ++q) {
    const double t = 0.5 * (xi[q] + 1.0);
    pts.push_back({f.a.x + t * (f.b.x - f.a.x), f.a.y + t * (f.b.y - f.a.y)});
    wts.push_back(0.5 * w[q] * len);
  }
}

double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }

}  // namespace

Point Mesh::center(int e) const {
  const int i = ix(e), j = iy(e);
  Point c{0.5 * (x_node(i) + x_node(i + 1)), 0.0};
  if (dimension == 2) c.y = 0.5 * (y_node(j) + y_node(j + 1));
  return c;
}

int Mesh::locate(const Point& p) const {
  if (!domain.contains(p, dimension)) throw std::out_of_range("point outside the mesh domain");
  auto index = [](double v, double lo, double h, int n) {
    int i = static_cast<int>(std::ceil((v - lo) / h)) - 1;
    return std::clamp(i, 0, n - 1);
  };
  const int i = index(p.x, domain.x_lo, hx, nx);
  const int j = dimension == 2 ? index(p.y, domain.y_lo, hy, ny) : 0;
  return element(i, j);
}

Mesh build_mesh(const ProblemSpec& problem, int nx, int ny) {
  if (nx < 1 || (problem.dimension == 2 && ny < 1)) throw std::invalid_argument("build_mesh: need at least one cell per axis");
  Mesh m;
  m.dimension = problem.dimension;
  m.domain = problem.domain;
  m.nx = nx;
  m.ny = problem.dimension == 2 ? ny : 1;
  m.hx = (m.domain.x_hi - m.domain.x_lo) / nx;
  m.hy = problem.dimension == 2 ? (m.domain.y_hi - m.domain.y_lo) / m.ny : 1.0;
  return m;
}

double legendre_orthonormal(int a, double xi) {
  double p0 = 1.0, p1 = xi;
  if (a == 0) return 1.0;
  for (int k = 2; k <= a; ++k) {
    const double pk = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return std::sqrt(2.0 * a + 1.0) * p1;
}

double legendre_orthonormal_derivative(int a, double xi) {
  // P'_a = sum over k = a-1, a-3, ... of (2k+1) P_k
  double d = 0.0;
  for (int k = a - 1; k >= 0; k -= 2) d += (2.0 * k + 1.0) * legendre_orthonormal(k, xi) / std::sqrt(2.0 * k + 1.0);
  return std::sqrt(2.0 * a + 1.0) * d;
}

DGSpace::DGSpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ < 0) throw std::invalid_argument("DG degree must be non-negative");
  block_ = mesh_.dimension == 2 ? (degree_ + 1) * (degree_ + 1) : degree_ + 1;
}

double DGSpace::basis(int e, int local, const Point& p) const {
  const Point c = mesh_.center(e);
  const double xi = 2.0 * (p.x - c.x) / mesh_.hx;
  double v = legendre_orthonormal(degree_x(local), xi) / std::sqrt(mesh_.hx);
  if (mesh_.dimension == 2) {
    const double eta = 2.0 * (p.y - c.y) / mesh_.hy;
    v *= legendre_orthonormal(degree_y(local), eta) / std::sqrt(mesh_.hy);
  }
  return v;
}

Point DGSpace::basis_gradient(int e, int local, const Point& p) const {
  const Point c = mesh_.center(e);
  const double xi = 2.0 * (p.x - c.x) / mesh_.hx;
  const int a = degree_x(local);
  const double sx = 1.0 / std::sqrt(mesh_.hx);
  if (mesh_.dimension == 1) return {legendre_orthonormal_derivative(a, xi) * sx * 2.0 / mesh_.hx, 0.0};
  const double eta = 2.0 * (p.y - c.y) / mesh_.hy;
  const int b = degree_y(local);
  const double sy = 1.0 / std::sqrt(mesh_.hy);
  return {legendre_orthonormal_derivative(a, xi) * sx * 2.0 / mesh_.hx * legendre_orthonormal(b, eta) * sy,
          legendre_orthonormal(a, xi) * sx * legendre_orthonormal_derivative(b, eta) * sy * 2.0 / mesh_.hy};
}

void DGSpace::element_rule(int e, int n, std::vector<Point>& pts, std::vector<double>& wts) const {
  std::vector<double> xi, w;
  gauss_legendre_rule(n, xi, w);
  const Point c = mesh_.center(e);
  pts.clear();
  wts.clear();
  if (mesh_.dimension == 1) {
    for (int q = 0; q < n; ++q) {
      pts.push_back({c.x + 0.5 * mesh_.hx * xi[q], 0.0});
      wts.push_back(0.5 * mesh_.hx * w[q]);
    }
    return;
  }
  for (int qy = 0; qy < n; ++qy)
    for (int qx = 0; qx < n; ++qx) {
      pts.push_back({c.x + 0.5 * mesh_.hx * xi[qx], c.y + 0.5 * mesh_.hy * xi[qy]});
      wts.push_back(0.25 * mesh_.hx * mesh_.hy * w[qx] * w[qy]);
    }
}

// ---------------------------------------------------------------------------

void BlockDiagonal::apply(const Vector& x, Vector& y) const {
  y.resize(x.size());
  const std::size_t nb = block;
  for (int e = 0; e < num_blocks; ++e) {
    kernels::block_gemv(block_data(e), {x.data() + e * nb, nb}, {y.data() + e * nb, nb});
  }
}

void BlockDiagonal::apply_add(const Vector& x, Vector& y) const {
  const std::size_t nb = block;
  std::vector<double> tmp(nb);
  for (int e = 0; e < num_blocks; ++e) {
    kernels::block_gemv(block_data(e), {x.data() + e * nb, nb}, tmp);
    for (std::size_t i = 0; i < nb; ++i) y[e * nb + i] += tmp[i];
  }
}

SparseMatrix BlockDiagonal::to_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(data.size());
  for (int e = 0; e < num_blocks; ++e)
    for (int r = 0; r < block; ++r)
      for (int c = 0; c < block; ++c) {
        const double v = data[(static_cast<std::size_t>(e) * block + r) * block + c];
        if (v != 0.0) t.emplace_back(e * block + r, e * block + c, v);
      }
  SparseMatrix m(num_blocks * block, num_blocks * block);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void StreamingOperator::apply(const Vector& x, Vector& y) const {
  y.setZero(x.size());
  const std::size_t nb = block;
  std::vector<double> tmp(nb);
  for (int e = 0; e < num_elements; ++e) {
    std::span<double> ye{y.data() + e * nb, nb};
    kernels::block_gemv({diagonal.data() + e * nb * nb, nb * nb}, {x.data() + e * nb, nb}, tmp);
    for (std::size_t i = 0; i < nb; ++i) ye[i] += tmp[i];
    for (int c = coupling_offset[e]; c < coupling_offset[e + 1]; ++c) {
      const int n = coupling_neighbor[c];
      kernels::block_gemv({coupling_blocks.data() + c * nb * nb, nb * nb}, {x.data() + n * nb, nb}, tmp);
      for (std::size_t i = 0; i < nb; ++i) ye[i] += tmp[i];
    }
  }
}

SparseMatrix StreamingOperator::to_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  const int nb = block;
  for (int e = 0; e < num_elements; ++e) {
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c) {
        const double v = diagonal[(static_cast<std::size_t>(e) * nb + r) * nb + c];
        if (v != 0.0) t.emplace_back(e * nb + r, e * nb + c, v);
      }
    for (int k = coupling_offset[e]; k < coupling_offset[e + 1]; ++k) {
      const int n = coupling_neighbor[k];
      for (int r = 0; r < nb; ++r)
        for (int c = 0; c < nb; ++c) {
          const double v = coupling_blocks[(static_cast<std::size_t>(k) * nb + r) * nb + c];
          if (v != 0.0) t.emplace_back(e * nb + r, n * nb + c, v);
        }
    }
  }
  SparseMatrix m(num_elements * nb, num_elements * nb);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

StreamingOperator assemble_streaming(const DGSpace& space, const Direction& dir) {
  const Mesh& m = space.mesh();
  if (dir.dimension() != m.dimension) throw std::invalid_argument("direction dimension does not match the mesh");
  const int nb = space.block_size();
  const int ne = m.num_elements();
  const Point omega{dir.x(), m.dimension == 2 ? dir.y() : 0.0};

  StreamingOperator u;
  u.direction = dir;
  u.block = nb;
  u.num_elements = ne;
  u.diagonal.assign(static_cast<std::size_t>(ne) * nb * nb, 0.0);
  u.coupling_offset.assign(ne + 1, 0);

  std::vector<Point> pts, fpts;
  std::vector<double> wts, fwts;
  const int nq = operator_points(space.degree());
  for (int e = 0; e < ne; ++e) {
    double* diag = u.diagonal.data() + static_cast<std::size_t>(e) * nb * nb;
    // volume: -(Omega . grad phi_k) phi_l
    space.element_rule(e, nq, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q)
      for (int k = 0; k < nb; ++k) {
        const double adv = dot(omega, space.basis_gradient(e, k, pts[q]));
        for (int l = 0; l < nb; ++l) diag[k * nb + l] -= wts[q] * adv * space.basis(e, l, pts[q]);
      }
    // faces: upwind flux takes the interior trace on outflow faces and the
    // neighbour trace on inflow faces
    for (const Face& f : element_faces(m, e)) {
      const double an = dot(omega, f.normal);
      if (an == 0.0) continue;
      face_rule(f, m.dimension, nq, fpts, fwts);
      if (an > 0.0) {
        for (std::size_t q = 0; q < fpts.size(); ++q)
          for (int k = 0; k < nb; ++k)
            for (int l = 0; l < nb; ++l)
              diag[k * nb + l] += an * fwts[q] * space.basis(e, l, fpts[q]) * space.basis(e, k, fpts[q]);
      } else if (f.neighbor >= 0) {
        const std::size_t off = u.coupling_blocks.size();
        u.coupling_blocks.resize(off + nb * nb, 0.0);
        u.coupling_neighbor.push_back(f.neighbor);
        for (std::size_t q = 0; q < fpts.size(); ++q)
          for (int k = 0; k < nb; ++k)
            for (int l = 0; l < nb; ++l)
              u.coupling_blocks[off + k * nb + l] +=
                  an * fwts[q] * space.basis(f.neighbor, l, fpts[q]) * space.basis(e, k, fpts[q]);
      }
    }
    u.coupling_offset[e + 1] = static_cast<int>(u.coupling_neighbor.size());
  }

  // downwind ordering: sort by (sx * column, sy * row)
  const int sx = omega.x >= 0.0 ? 1 : -1;
  const int sy = omega.y >= 0.0 ? 1 : -1;
  u.ordering.resize(ne);
  std::iota(u.ordering.begin(), u.ordering.end(), 0);
  std::stable_sort(u.ordering.begin(), u.ordering.end(), [&](int a, int b) {
    const int ka = sx * m.ix(a), kb = sx * m.ix(b);
    if (ka != kb) return ka < kb;
    return sy * m.iy(a) < sy * m.iy(b);
  });
  return u;
}

BlockDiagonal assemble_reaction(const DGSpace& space, const ScalarField& sigma) {
  const int nb = space.block_size();
  const int ne = space.mesh().num_elements();
  BlockDiagonal b;
  b.block = nb;
  b.num_blocks = ne;
  b.data.assign(static_cast<std::size_t>(ne) * nb * nb, 0.0);
  std::vector<Point> pts;
  std::vector<double> wts;
  std::vector<double> phi(nb);
  for (int e = 0; e < ne; ++e) {
    space.element_rule(e, operator_points(space.degree()), pts, wts);
    double* blk = b.data.data() + static_cast<std::size_t>(e) * nb * nb;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double s = sigma(pts[q]) * wts[q];
      for (int k = 0; k < nb; ++k) phi[k] = space.basis(e, k, pts[q]);
      for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l) blk[k * nb + l] += s * phi[k] * phi[l];
    }
    // exact symmetry
    for (int k = 0; k < nb; ++k)
      for (int l = k + 1; l < nb; ++l) blk[l * nb + k] = blk[k * nb + l];
  }
  return b;
}

BlockDiagonal mass_matrix(const DGSpace& space) {
  return assemble_reaction(space, [](const Point&) { return 1.0; });
}

Vector assemble_source(const DGSpace& space, const ProblemSpec& problem, const Direction& dir, bool with_inflow) {
  const Mesh& m = space.mesh();
  const int nb = space.block_size();
  Vector g = Vector::Zero(space.num_dofs());
  std::vector<Point> pts;
  std::vector<double> wts;
  const Point omega{dir.x(), m.dimension == 2 ? dir.y() : 0.0};
  for (int e = 0; e < m.num_elements(); ++e) {
    space.element_rule(e, std::max(kSourcePoints, operator_points(space.degree())), pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double s = problem.source(pts[q]) * wts[q];
      if (s == 0.0) continue;
      for (int k = 0; k < nb; ++k) g[e * nb + k] += s * space.basis(e, k, pts[q]);
    }
    if (!with_inflow) continue;
    for (const Face& f : element_faces(m, e)) {
      if (f.neighbor >= 0) continue;
      const double an = dot(omega, f.normal);
      if (an >= 0.0) continue;
      face_rule(f, m.dimension, kSourcePoints, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const double fin = problem.inflow(pts[q], dir);
        if (fin == 0.0) continue;
        for (int k = 0; k < nb; ++k) g[e * nb + k] -= an * wts[q] * fin * space.basis(e, k, pts[q]);
      }
    }
  }
  return g;
}

SweepWorkspace factorize_sweep(const StreamingOperator& u, const BlockDiagonal& sigma_t) {
  const int nb = u.block;
  SweepWorkspace w;
  w.inverse_blocks.assign(u.diagonal.size(), 0.0);
  Eigen::MatrixXd a(nb, nb);
  for (int e = 0; e < u.num_elements; ++e) {
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c) {
        const std::size_t i = (static_cast<std::size_t>(e) * nb + r) * nb + c;
        a(r, c) = u.diagonal[i] + sigma_t.data[i];
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      if (w.singular_element < 0) w.singular_element = e;
      continue;
    }
    Eigen::MatrixXd inv = lu.inverse();
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c) w.inverse_blocks[(static_cast<std::size_t>(e) * nb + r) * nb + c] = inv(r, c);
  }
  return w;
}

namespace {

std::shared_ptr<const DirectionOperator> make_direction(const DGSpace& space, const BlockDiagonal& sigma_t,
                                                        const ProblemSpec& problem, const Direction& dir,
                                                        bool with_inflow) {
  auto op = std::make_shared<DirectionOperator>();
  op->direction = dir;
  op->streaming = assemble_streaming(space, dir);
  op->source = assemble_source(space, problem, dir, with_inflow);
  op->workspace = factorize_sweep(op->streaming, sigma_t);
  return op;
}

}  // namespace

DGOperators assemble_operators(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem,
                               std::span<const Direction> dirs, bool with_inflow) {
  DGOperators ops;
  ops.space = std::move(space);
  ops.sigma_t = assemble_reaction(*ops.space, problem.sigma_t);
  ops.sigma_s = assemble_reaction(*ops.space, problem.sigma_s);
  ops.mass = mass_matrix(*ops.space);
  for (const auto& d : dirs) ops.directions.push_back(make_direction(*ops.space, ops.sigma_t, problem, d, with_inflow));
  return ops;
}

std::shared_ptr<const DirectionOperator> assemble_direction(const DGOperators& ops, const ProblemSpec& problem,
                                                            const Direction& dir, bool with_inflow) {
  return make_direction(*ops.space, ops.sigma_t, problem, dir, with_inflow);
}

DGOperators DGOperators::subset(std::span<const int> indices) const {
  DGOperators s;
  s.space = space;
  s.sigma_t = sigma_t;
  s.sigma_s = sigma_s;
  s.mass = mass;
  for (int i : indices) s.directions.push_back(directions.at(i));
  return s;
}

double l2_norm(const DGSpace& space, const Vector& field) {
  if (field.size() != space.num_dofs()) throw std::invalid_argument("l2_norm: field length does not match the space");
  // The basis is orthonormal, so the mass matrix is the identity.
  const double s = kernels::dot({field.data(), static_cast<std::size_t>(field.size())},
                                {field.data(), static_cast<std::size_t>(field.size())});
  return std::sqrt(s);
}

double eval_field(const DGSpace& space, const Vector& field, const Point& p) {
  if (field.size() != space.num_dofs()) throw std::invalid_argument("eval_field: field length does not match the space");
  const int e = space.mesh().locate(p);
  const int nb = space.block_size();
  double v = 0.0;
  for (int k = 0; k < nb; ++k) v += field[e * nb + k] * space.basis(e, k, p);
  return v;
}

Vector project(const DGSpace& space, const ScalarField& f, int points) {
  const int nb = space.block_size();
  Vector out = Vector::Zero(space.num_dofs());
  std::vector<Point> pts;
  std::vector<double> wts;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    space.element_rule(e, points, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double v = f(pts[q]) * wts[q];
      for (int k = 0; k < nb; ++k) out[e * nb + k] += v * space.basis(e, k, pts[q]);
    }
  }
  return out;
}

void write_field_csv(const DGSpace& space, const Vector& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const int nb = space.block_size();
  const bool two_d = space.dimension() == 2;
  out << "element,x_center";
  if (two_d) out << ",y_center";
  for (int k = 0; k < nb; ++k) out << ",c" << k;
  out << '\n' << std::scientific << std::setprecision(17);
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const Point c = space.mesh().center(e);
    out << e << ',' << c.x;
    if (two_d) out << ',' << c.y;
    for (int k = 0; k < nb; ++k) out << ',' << field[e * nb + k];
    out << '\n';
  }
}

}  // namespace rtrb
