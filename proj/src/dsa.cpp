#include <Eigen/LU>

#include "rtrb/full_order.hpp"

namespace rtrb {

Matrix dsa_derivative(const DGSpace& space, bool right_trace) {
  const Mesh& m = space.mesh();
  if (m.dimension != 1) throw ConfigError("DSA is only available in slab geometry");
  const int nb = space.block_size();
  const int n = space.num_dofs();
  Matrix d = Matrix::Zero(n, n);
  std::vector<Point> pts;
  std::vector<double> wts;
  for (int e = 0; e < m.nx; ++e) {
    space.element_rule(e, space.degree() + 2, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q)
      for (int k = 0; k < nb; ++k) {
        const double dk = space.basis_gradient(e, k, pts[q]).x;
        for (int l = 0; l < nb; ++l) d(e * nb + k, e * nb + l) -= wts[q] * space.basis(e, l, pts[q]) * dk;
      }
  }
  for (int i = 0; i <= m.nx; ++i) {
    const Point x{m.x_node(i), 0.0};
    const int left = i - 1;
    const int right = i < m.nx ? i : -1;
    const int src = right_trace ? right : left;
    if (src < 0) continue;
    for (int l = 0; l < nb; ++l) {
      const double u = space.basis(src, l, x);
      for (int k = 0; k < nb; ++k) {
        if (left >= 0) d(left * nb + k, src * nb + l) += u * space.basis(left, k, x);
        if (right >= 0) d(right * nb + k, src * nb + l) -= u * space.basis(right, k, x);
      }
    }
  }
  return d;
}

DsaCorrector::DsaCorrector(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem) {
  if (space->dimension() != 1) throw ConfigError("DSA is only available in slab geometry");
  sigma_s_ = assemble_reaction(*space, problem.sigma_s);
  const Matrix st = Matrix(assemble_reaction(*space, problem.sigma_t).to_sparse());
  const Matrix sa = st - Matrix(sigma_s_.to_sparse());
  const Matrix dp = dsa_derivative(*space, true);
  const Matrix dm = dsa_derivative(*space, false);
  const Matrix dc = 0.5 * (dp + dm);
  const Matrix dj = dp - dm;
  Eigen::FullPivLU<Matrix> inner(st - 0.375 * dj);
  if (!inner.isInvertible()) throw SolverError("DSA: singular current block");
  matrix_ = sa - 0.25 * dj - (1.0 / 3.0) * dc * inner.solve(dc);
  lu_.compute(matrix_);
  if (!lu_.isInvertible()) throw SolverError("DSA: singular diffusion operator");
}

Vector DsaCorrector::correct(const Vector& rho_star, const Vector& rho_prev) const {
  Vector rhs;
  sigma_s_.apply(rho_star - rho_prev, rhs);
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(rho_star.size());
  return lu_.solve(rhs);
}

}  // namespace rtrb
