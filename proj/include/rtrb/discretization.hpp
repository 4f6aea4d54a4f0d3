#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rtrb/angular.hpp"
#include "rtrb/model.hpp"

namespace rtrb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Uniform tensor mesh. Elements are numbered row-major (x fastest).
struct Mesh {
  int dimension = 1;
  int nx = 1;
  int ny = 1;
  Domain domain;
  double hx = 1.0;
  double hy = 1.0;

  int num_elements() const { return nx * ny; }
  int element(int ix, int iy) const { return ix + nx * iy; }
  int ix(int e) const { return e % nx; }
  int iy(int e) const { return e / nx; }
  double x_node(int i) const { return i == nx ? domain.x_hi : domain.x_lo + i * hx; }
  double y_node(int j) const { return j == ny ? domain.y_hi : domain.y_lo + j * hy; }
  Point center(int e) const;
  // Containing element; points on an interior interface go to the left/lower element.
  int locate(const Point& p) const;
};

Mesh build_mesh(const ProblemSpec& problem, int nx, int ny = 1);

/// Orthonormal Legendre value sqrt(2a+1) P_a(xi) on [-1,1] and its derivative.
double legendre_orthonormal(int a, double xi);
double legendre_orthonormal_derivative(int a, double xi);

/// Discontinuous Q^K space with an L2-orthonormal tensor Legendre basis on each
/// element; the mass matrix is the identity.
class DGSpace {
 public:
  explicit DGSpace(Mesh mesh, int degree = 1);

  const Mesh& mesh() const { return mesh_; }
  int dimension() const { return mesh_.dimension; }
  int degree() const { return degree_; }
  int block_size() const { return block_; }
  int num_dofs() const { return mesh_.num_elements() * block_; }

  // Local basis function `local` of element e evaluated at a physical point
  // (no support check) and its gradient.
  double basis(int e, int local, const Point& p) const;
  Point basis_gradient(int e, int local, const Point& p) const;

  // Per-axis degree indices of a local basis function.
  int degree_x(int local) const { return local % (degree_ + 1); }
  int degree_y(int local) const { return local / (degree_ + 1); }

  // Element quadrature rule (physical points and weights) with n points per axis.
  void element_rule(int e, int n, std::vector<Point>& pts, std::vector<double>& wts) const;

 private:
  Mesh mesh_;
  int degree_;
  int block_;
};

/// Block diagonal operator with one (K+1)^d square block per element.
struct BlockDiagonal {
  int block = 0;
  int num_blocks = 0;
  std::vector<double> data;  // row-major blocks, element after element

  std::span<const double> block_data(int e) const {
    return {data.data() + static_cast<std::size_t>(e) * block * block, static_cast<std::size_t>(block * block)};
  }
  void apply(const Vector& x, Vector& y) const;      // y = B x
  void apply_add(const Vector& x, Vector& y) const;  // y += B x
  SparseMatrix to_sparse() const;
};

/// Upwind DG streaming operator for one direction, stored as element blocks:
/// a diagonal block per element plus coupling blocks to upwind neighbours.
struct StreamingOperator {
  Direction direction;
  int block = 0;
  int num_elements = 0;
  std::vector<double> diagonal;         // num_elements blocks
  std::vector<int> coupling_offset;     // size num_elements + 1
  std::vector<int> coupling_neighbor;   // upwind neighbour element per coupling
  std::vector<double> coupling_blocks;  // one block per coupling
  std::vector<int> ordering;            // downwind element order

  void apply(const Vector& x, Vector& y) const;  // y = U x
  SparseMatrix to_sparse() const;
};

StreamingOperator assemble_streaming(const DGSpace& space, const Direction& dir);
BlockDiagonal assemble_reaction(const DGSpace& space, const ScalarField& sigma);
BlockDiagonal mass_matrix(const DGSpace& space);
/// Volumetric source plus the inflow boundary term for this direction.
Vector assemble_source(const DGSpace& space, const ProblemSpec& problem, const Direction& dir,
                       bool with_inflow = true);

/// Inverted diagonal blocks of U + Sigma_t in sweep order.
struct SweepWorkspace {
  std::vector<double> inverse_blocks;
  int singular_element = -1;
};

SweepWorkspace factorize_sweep(const StreamingOperator& u, const BlockDiagonal& sigma_t);

struct DirectionOperator {
  Direction direction;
  StreamingOperator streaming;
  Vector source;
  SweepWorkspace workspace;
};

/// All matrices of the discrete ordinates system for an ordered direction list.
/// Direction operators are shared so subsets are cheap views.
struct DGOperators {
  std::shared_ptr<const DGSpace> space;
  BlockDiagonal sigma_t;
  BlockDiagonal sigma_s;
  BlockDiagonal mass;
  std::vector<std::shared_ptr<const DirectionOperator>> directions;

  int num_dofs() const { return space->num_dofs(); }
  std::size_t num_directions() const { return directions.size(); }
  DGOperators subset(std::span<const int> indices) const;
};

DGOperators assemble_operators(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem,
                               std::span<const Direction> dirs, bool with_inflow = true);
/// Adds operators for more directions sharing the same reaction matrices.
std::shared_ptr<const DirectionOperator> assemble_direction(const DGOperators& ops, const ProblemSpec& problem,
                                                            const Direction& dir, bool with_inflow = true);

double l2_norm(const DGSpace& space, const Vector& field);
double eval_field(const DGSpace& space, const Vector& field, const Point& p);
/// L2 projection of a function (n-point Gauss per axis).
Vector project(const DGSpace& space, const ScalarField& f, int points = 8);

/// CSV with one row per element: element, x_center[, y_center], c0, c1, ...
void write_field_csv(const DGSpace& space, const Vector& field, const std::string& path);

}  // namespace rtrb
