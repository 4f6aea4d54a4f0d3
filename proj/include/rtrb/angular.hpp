#pragma once

#include <cstddef>
#include <vector>

namespace rtrb {

/// A transport direction. In slab geometry only the cosine v is meaningful;
/// in the plane the direction is (cos theta, sin theta) with theta in [0, 2pi).
///
/// Equality compares the stored components exactly. Components within 1e-15
/// of zero are snapped to zero so axis-aligned directions sweep cleanly.
class Direction {
 public:
  Direction() = default;
  static Direction slab(double v);
  static Direction planar(double theta);
  // Restores a stored planar direction bit for bit; theta must be reduced.
  static Direction planar(double theta, double x, double y);

  int dimension() const { return dim_; }
  double v() const { return x_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  // Antipodal direction: -v in 1D, theta + pi (mod 2pi) in 2D. Components are
  // negated exactly, so applying it twice returns an equal direction.
  Direction counterpart() const;

  friend bool operator==(const Direction& a, const Direction& b) {
    return a.dim_ == b.dim_ && a.x_ == b.x_ && a.y_ == b.y_;
  }

 private:
  int dim_ = 1;
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

Direction symmetric_counterpart(const Direction& d);

/// Ordered directions with normalized weights (sum to one).
struct AngularQuadrature {
  int dimension = 1;
  std::vector<Direction> directions;
  std::vector<double> weights;

  std::size_t size() const { return directions.size(); }
  double weight_sum() const;
};

/// Unweighted set of directions with exact membership.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<Direction> dirs);

  bool contains(const Direction& d) const;
  // Returns false if d was already present.
  bool insert(const Direction& d);
  std::size_t size() const { return dirs_.size(); }
  bool empty() const { return dirs_.empty(); }
  const std::vector<Direction>& directions() const { return dirs_; }
  const Direction& operator[](std::size_t i) const { return dirs_[i]; }

 private:
  std::vector<Direction> dirs_;
};

/// N-point Gauss-Legendre rule on [-1,1] with weights halved so they sum to one.
/// Nodes ascend and are exactly antisymmetric (node i == -node N-1-i).
AngularQuadrature gauss_legendre(int n);

/// Standard (unnormalized) Gauss-Legendre nodes and weights on [-1,1]; used for
/// element integrals.
void gauss_legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// 2N equally spaced angles theta_j = (2j-1)pi/(2N), weight 1/(2N).
AngularQuadrature uniform_circle(int n);

/// The small rule used for the coupled initial solve: Gauss-Legendre(n0) in 1D,
/// theta_j = 2(j-1)pi/n0 with weight 1/n0 in 2D.
AngularQuadrature initial_set(int dimension, int n0);

/// Low-order rule for the S2 correction: 2 directions in 1D, 4 in 2D.
AngularQuadrature s2_set(int dimension);

/// Number of directions for the named family with the given size parameter:
/// 1D takes N directly, 2D uses uniform_circle(N/2) and requires even N.
AngularQuadrature training_quadrature(int dimension, int num_directions);

}  // namespace rtrb
