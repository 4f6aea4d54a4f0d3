#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rtrb/full_order.hpp"

namespace rtrb {

class TrainingError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Thin SVD of a snapshot matrix F = U diag(lambda) V^T. Singular values below
/// 1e-12 * lambda_max are dropped from all three factors; the spectral ratio
/// uses the smallest singular value before that filter.
struct SnapshotSvd {
  Matrix basis;
  Vector singular_values;
  Matrix right_factors;
  double spectral_ratio = 0.0;

  int rank() const { return static_cast<int>(singular_values.size()); }
};

SnapshotSvd orthonormalize(const Matrix& snapshots);
Matrix stack_columns(const std::vector<Vector>& fields);

/// Galerkin projection onto span(basis) with the scattering source frozen at rho.
/// The direction-independent parts are projected once.
class ReducedProjector {
 public:
  ReducedProjector(const Matrix& basis, const BlockDiagonal& sigma_t, const BlockDiagonal& sigma_s, const Vector& rho);

  // Reduced coefficients for one direction; throws SolverError if singular.
  Vector solve(const DirectionOperator& op) const;
  Vector expand(const Vector& c) const { return basis_ * c; }

 private:
  Matrix basis_;
  Matrix reaction_;   // U^T Sigma_t U
  Vector scatter_;    // U^T Sigma_s rho
};

Vector reduced_solve(const Matrix& basis, const DGOperators& ops, const DirectionOperator& op, const Vector& rho);

/// || V diag(lambda)^-1 c ||_1, the size of c in snapshot coordinates.
double l1_indicator(const Vector& c, const Vector& singular_values, const Matrix& right_factors);

/// Per-dof least-squares fit of sample values in angle followed by averaging
/// with a fixed high-order rule. Both steps are linear, so the density is a
/// weighted sum of the sample fields with precomputed weights.
class LsReconstructor {
 public:
  LsReconstructor(std::vector<Direction> samples, int degree, int dimension);

  int degree() const { return degree_; }
  int dimension() const { return dimension_; }
  int num_unknowns() const { return static_cast<int>(pinv_.rows()); }
  const std::vector<Direction>& samples() const { return samples_; }
  // Averaging weight of each sample.
  const std::vector<double>& weights() const { return weights_; }

  // Fit coefficients for one set of sample values and their evaluation.
  Vector fit(std::span<const double> values) const;
  double evaluate(const Vector& coefficients, double angle) const;
  // Basis functions at an angle: cosine v in 1D, theta in 2D.
  Vector basis_values(double angle) const;

 private:
  std::vector<Direction> samples_;
  int degree_;
  int dimension_;
  Matrix pinv_;
  std::vector<double> weights_;
};

Vector reconstruct_density(const LsReconstructor& ls, const std::vector<Vector>& fields);

/// Degree for the snapshot refresh after the m-th greedy addition (m >= 1):
/// m + 2 in 1D and min(5, m + 2) in 2D, so the first 2D fit already contains
/// cos 2theta and sin 2theta.
int ls_degree_schedule(int dimension, int m);

struct GreedyConfig {
  int n0 = 2;
  double r_tol = 1e-4;
  int m_tol = std::numeric_limits<int>::max();
  SasiConfig sasi;
  std::size_t direct_cap = kDefaultDirectCap;
};

struct GreedyStep {
  int iteration = 0;
  double spectral_ratio = 0.0;  // of the snapshots entering this iteration
  int basis_rank = 0;
  Direction selected;
  double indicator = 0.0;
  bool counterpart_added = false;
  int ls_degree = 0;
  int sasi_iterations = 0;
  double candidate_seconds = 0.0;
  double sasi_seconds = 0.0;
};

struct ReducedModel {
  int dimension = 1;
  Matrix basis;
  Vector singular_values;
  Matrix right_factors;
  double spectral_ratio = 0.0;
  std::vector<Direction> samples;
  std::vector<Vector> snapshots;  // refreshed fields for every sample
  // Snapshot matrix the basis was computed from, taken over the first
  // basis_sample_count samples before the last refresh.
  Matrix basis_snapshots;
  int basis_sample_count = 0;
  Vector rho;
  int ls_degree = 0;  // 0 when no greedy step ran and rho came from the initial rule
  std::vector<GreedyStep> history;
  bool exhausted = false;  // stopped because every training direction was selected
  double initial_seconds = 0.0;

  int rank() const { return static_cast<int>(singular_values.size()); }
};

// Called after every greedy iteration with the refreshed samples, snapshots and density.
using GreedyObserver = std::function<void(const GreedyStep&, const std::vector<Direction>&,
                                          const std::vector<Vector>&, const Vector&)>;

/// Greedy construction of the angular reduced basis. training_ops holds the
/// training directions, which must be closed under the antipodal map.
ReducedModel greedy_train(const DGOperators& training_ops, const ProblemSpec& problem, const GreedyConfig& config,
                          const GreedyObserver& observer = {});

struct Prediction {
  std::vector<Vector> fields;
  std::vector<double> seconds;
  std::vector<int> failed;  // directions whose reduced matrix was singular (fields left empty)
};

Prediction predict(const ReducedModel& model, const DGOperators& test_ops);

}  // namespace rtrb
