#include "rtrb/rbm.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace rtrb {

namespace {

constexpr double kSingularFilter = 1e-12;
constexpr int kAveragingPoints = 64;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sample_angle(const Direction& d) { return d.dimension() == 1 ? d.v() : d.theta(); }

std::string scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string describe(const std::vector<Direction>& dirs) {
  std::string s = "{";
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(sample_angle(dirs[i]));
  }
  return s + "}";
}

}  // namespace

Matrix stack_columns(const std::vector<Vector>& fields) {
  if (fields.empty()) return {};
  Matrix m(fields.front().size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t j = 0; j < fields.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = fields[j];
  return m;
}

SnapshotSvd orthonormalize(const Matrix& snapshots) {
  if (snapshots.cols() == 0 || snapshots.isZero(0.0)) throw std::invalid_argument("orthonormalize: snapshot matrix is zero");
  Eigen::JacobiSVD<Matrix> svd(snapshots, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  SnapshotSvd out;
  out.spectral_ratio = s[s.size() - 1] / s.sum();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > kSingularFilter * s[0]) ++r;
  out.basis = svd.matrixU().leftCols(r);
  out.singular_values = s.head(r);
  out.right_factors = svd.matrixV().leftCols(r);
  return out;
}

ReducedProjector::ReducedProjector(const Matrix& basis, const BlockDiagonal& sigma_t, const BlockDiagonal& sigma_s,
                                   const Vector& rho)
    : basis_(basis) {
  const Eigen::Index r = basis_.cols();
  Matrix st(basis_.rows(), r);
  Vector col;
  for (Eigen::Index k = 0; k < r; ++k) {
    sigma_t.apply(basis_.col(k), col);
    st.col(k) = col;
  }
  reaction_ = basis_.transpose() * st;
  sigma_s.apply(rho, col);
  scatter_ = basis_.transpose() * col;
}

Vector ReducedProjector::solve(const DirectionOperator& op) const {
  const Eigen::Index r = basis_.cols();
  Matrix su(basis_.rows(), r);
  Vector col;
  for (Eigen::Index k = 0; k < r; ++k) {
    op.streaming.apply(basis_.col(k), col);
    su.col(k) = col;
  }
  Matrix a = basis_.transpose() * su + reaction_;
  Vector b = scatter_ + basis_.transpose() * op.source;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw SolverError("singular reduced matrix");
  return lu.solve(b);
}

Vector reduced_solve(const Matrix& basis, const DGOperators& ops, const DirectionOperator& op, const Vector& rho) {
  return ReducedProjector(basis, ops.sigma_t, ops.sigma_s, rho).solve(op);
}

double l1_indicator(const Vector& c, const Vector& singular_values, const Matrix& right_factors) {
  if (c.size() != singular_values.size() || right_factors.cols() != singular_values.size())
    throw std::invalid_argument("l1_indicator: dimension mismatch");
  if ((singular_values.array() <= 0.0).any()) throw std::invalid_argument("l1_indicator: zero singular value");
  return (right_factors * c.cwiseQuotient(singular_values)).lpNorm<1>();
}

LsReconstructor::LsReconstructor(std::vector<Direction> samples, int degree, int dimension)
    : samples_(std::move(samples)), degree_(degree), dimension_(dimension) {
  if (dimension_ != 1 && dimension_ != 2) throw std::invalid_argument("LS reconstruction: dimension must be 1 or 2");
  if (degree_ < (dimension_ == 1 ? 0 : 1)) throw std::invalid_argument("LS reconstruction: degree too small");
  const int unknowns = dimension_ == 1 ? degree_ + 1 : 2 * degree_;
  const int n = static_cast<int>(samples_.size());
  if (unknowns > n)
    throw std::invalid_argument("LS reconstruction: " + std::to_string(unknowns) + " unknowns but only " +
                                std::to_string(n) + " samples");
  Matrix design(n, unknowns);
  for (int j = 0; j < n; ++j) {
    if (samples_[j].dimension() != dimension_) throw std::invalid_argument("LS reconstruction: sample dimension mismatch");
    design.row(j) = basis_values(sample_angle(samples_[j])).transpose();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < unknowns) throw std::invalid_argument("LS reconstruction: rank-deficient design matrix");
  pinv_ = qr.solve(Matrix::Identity(n, n));

  const AngularQuadrature rule = dimension_ == 1 ? gauss_legendre(kAveragingPoints) : uniform_circle(kAveragingPoints / 2);
  Vector mean = Vector::Zero(unknowns);
  for (std::size_t q = 0; q < rule.size(); ++q) mean += rule.weights[q] * basis_values(sample_angle(rule.directions[q]));
  const Vector w = pinv_.transpose() * mean;
  weights_.assign(w.data(), w.data() + w.size());
}

Vector LsReconstructor::basis_values(double angle) const {
  if (dimension_ == 1) {
    Vector b(degree_ + 1);
    for (int k = 0; k <= degree_; ++k) b[k] = legendre_orthonormal(k, angle);
    return b;
  }
  Vector b(2 * degree_);
  b[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) b[k] = std::cos(k * angle);
  for (int k = 1; k < degree_; ++k) b[degree_ + k] = std::sin(k * angle);
  return b;
}

Vector LsReconstructor::fit(std::span<const double> values) const {
  if (static_cast<Eigen::Index>(values.size()) != pinv_.cols()) throw std::invalid_argument("LS fit: value count mismatch");
  return pinv_ * Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double LsReconstructor::evaluate(const Vector& coefficients, double angle) const {
  return basis_values(angle).dot(coefficients);
}

Vector reconstruct_density(const LsReconstructor& ls, const std::vector<Vector>& fields) {
  if (fields.size() != ls.samples().size()) throw std::invalid_argument("reconstruct_density: sample/field count mismatch");
  for (const auto& f : fields)
    if (f.size() != fields.front().size()) throw std::invalid_argument("reconstruct_density: inconsistent field lengths");
  return angular_average(ls.weights(), fields);
}

int ls_degree_schedule(int dimension, int m) { return dimension == 1 ? m + 2 : std::min(5, m + 2); }

namespace {

int find_direction(const DGOperators& ops, const Direction& d) {
  for (std::size_t i = 0; i < ops.num_directions(); ++i)
    if (ops.directions[i]->direction == d) return static_cast<int>(i);
  return -1;
}

// Largest degree not above the schedule whose fit is determined by the samples.
int feasible_degree(int dimension, int wanted, std::size_t samples) {
  int s = wanted;
  while (s > (dimension == 1 ? 0 : 1) && (dimension == 1 ? s + 1 : 2 * s) > static_cast<int>(samples)) --s;
  return s;
}

}  // namespace

ReducedModel greedy_train(const DGOperators& training_ops, const ProblemSpec& problem, const GreedyConfig& config,
                          const GreedyObserver& observer) {
  if (config.n0 < 2) throw ConfigError("N0 must be at least 2");
  if (!(config.r_tol > 0.0)) throw ConfigError("r_tol must be positive");
  if (config.m_tol < 0) throw ConfigError("M_tol must be non-negative");
  const int dim = training_ops.space->dimension();
  for (const auto& d : training_ops.directions)
    if (find_direction(training_ops, d->direction.counterpart()) < 0)
      throw ConfigError("training set is not closed under the antipodal map");

  ReducedModel model;
  model.dimension = dim;

  // Coupled solve on the initial rule.
  auto t0 = std::chrono::steady_clock::now();
  const AngularQuadrature initial = initial_set(dim, config.n0);
  DGOperators sample_ops;
  sample_ops.space = training_ops.space;
  sample_ops.sigma_t = training_ops.sigma_t;
  sample_ops.sigma_s = training_ops.sigma_s;
  sample_ops.mass = training_ops.mass;
  for (const auto& d : initial.directions) sample_ops.directions.push_back(assemble_direction(training_ops, problem, d));
  CoupledSolution init = coupled_direct_solve(sample_ops, initial.weights, config.direct_cap);
  model.samples = initial.directions;
  model.snapshots = std::move(init.fields);
  model.rho = std::move(init.rho);
  model.initial_seconds = seconds_since(t0);

  auto corrector = make_corrector(config.sasi.accelerator, training_ops.space, problem);
  SampleSet selected(model.samples);

  // The output basis is the one computed at the top of the last pass; the
  // refresh that follows it only updates the density.
  int m = 0;
  double ratio = 2.0 * config.r_tol;
  SnapshotSvd svd;
  Matrix basis_snapshots;
  std::size_t basis_samples = 0;
  while (m < config.m_tol && ratio > config.r_tol) {
    GreedyStep step;
    basis_snapshots = stack_columns(model.snapshots);
    basis_samples = model.samples.size();
    svd = orthonormalize(basis_snapshots);
    ratio = svd.spectral_ratio;
    step.spectral_ratio = ratio;
    step.basis_rank = svd.rank();

    t0 = std::chrono::steady_clock::now();
    const ReducedProjector projector(svd.basis, training_ops.sigma_t, training_ops.sigma_s, model.rho);
    int best = -1;
    double best_value = -1.0;
    for (std::size_t i = 0; i < training_ops.num_directions(); ++i) {
      const DirectionOperator& op = *training_ops.directions[i];
      if (selected.contains(op.direction)) continue;
      Vector c;
      try {
        c = projector.solve(op);
      } catch (const SolverError&) {
        throw TrainingError("greedy iteration " + std::to_string(m + 1) + ": singular reduced matrix for direction " +
                            std::to_string(sample_angle(op.direction)));
      }
      const double value = l1_indicator(c, svd.singular_values, svd.right_factors);
      if (value > best_value) {
        best_value = value;
        best = static_cast<int>(i);
      }
    }
    step.candidate_seconds = seconds_since(t0);
    if (best < 0) {
      model.exhausted = true;
      break;
    }

    ++m;
    step.iteration = m;
    step.selected = training_ops.directions[best]->direction;
    step.indicator = best_value;
    selected.insert(step.selected);
    sample_ops.directions.push_back(training_ops.directions[best]);
    const Direction partner = step.selected.counterpart();
    if (selected.insert(partner)) {
      sample_ops.directions.push_back(training_ops.directions[find_direction(training_ops, partner)]);
      step.counterpart_added = true;
    }
    model.samples = selected.directions();

    step.ls_degree = feasible_degree(dim, ls_degree_schedule(dim, m), model.samples.size());
    const LsReconstructor ls(model.samples, step.ls_degree, dim);
    t0 = std::chrono::steady_clock::now();
    SasiResult res = sasi_solve(sample_ops, ls.weights(), model.rho, config.sasi, corrector.get());
    step.sasi_seconds = seconds_since(t0);
    step.sasi_iterations = res.iterations;
    if (!res.converged)
      throw TrainingError("greedy iteration " + std::to_string(m) + ": SASI " +
                          (res.diverged ? "diverged" : "did not converge") + " on samples " + describe(model.samples) +
                          " (last change " + scientific(res.history.back()) + " after " +
                          std::to_string(res.iterations) + " iterations)");
    model.snapshots = std::move(res.fields);
    model.rho = reconstruct_density(ls, model.snapshots);
    model.ls_degree = step.ls_degree;
    model.history.push_back(step);
    if (observer) observer(step, model.samples, model.snapshots, model.rho);
  }

  if (basis_samples == 0) {
    basis_snapshots = stack_columns(model.snapshots);
    basis_samples = model.samples.size();
    svd = orthonormalize(basis_snapshots);
  }
  model.basis_snapshots = std::move(basis_snapshots);
  model.basis_sample_count = static_cast<int>(basis_samples);
  model.basis = svd.basis;
  model.singular_values = svd.singular_values;
  model.right_factors = svd.right_factors;
  model.spectral_ratio = svd.spectral_ratio;
  return model;
}

Prediction predict(const ReducedModel& model, const DGOperators& test_ops) {
  Prediction out;
  out.fields.resize(test_ops.num_directions());
  out.seconds.resize(test_ops.num_directions(), 0.0);
  if (test_ops.num_directions() == 0) return out;
  const ReducedProjector projector(model.basis, test_ops.sigma_t, test_ops.sigma_s, model.rho);
  for (std::size_t j = 0; j < test_ops.num_directions(); ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out.fields[j] = projector.expand(projector.solve(*test_ops.directions[j]));
    } catch (const SolverError&) {
      out.failed.push_back(static_cast<int>(j));
    }
    out.seconds[j] = seconds_since(t0);
  }
  return out;
}

}  // namespace rtrb
