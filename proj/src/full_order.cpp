#include "rtrb/full_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtrb/kernels.hpp"

namespace rtrb {

namespace {

constexpr double kDivergenceBound = 1e150;

// Sup-norm change of the density coefficients, measured relative to the
// density size once it exceeds one; round-off in strongly scattering problems
// otherwise puts an absolute floor above small tolerances.
double scaled_change(const Vector& a, const Vector& b) {
  double m = 0.0, size = 1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (!(d <= m)) m = d;  // keeps NaN
    size = std::max(size, std::abs(a[i]));
  }
  return m / size;
}

}  // namespace

std::string_view accelerator_name(Accelerator a) {
  switch (a) {
    case Accelerator::none: return "none";
    case Accelerator::s2sa: return "s2sa";
    case Accelerator::dsa: return "dsa";
  }
  return "none";
}

Accelerator parse_accelerator(std::string_view name) {
  if (name == "none") return Accelerator::none;
  if (name == "s2sa") return Accelerator::s2sa;
  if (name == "dsa") return Accelerator::dsa;
  throw ConfigError("unknown accelerator '" + std::string(name) + "' (expected none, s2sa or dsa)");
}

void sweep_direction(const DirectionOperator& op, const Vector& rhs, Vector& f) {
  const StreamingOperator& u = op.streaming;
  if (op.workspace.singular_element >= 0)
    throw SolverError("singular sweep block on element " + std::to_string(op.workspace.singular_element));
  const std::size_t nb = u.block;
  f.resize(rhs.size());
  std::vector<double> r(nb);
  for (int e : u.ordering) {
    std::copy_n(rhs.data() + e * nb, nb, r.begin());
    for (int c = u.coupling_offset[e]; c < u.coupling_offset[e + 1]; ++c) {
      const int n = u.coupling_neighbor[c];
      kernels::block_gemv_sub({u.coupling_blocks.data() + c * nb * nb, nb * nb}, {f.data() + n * nb, nb}, r);
    }
    kernels::block_gemv({op.workspace.inverse_blocks.data() + e * nb * nb, nb * nb}, r, {f.data() + e * nb, nb});
  }
}

std::vector<Vector> transport_sweep(const DGOperators& ops, const Vector& rho) {
  Vector scatter;
  ops.sigma_s.apply(rho, scatter);
  std::vector<Vector> fields(ops.num_directions());
  Vector rhs;
  for (std::size_t j = 0; j < ops.num_directions(); ++j) {
    rhs = ops.directions[j]->source + scatter;
    sweep_direction(*ops.directions[j], rhs, fields[j]);
  }
  return fields;
}

Vector angular_average(std::span<const double> weights, const std::vector<Vector>& fields) {
  if (weights.size() != fields.size()) throw std::invalid_argument("angular_average: weight/field count mismatch");
  if (fields.empty()) return {};
  Vector rho(fields.front().size());
  std::vector<const double*> cols;
  cols.reserve(fields.size());
  for (const auto& f : fields) cols.push_back(f.data());
  kernels::weighted_sum(weights, cols, {rho.data(), static_cast<std::size_t>(rho.size())});
  return rho;
}

CoupledSystem::CoupledSystem(const DGOperators& ops, std::span<const double> weights, std::size_t max_unknowns)
    : num_dofs_(ops.num_dofs()), num_dirs_(static_cast<int>(ops.num_directions())) {
  if (weights.size() != ops.num_directions()) throw std::invalid_argument("coupled solve: weight count mismatch");
  unknowns_ = static_cast<std::size_t>(num_dofs_) * num_dirs_;
  if (unknowns_ > max_unknowns)
    throw SolverError("coupled direct solve needs " + std::to_string(unknowns_) + " unknowns, cap is " +
                      std::to_string(max_unknowns));
  const int nb = ops.sigma_t.block;
  const int ne = ops.sigma_t.num_blocks;
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j < num_dirs_; ++j) {
    const std::size_t off = static_cast<std::size_t>(j) * num_dofs_;
    SparseMatrix a = ops.directions[j]->streaming.to_sparse() + ops.sigma_t.to_sparse();
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(off + it.row(), off + it.col(), it.value());
  }
  for (int e = 0; e < ne; ++e) {
    auto blk = ops.sigma_s.block_data(e);
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c) {
        const double s = blk[r * nb + c];
        if (s == 0.0) continue;
        for (int j = 0; j < num_dirs_; ++j)
          for (int i = 0; i < num_dirs_; ++i)
            t.emplace_back(static_cast<std::size_t>(j) * num_dofs_ + e * nb + r,
                           static_cast<std::size_t>(i) * num_dofs_ + e * nb + c, -weights[i] * s);
      }
  }
  SparseMatrix m(static_cast<Eigen::Index>(unknowns_), static_cast<Eigen::Index>(unknowns_));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  lu_.compute(m);
  if (lu_.info() != Eigen::Success) throw SolverError("coupled direct solve: factorization failed (singular system)");
}

std::vector<Vector> CoupledSystem::solve(const std::vector<Vector>& rhs) const {
  if (static_cast<int>(rhs.size()) != num_dirs_) throw std::invalid_argument("coupled solve: rhs count mismatch");
  Vector b(static_cast<Eigen::Index>(unknowns_));
  for (int j = 0; j < num_dirs_; ++j) b.segment(static_cast<Eigen::Index>(j) * num_dofs_, num_dofs_) = rhs[j];
  Vector x = lu_.solve(b);
  if (lu_.info() != Eigen::Success || !x.allFinite()) throw SolverError("coupled direct solve: solve failed");
  std::vector<Vector> out(num_dirs_);
  for (int j = 0; j < num_dirs_; ++j) out[j] = x.segment(static_cast<Eigen::Index>(j) * num_dofs_, num_dofs_);
  return out;
}

CoupledSolution coupled_direct_solve(const DGOperators& ops, std::span<const double> weights,
                                     std::size_t max_unknowns) {
  CoupledSystem system(ops, weights, max_unknowns);
  std::vector<Vector> rhs;
  for (const auto& d : ops.directions) rhs.push_back(d->source);
  CoupledSolution s;
  s.fields = system.solve(rhs);
  s.rho = angular_average(weights, s.fields);
  return s;
}

S2saCorrector::S2saCorrector(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem) {
  const AngularQuadrature s2 = s2_set(space->dimension());
  ops_ = assemble_operators(std::move(space), problem, s2.directions, false);
  weights_ = s2.weights;
  system_ = std::make_unique<CoupledSystem>(ops_, weights_, std::numeric_limits<std::size_t>::max());
}

Vector S2saCorrector::correct(const Vector& rho_star, const Vector& rho_prev) const {
  Vector rhs;
  ops_.sigma_s.apply(rho_star - rho_prev, rhs);
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(rho_star.size());
  std::vector<Vector> b(ops_.num_directions(), rhs);
  return angular_average(weights_, system_->solve(b));
}

std::unique_ptr<Corrector> make_corrector(Accelerator a, std::shared_ptr<const DGSpace> space,
                                          const ProblemSpec& problem) {
  switch (a) {
    case Accelerator::none: return nullptr;
    case Accelerator::s2sa: return std::make_unique<S2saCorrector>(std::move(space), problem);
    case Accelerator::dsa:
      if (space->dimension() != 1) throw ConfigError("DSA is only available in slab geometry");
      return std::make_unique<DsaCorrector>(std::move(space), problem);
  }
  return nullptr;
}

SasiResult sasi_solve(const DGOperators& ops, std::span<const double> weights, const Vector& rho0,
                      const SasiConfig& config, const Corrector* corrector) {
  if (!(config.error_tol > 0.0) || config.iter_tol < 1) throw ConfigError("SASI needs error_tol > 0 and iter_tol >= 1");
  if (rho0.size() != ops.num_dofs()) throw std::invalid_argument("sasi_solve: initial density has the wrong length");
  SasiResult res;
  Vector rho_prev = rho0;
  auto step = [&](const Vector& rho) {
    res.fields = transport_sweep(ops, rho);
    ++res.sweeps;
    Vector rho_star = angular_average(weights, res.fields);
    if (corrector) rho_star += corrector->correct(rho_star, rho);
    return rho_star;
  };
  Vector rho = step(rho_prev);
  double change = scaled_change(rho, rho_prev);
  res.history.push_back(change);
  int k = 1;
  while (std::isfinite(change) && change <= kDivergenceBound && change > config.error_tol && k <= config.iter_tol) {
    rho_prev = std::move(rho);
    rho = step(rho_prev);
    change = scaled_change(rho, rho_prev);
    res.history.push_back(change);
    ++k;
    ++res.iterations;
  }
  res.rho = std::move(rho);
  res.diverged = !std::isfinite(change) || change > kDivergenceBound;
  res.converged = !res.diverged && change <= config.error_tol;
  return res;
}

SasiResult sasi_solve(const DGOperators& ops, const AngularQuadrature& quadrature, const ProblemSpec& problem,
                      const SasiConfig& config) {
  auto corrector = make_corrector(config.accelerator, ops.space, problem);
  return sasi_solve(ops, quadrature.weights, Vector::Zero(ops.num_dofs()), config, corrector.get());
}

}  // namespace rtrb
