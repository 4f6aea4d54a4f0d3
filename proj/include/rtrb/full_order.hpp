#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseLU>

#include "rtrb/discretization.hpp"

namespace rtrb {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Accelerator { none, s2sa, dsa };

std::string_view accelerator_name(Accelerator a);
// Accepts "none", "s2sa", "dsa"; throws ConfigError otherwise.
Accelerator parse_accelerator(std::string_view name);

struct SasiConfig {
  double error_tol = 1e-10;
  int iter_tol = 5000;
  Accelerator accelerator = Accelerator::s2sa;
};

struct SasiResult {
  std::vector<Vector> fields;  // one per direction, from the last sweep
  Vector rho;
  int iterations = 0;  // passes through the convergence loop
  int sweeps = 0;      // full transport sweeps, including the initial one
  bool converged = false;
  bool diverged = false;
  // Sup-norm density change per sweep, divided by max(1, |rho|_inf).
  std::vector<double> history;
};

/// Solves (U + Sigma_t) f = rhs for one direction by forward substitution.
void sweep_direction(const DirectionOperator& op, const Vector& rhs, Vector& f);

/// One sweep for every direction with the scattering source Sigma_s rho.
std::vector<Vector> transport_sweep(const DGOperators& ops, const Vector& rho);

/// rho = sum_j w_j f_j.
Vector angular_average(std::span<const double> weights, const std::vector<Vector>& fields);

/// Global block system [diag(U_j + Sigma_t) - w_i Sigma_s] over all directions,
/// factorized once and reusable for several right-hand sides.
class CoupledSystem {
 public:
  CoupledSystem(const DGOperators& ops, std::span<const double> weights, std::size_t max_unknowns);

  std::size_t num_unknowns() const { return unknowns_; }
  // rhs[j] is the right-hand side of direction j; returns the per-direction solutions.
  std::vector<Vector> solve(const std::vector<Vector>& rhs) const;

 private:
  int num_dofs_;
  int num_dirs_;
  std::size_t unknowns_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

inline constexpr std::size_t kDefaultDirectCap = 200000;

struct CoupledSolution {
  std::vector<Vector> fields;
  Vector rho;
};

CoupledSolution coupled_direct_solve(const DGOperators& ops, std::span<const double> weights,
                                     std::size_t max_unknowns = kDefaultDirectCap);

/// Synthetic correction rho_c computed from Sigma_s (rho_star - rho_prev).
class Corrector {
 public:
  virtual ~Corrector() = default;
  virtual Vector correct(const Vector& rho_star, const Vector& rho_prev) const = 0;
};

/// Kinetic correction on the S2 directions with homogeneous inflow.
class S2saCorrector : public Corrector {
 public:
  S2saCorrector(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem);
  Vector correct(const Vector& rho_star, const Vector& rho_prev) const override;

 private:
  DGOperators ops_;
  std::vector<double> weights_;
  std::unique_ptr<CoupledSystem> system_;
};

/// Consistent DG diffusion correction; slab geometry only.
class DsaCorrector : public Corrector {
 public:
  DsaCorrector(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem);
  Vector correct(const Vector& rho_star, const Vector& rho_prev) const override;

  // The eliminated diffusion operator acting on rho_c.
  const Matrix& matrix() const { return matrix_; }

 private:
  BlockDiagonal sigma_s_;
  Matrix matrix_;
  Eigen::FullPivLU<Matrix> lu_;
};

/// D+ and D- of the slab diffusion discretization: the weak derivative of a
/// DG function with the face value taken from the element right (left) of each
/// face and zero outside the domain on the right (left) end.
Matrix dsa_derivative(const DGSpace& space, bool right_trace);

/// Returns nullptr for Accelerator::none; DSA in the plane is a ConfigError.
std::unique_ptr<Corrector> make_corrector(Accelerator a, std::shared_ptr<const DGSpace> space,
                                          const ProblemSpec& problem);

/// Synthetic accelerated source iteration. The density is formed as
/// sum_j weights[j] f_j, which covers both quadrature averaging and the
/// least-squares reconstruction on unstructured samples.
SasiResult sasi_solve(const DGOperators& ops, std::span<const double> weights, const Vector& rho0,
                      const SasiConfig& config, const Corrector* corrector);

/// Standalone solve from rho = 0 with the accelerator named in the config.
SasiResult sasi_solve(const DGOperators& ops, const AngularQuadrature& quadrature, const ProblemSpec& problem,
                      const SasiConfig& config);

}  // namespace rtrb
