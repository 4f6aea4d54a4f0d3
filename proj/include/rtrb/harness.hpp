#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtrb/rbm.hpp"

namespace rtrb {

/// Errors between reference and candidate solutions. The relative forms are
/// absent when a reference norm is zero.
struct ErrorMetrics {
  double e_f = 0.0;
  std::optional<double> r_f;
  double e_rho = 0.0;
  std::optional<double> r_rho;
};

ErrorMetrics error_metrics(const DGSpace& space, const std::vector<Vector>& ref_fields, const Vector& ref_rho,
                           const std::vector<Vector>& fields, const Vector& rho);

struct RunTimings {
  double full_order = 0.0;  // reference solve on the training rule
  double initial = 0.0;     // coupled solve on the initial rule
  double candidates = 0.0;  // all indicator sweeps
  double sasi = 0.0;        // all snapshot refreshes
  double online = 0.0;      // reduced solves for the training directions

  double offline() const { return initial + candidates + sasi; }
  // (offline + online) / full_order
  double relative() const { return full_order > 0.0 ? (offline() + online) / full_order : 0.0; }
};

struct HistoryPoint {
  int iteration = 0;
  int basis_rank = 0;
  double spectral_ratio = 0.0;
  double error_f = 0.0;           // max over training directions
  double relative_error_f = 0.0;  // max over training directions
};

struct BenchmarkSettings {
  ProblemSpec problem;
  std::array<int, 2> cells{1, 1};
  int training_size = 24;
  int test_size = 0;  // 0: no testing stage
  GreedyConfig greedy;
  SasiConfig full_order;
  bool record_history = true;
};

/// Mesh, rules and tolerances used for the catalog examples.
BenchmarkSettings default_benchmark(ExampleId id, std::optional<double> c = std::nullopt);

struct RunReport {
  std::string problem;
  int dimension = 1;
  int rb_dimension = 0;
  std::size_t num_samples = 0;
  int training_size = 0;
  int test_size = 0;
  int full_order_iterations = 0;
  std::optional<ErrorMetrics> training;
  std::optional<ErrorMetrics> testing;
  RunTimings timings;
  std::vector<HistoryPoint> history;
  std::vector<Direction> selected;
  bool diverged = false;
  std::string failure;

  std::shared_ptr<const DGSpace> space;  // null for an empty report
  Vector rho_full;
  Vector rho_rb;
  Matrix basis;
};

/// Full-order reference on the training rule, greedy training, training
/// metrics and, if requested, testing metrics. Solver failures are recorded
/// in the report rather than thrown.
RunReport run_benchmark(const BenchmarkSettings& settings);

struct SweepRow {
  double c = 0.0;
  int rb_dimension = 0;
  std::optional<double> test_error;  // relative testing error of f
  std::optional<double> rho_error;   // relative training error of rho
  bool ok = false;
  std::string failure;
};

/// Slab robustness family sigma_t = C + 0.5, sigma_s = C, one model per C.
std::vector<SweepRow> robustness_sweep(std::span<const double> cs, double r_tol = 1e-8, int training = 40,
                                       int test = 32, Accelerator accelerator = Accelerator::s2sa);

nlohmann::json report_json(const RunReport& report);
nlohmann::json sweep_json(const std::vector<SweepRow>& rows);

struct ManifestEntry {
  std::string file;
  std::string sha256;
  std::uintmax_t size = 0;
};

std::string sha256_file(const std::filesystem::path& path);

/// Writes rho_full.csv, rho_rb.csv, history.csv, basis_XXX.csv and
/// metrics.json (only metrics.json for an empty report), then manifest.txt
/// listing every file with its SHA-256 and size.
std::vector<ManifestEntry> export_artifacts(const RunReport& report, const std::filesystem::path& dir);

/// "%.17e"
std::string format_sci(double v);

}  // namespace rtrb
