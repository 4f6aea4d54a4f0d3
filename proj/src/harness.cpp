#include "rtrb/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace rtrb {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json metrics_json(const ErrorMetrics& m) {
  nlohmann::json j;
  j["E_f"] = m.e_f;
  j["R_f"] = m.r_f ? nlohmann::json(*m.r_f) : nlohmann::json(nullptr);
  j["E_rho"] = m.e_rho;
  j["R_rho"] = m.r_rho ? nlohmann::json(*m.r_rho) : nlohmann::json(nullptr);
  return j;
}

double direction_value(const Direction& d) { return d.dimension() == 1 ? d.v() : d.theta(); }

DGOperators operators_for(std::shared_ptr<const DGSpace> space, const ProblemSpec& problem,
                          const AngularQuadrature& q) {
  return assemble_operators(std::move(space), problem, q.directions);
}

}  // namespace

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

ErrorMetrics error_metrics(const DGSpace& space, const std::vector<Vector>& ref_fields, const Vector& ref_rho,
                           const std::vector<Vector>& fields, const Vector& rho) {
  if (ref_fields.size() != fields.size()) throw std::invalid_argument("error_metrics: direction count mismatch");
  ErrorMetrics m;
  bool relative_f = true;
  double r_f = 0.0;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    const double e = l2_norm(space, ref_fields[j] - fields[j]);
    const double n = l2_norm(space, ref_fields[j]);
    m.e_f = std::max(m.e_f, e);
    if (n > 0.0)
      r_f = std::max(r_f, e / n);
    else
      relative_f = false;
  }
  if (relative_f) m.r_f = r_f;
  m.e_rho = l2_norm(space, ref_rho - rho);
  const double n = l2_norm(space, ref_rho);
  if (n > 0.0) m.r_rho = m.e_rho / n;
  return m;
}

BenchmarkSettings default_benchmark(ExampleId id, std::optional<double> c) {
  BenchmarkSettings s;
  s.problem = build_example(id, c);
  s.cells = s.problem.default_cells;
  if (s.problem.dimension == 1) {
    s.training_size = id == ExampleId::slab_robustness ? 40 : 24;
    s.test_size = 32;
    s.greedy.n0 = 2;
    s.greedy.r_tol = id == ExampleId::slab_robustness ? 1e-8 : 1e-4;
  } else {
    s.training_size = 32;
    s.test_size = 24;
    s.greedy.n0 = id == ExampleId::plane_transport ? 8 : 4;
    s.greedy.r_tol = id == ExampleId::plane_transport ? 1e-2 : 1e-3;
  }
  return s;
}

RunReport run_benchmark(const BenchmarkSettings& settings) {
  const ProblemSpec& problem = settings.problem;
  RunReport report;
  report.problem = problem.name;
  report.dimension = problem.dimension;
  report.training_size = settings.training_size;
  report.test_size = settings.test_size;
  report.space = std::make_shared<const DGSpace>(build_mesh(problem, settings.cells[0], settings.cells[1]), 1);
  const AngularQuadrature training = training_quadrature(problem.dimension, settings.training_size);
  const DGOperators train_ops = operators_for(report.space, problem, training);

  auto t0 = std::chrono::steady_clock::now();
  const SasiResult reference = sasi_solve(train_ops, training, problem, settings.full_order);
  report.timings.full_order = seconds_since(t0);
  report.full_order_iterations = reference.iterations;
  report.rho_full = reference.rho;
  if (!reference.converged) {
    report.diverged = true;
    report.failure = std::string("full-order reference ") + (reference.diverged ? "diverged" : "did not converge");
    return report;
  }

  GreedyObserver observer;
  if (settings.record_history) {
    observer = [&](const GreedyStep& step, const std::vector<Direction>&, const std::vector<Vector>& snapshots,
                   const Vector& rho) {
      const SnapshotSvd svd = orthonormalize(stack_columns(snapshots));
      ReducedModel partial;
      partial.basis = svd.basis;
      partial.rho = rho;
      const Prediction p = predict(partial, train_ops);
      HistoryPoint h;
      h.iteration = step.iteration;
      h.basis_rank = svd.rank();
      h.spectral_ratio = svd.spectral_ratio;
      if (p.failed.empty()) {
        const ErrorMetrics m = error_metrics(*report.space, reference.fields, reference.rho, p.fields, rho);
        h.error_f = m.e_f;
        h.relative_error_f = m.r_f.value_or(0.0);
      } else {
        h.error_f = h.relative_error_f = std::numeric_limits<double>::infinity();
      }
      report.history.push_back(h);
    };
  }

  ReducedModel model;
  try {
    model = greedy_train(train_ops, problem, settings.greedy, observer);
  } catch (const TrainingError& e) {
    report.diverged = true;
    report.failure = e.what();
    return report;
  }
  report.timings.initial = model.initial_seconds;
  for (const auto& h : model.history) {
    report.timings.candidates += h.candidate_seconds;
    report.timings.sasi += h.sasi_seconds;
    report.selected.push_back(h.selected);
  }
  report.rb_dimension = model.rank();
  report.num_samples = model.samples.size();
  report.rho_rb = model.rho;
  report.basis = model.basis;

  t0 = std::chrono::steady_clock::now();
  const Prediction train_pred = predict(model, train_ops);
  report.timings.online = seconds_since(t0);
  if (!train_pred.failed.empty()) {
    report.diverged = true;
    report.failure = "singular reduced matrix for " + std::to_string(train_pred.failed.size()) + " training directions";
    return report;
  }
  report.training = error_metrics(*report.space, reference.fields, reference.rho, train_pred.fields, model.rho);

  if (settings.test_size > 0) {
    const AngularQuadrature test = training_quadrature(problem.dimension, settings.test_size);
    const DGOperators test_ops = operators_for(report.space, problem, test);
    const SasiResult test_ref = sasi_solve(test_ops, test, problem, settings.full_order);
    if (!test_ref.converged) {
      report.diverged = true;
      report.failure = "full-order solve on the test rule did not converge";
      return report;
    }
    const Prediction test_pred = predict(model, test_ops);
    if (!test_pred.failed.empty()) {
      report.diverged = true;
      report.failure = "singular reduced matrix for " + std::to_string(test_pred.failed.size()) + " test directions";
      return report;
    }
    report.testing = error_metrics(*report.space, test_ref.fields, test_ref.rho, test_pred.fields, model.rho);
  }
  return report;
}

std::vector<SweepRow> robustness_sweep(std::span<const double> cs, double r_tol, int training, int test,
                                       Accelerator accelerator) {
  std::vector<SweepRow> rows;
  for (double c : cs) {
    SweepRow row;
    row.c = c;
    try {
      BenchmarkSettings s = default_benchmark(ExampleId::slab_robustness, c);
      s.greedy.r_tol = r_tol;
      s.training_size = training;
      s.test_size = test;
      s.greedy.sasi.accelerator = accelerator;
      s.full_order.accelerator = accelerator;
      s.record_history = false;
      const RunReport r = run_benchmark(s);
      row.rb_dimension = r.rb_dimension;
      row.ok = !r.diverged;
      row.failure = r.failure;
      if (r.testing) row.test_error = r.testing->r_f;
      if (r.training) row.rho_error = r.training->r_rho;
    } catch (const std::exception& e) {
      row.ok = false;
      row.failure = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json j;
  j["problem"] = report.problem;
  j["dimension"] = report.dimension;
  j["rb_dimension"] = report.rb_dimension;
  j["samples"] = report.num_samples;
  j["training_size"] = report.training_size;
  j["test_size"] = report.test_size;
  j["full_order_iterations"] = report.full_order_iterations;
  j["diverged"] = report.diverged;
  j["failure"] = report.failure;
  j["training"] = report.training ? metrics_json(*report.training) : nlohmann::json(nullptr);
  j["testing"] = report.testing ? metrics_json(*report.testing) : nlohmann::json(nullptr);
  nlohmann::json t;
  t["full_order"] = report.timings.full_order;
  t["initial"] = report.timings.initial;
  t["candidates"] = report.timings.candidates;
  t["sasi"] = report.timings.sasi;
  t["online"] = report.timings.online;
  t["offline"] = report.timings.offline();
  t["relative"] = report.timings.relative();
  j["timings"] = t;
  nlohmann::json sel = nlohmann::json::array();
  for (const auto& d : report.selected) sel.push_back(direction_value(d));
  j["selected"] = sel;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : report.history)
    hist.push_back({{"iteration", h.iteration},
                    {"basis_rank", h.basis_rank},
                    {"spectral_ratio", h.spectral_ratio},
                    {"E_f", h.error_f},
                    {"R_f", h.relative_error_f}});
  j["history"] = hist;
  return j;
}

nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"C", r.c},
                   {"rb_dimension", r.rb_dimension},
                   {"test_R_f", r.test_error ? nlohmann::json(*r.test_error) : nlohmann::json(nullptr)},
                   {"R_rho", r.rho_error ? nlohmann::json(*r.rho_error) : nlohmann::json(nullptr)},
                   {"ok", r.ok},
                   {"failure", r.failure}});
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::vector<ManifestEntry> export_artifacts(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> files;
  if (report.space) {
    if (report.rho_full.size() == report.space->num_dofs()) {
      write_field_csv(*report.space, report.rho_full, (dir / "rho_full.csv").string());
      files.push_back("rho_full.csv");
    }
    if (report.rho_rb.size() == report.space->num_dofs()) {
      write_field_csv(*report.space, report.rho_rb, (dir / "rho_rb.csv").string());
      files.push_back("rho_rb.csv");
    }
    {
      std::ofstream out(dir / "history.csv");
      out << "iteration,basis_rank,spectral_ratio,E_f,R_f\n";
      for (const auto& h : report.history)
        out << h.iteration << ',' << h.basis_rank << ',' << format_sci(h.spectral_ratio) << ',' << format_sci(h.error_f)
            << ',' << format_sci(h.relative_error_f) << '\n';
      files.push_back("history.csv");
    }
    for (Eigen::Index k = 0; k < report.basis.cols(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "basis_%03d.csv", static_cast<int>(k));
      write_field_csv(*report.space, report.basis.col(k), (dir / name).string());
      files.push_back(name);
    }
  }
  {
    std::ofstream out(dir / "metrics.json");
    out << report_json(report).dump(2) << '\n';
    files.push_back("metrics.json");
  }
  std::vector<ManifestEntry> manifest;
  std::ofstream out(dir / "manifest.txt");
  for (const auto& f : files) {
    ManifestEntry e{f, sha256_file(dir / f), fs::file_size(dir / f)};
    out << e.sha256 << "  " << e.size << "  " << e.file << '\n';
    manifest.push_back(e);
  }
  if (!out) throw std::runtime_error("failed writing the manifest in '" + dir.string() + "'");
  return manifest;
}

}  // namespace rtrb
