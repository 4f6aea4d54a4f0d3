#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rtrb/harness.hpp"
#include "rtrb/model_io.hpp"

namespace {

using namespace rtrb;

constexpr int kExitNonConvergence = 2;
constexpr int kExitConfig = 3;

struct ProblemOptions {
  std::string example;
  std::string config;
  std::optional<double> scattering;
  int cells = 0;
  int cells_y = 0;
};

void add_problem_options(CLI::App* app, ProblemOptions& o) {
  app->add_option("--example", o.example, "catalog problem: 1d-ex1..1d-ex5, 1d-robust, 2d-ex1..2d-ex4");
  app->add_option("--config", o.config, "problem config file");
  app->add_option("--scattering", o.scattering, "scattering strength C for 1d-robust");
  app->add_option("--cells", o.cells, "cells along x (default: the problem's mesh)");
  app->add_option("--cells-y", o.cells_y, "cells along y in 2D");
}

struct ResolvedProblem {
  ProblemSpec spec;
  std::array<int, 2> cells;
  std::string tag;
  std::string config_text;
  std::optional<ExampleId> id;
};

ResolvedProblem resolve(const ProblemOptions& o) {
  if (o.example.empty() == o.config.empty()) throw ConfigError("give exactly one of --example or --config");
  ResolvedProblem r;
  if (!o.example.empty()) {
    r.id = parse_example_id(o.example);
    r.spec = build_example(*r.id, o.scattering);
    r.tag = o.example;
  } else {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config '" + o.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    r.config_text = ss.str();
    r.spec = parse_problem_config(r.config_text);
  }
  validate_cross_sections(r.spec);
  r.cells = r.spec.default_cells;
  if (o.cells > 0) r.cells[0] = o.cells;
  if (o.cells_y > 0) r.cells[1] = o.cells_y;
  if (o.cells < 0 || o.cells_y < 0) throw ConfigError("cell counts must be positive");
  return r;
}

std::shared_ptr<const DGSpace> make_space(const ResolvedProblem& p) {
  return std::make_shared<const DGSpace>(build_mesh(p.spec, p.cells[0], p.cells[1]), 1);
}

struct SolverOptions {
  std::string accelerator = "s2sa";
  double tol = 1e-10;
  int max_iter = 5000;
};

void add_solver_options(CLI::App* app, SolverOptions& o) {
  app->add_option("--accelerator", o.accelerator, "none, s2sa or dsa")->capture_default_str();
  app->add_option("--tol", o.tol, "SASI stopping tolerance")->capture_default_str();
  app->add_option("--max-iter", o.max_iter, "SASI iteration limit")->capture_default_str();
}

SasiConfig sasi_config(const SolverOptions& o) {
  SasiConfig c;
  c.accelerator = parse_accelerator(o.accelerator);
  c.error_tol = o.tol;
  c.iter_tol = o.max_iter;
  if (!(c.error_tol > 0.0) || c.iter_tol < 1) throw ConfigError("--tol must be positive and --max-iter at least 1");
  return c;
}

int default_training(int dimension) { return dimension == 1 ? 24 : 32; }

std::string sci(double v) { return format_sci(v); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void print_metrics(const char* label, const std::optional<ErrorMetrics>& m) {
  if (!m) return;
  std::printf("%s E_f %s R_f %s E_rho %s R_rho %s\n", label, sci(m->e_f).c_str(),
              m->r_f ? sci(*m->r_f).c_str() : "n/a", sci(m->e_rho).c_str(), m->r_rho ? sci(*m->r_rho).c_str() : "n/a");
}

double angle_of(const Direction& d) { return d.dimension() == 1 ? d.v() : d.theta(); }

int run_solve_full(const ProblemOptions& po, const SolverOptions& so, int directions, const std::string& output,
                   bool fields) {
  const ResolvedProblem p = resolve(po);
  const SasiConfig config = sasi_config(so);
  const int n = directions > 0 ? directions : default_training(p.spec.dimension);
  const AngularQuadrature q = training_quadrature(p.spec.dimension, n);
  auto space = make_space(p);
  const DGOperators ops = assemble_operators(space, p.spec, q.directions);
  const SasiResult r = sasi_solve(ops, q, p.spec, config);

  std::filesystem::create_directories(output);
  write_field_csv(*space, r.rho, (std::filesystem::path(output) / "rho.csv").string());
  if (fields) {
    for (std::size_t j = 0; j < r.fields.size(); ++j) {
      char name[32];
      std::snprintf(name, sizeof name, "f_%03zu.csv", j);
      write_field_csv(*space, r.fields[j], (std::filesystem::path(output) / name).string());
    }
  }
  nlohmann::json j;
  j["problem"] = p.spec.name;
  j["accelerator"] = std::string(accelerator_name(config.accelerator));
  j["directions"] = n;
  j["iterations"] = r.iterations;
  j["sweeps"] = r.sweeps;
  j["converged"] = r.converged;
  j["diverged"] = r.diverged;
  j["history"] = r.history;
  nlohmann::json dirs = nlohmann::json::array();
  for (std::size_t k = 0; k < q.size(); ++k) dirs.push_back({{"angle", angle_of(q.directions[k])}, {"weight", q.weights[k]}});
  j["quadrature"] = dirs;
  write_json(std::filesystem::path(output) / "report.json", j);

  std::printf("problem %s\niterations %d\nsweeps %d\nconverged %d\nlast_change %s\nrho_l2 %s\n", p.spec.name.c_str(),
              r.iterations, r.sweeps, r.converged ? 1 : 0, sci(r.history.back()).c_str(), sci(l2_norm(*space, r.rho)).c_str());
  return r.converged ? 0 : kExitNonConvergence;
}

struct TrainOptions {
  int training = 0;
  int n0 = 0;
  double r_tol = 1e-4;
  int m_tol = -1;
};

void add_train_options(CLI::App* app, TrainOptions& o) {
  app->add_option("--training", o.training, "training rule size (default 24 in 1D, 32 in 2D)");
  app->add_option("--n0", o.n0, "initial rule size (default 2 in 1D, 4 in 2D)");
  app->add_option("--r-tol", o.r_tol, "spectral ratio tolerance")->capture_default_str();
  app->add_option("--m-tol", o.m_tol, "maximum number of greedy iterations (default unlimited)");
}

GreedyConfig greedy_config(const TrainOptions& t, const SasiConfig& sasi, int dimension) {
  GreedyConfig g;
  g.n0 = t.n0 > 0 ? t.n0 : (dimension == 1 ? 2 : 4);
  g.r_tol = t.r_tol;
  if (t.m_tol >= 0) g.m_tol = t.m_tol;
  g.sasi = sasi;
  return g;
}

int run_train(const ProblemOptions& po, const SolverOptions& so, const TrainOptions& to, const std::string& model_path,
              const std::string& output) {
  const ResolvedProblem p = resolve(po);
  const SasiConfig sasi = sasi_config(so);
  const GreedyConfig g = greedy_config(to, sasi, p.spec.dimension);
  const AngularQuadrature training =
      training_quadrature(p.spec.dimension, to.training > 0 ? to.training : default_training(p.spec.dimension));
  auto space = make_space(p);
  const DGOperators ops = assemble_operators(space, p.spec, training.directions);
  ModelFile file;
  try {
    file.model = greedy_train(ops, p.spec, g);
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kExitNonConvergence;
  }
  file.example_tag = p.tag;
  if (p.id == ExampleId::slab_robustness) file.scattering = po.scattering;
  file.config_text = p.config_text;
  file.cells = p.cells;
  file.accelerator = sasi.accelerator;
  write_model(file, model_path);
  if (!output.empty()) {
    std::filesystem::create_directories(output);
    write_field_csv(*space, file.model.rho, (std::filesystem::path(output) / "rho_rb.csv").string());
    for (int k = 0; k < file.model.rank(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "basis_%03d.csv", k);
      write_field_csv(*space, file.model.basis.col(k), (std::filesystem::path(output) / name).string());
    }
  }
  const ReducedModel& m = file.model;
  std::printf("problem %s\nrb_dimension %d\nsamples %zu\ngreedy_iterations %zu\nspectral_ratio %s\nexhausted %d\n",
              p.spec.name.c_str(), m.rank(), m.samples.size(), m.history.size(), sci(m.spectral_ratio).c_str(),
              m.exhausted ? 1 : 0);
  return 0;
}

int run_predict(const std::string& model_path, int directions, const std::string& output, bool reference,
                const SolverOptions& so) {
  const ModelFile file = read_model(model_path);
  const ProblemSpec problem = model_problem(file);
  auto space = std::make_shared<const DGSpace>(build_mesh(problem, file.cells[0], file.cells[1]), 1);
  if (space->num_dofs() != file.model.basis.rows()) throw ConfigError("model basis does not match its mesh");
  const int n = directions > 0 ? directions : (problem.dimension == 1 ? 32 : 24);
  const AngularQuadrature q = training_quadrature(problem.dimension, n);
  const DGOperators ops = assemble_operators(space, problem, q.directions);
  const Prediction pred = predict(file.model, ops);

  std::filesystem::create_directories(output);
  nlohmann::json j;
  j["problem"] = problem.name;
  j["rb_dimension"] = file.model.rank();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < q.size(); ++k) {
    const bool failed = std::find(pred.failed.begin(), pred.failed.end(), static_cast<int>(k)) != pred.failed.end();
    if (!failed) {
      char name[32];
      std::snprintf(name, sizeof name, "f_%03zu.csv", k);
      write_field_csv(*space, pred.fields[k], (std::filesystem::path(output) / name).string());
    }
    rows.push_back({{"angle", angle_of(q.directions[k])}, {"seconds", pred.seconds[k]}, {"failed", failed}});
  }
  j["directions"] = rows;
  if (reference && pred.failed.empty()) {
    const SasiResult full = sasi_solve(ops, q, problem, sasi_config(so));
    if (!full.converged) {
      std::fprintf(stderr, "reference solve did not converge\n");
      return kExitNonConvergence;
    }
    const ErrorMetrics m = error_metrics(*space, full.fields, full.rho, pred.fields, file.model.rho);
    j["metrics"] = {{"E_f", m.e_f}, {"R_f", m.r_f ? nlohmann::json(*m.r_f) : nlohmann::json(nullptr)},
                    {"E_rho", m.e_rho}, {"R_rho", m.r_rho ? nlohmann::json(*m.r_rho) : nlohmann::json(nullptr)}};
    print_metrics("testing", m);
  }
  write_json(std::filesystem::path(output) / "predict.json", j);
  double total = 0.0;
  for (double s : pred.seconds) total += s;
  std::printf("directions %zu\nfailed %zu\nonline_seconds %s\n", q.size(), pred.failed.size(), sci(total).c_str());
  return pred.failed.empty() ? 0 : kExitNonConvergence;
}

int run_benchmark_cmd(const ProblemOptions& po, const SolverOptions& so, const TrainOptions& to, int test,
                      bool r_tol_given, const std::string& output) {
  const ResolvedProblem p = resolve(po);
  BenchmarkSettings s;
  if (p.id) {
    s = default_benchmark(*p.id, po.scattering);
  } else {
    s.problem = p.spec;
    s.training_size = default_training(p.spec.dimension);
    s.test_size = p.spec.dimension == 1 ? 32 : 24;
    s.greedy = greedy_config(to, {}, p.spec.dimension);
  }
  s.cells = p.cells;
  const SasiConfig sasi = sasi_config(so);
  s.full_order = sasi;
  s.greedy.sasi = sasi;
  if (r_tol_given) s.greedy.r_tol = to.r_tol;
  if (to.n0 > 0) s.greedy.n0 = to.n0;
  if (to.m_tol >= 0) s.greedy.m_tol = to.m_tol;
  if (to.training > 0) s.training_size = to.training;
  if (test >= 0) s.test_size = test;

  const RunReport r = run_benchmark(s);
  const auto manifest = export_artifacts(r, output);
  std::printf("problem %s\nrb_dimension %d\nsamples %zu\n", r.problem.c_str(), r.rb_dimension, r.num_samples);
  print_metrics("training", r.training);
  print_metrics("testing", r.testing);
  std::printf("relative_time %s\nfiles %zu\n", sci(r.timings.relative()).c_str(), manifest.size());
  if (r.diverged) {
    std::fprintf(stderr, "divergence: %s\n", r.failure.c_str());
    return kExitNonConvergence;
  }
  return 0;
}

int run_sweep(std::vector<double> cs, double r_tol, int training, int test, const std::string& accelerator,
              const std::string& output) {
  const Accelerator a = parse_accelerator(accelerator);
  for (double c : cs)
    if (c < 0.0) throw ConfigError("scattering strengths must be non-negative");
  const auto rows = robustness_sweep(cs, r_tol, training, test, a);
  std::filesystem::create_directories(output);
  write_json(std::filesystem::path(output) / "sweep.json", sweep_json(rows));
  std::ofstream csv(std::filesystem::path(output) / "sweep.csv");
  csv << "C,rb_dimension,test_R_f,R_rho,ok\n";
  std::printf("C rb_dimension test_R_f R_rho\n");
  bool ok = true;
  for (const auto& r : rows) {
    const std::string tf = r.test_error ? sci(*r.test_error) : "nan";
    const std::string tr = r.rho_error ? sci(*r.rho_error) : "nan";
    csv << sci(r.c) << ',' << r.rb_dimension << ',' << tf << ',' << tr << ',' << (r.ok ? 1 : 0) << '\n';
    std::printf("%s %d %s %s%s\n", sci(r.c).c_str(), r.rb_dimension, tf.c_str(), tr.c_str(),
                r.ok ? "" : ("  failed: " + r.failure).c_str());
    ok = ok && r.ok;
  }
  return ok ? 0 : kExitNonConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete ordinates DG transport solver with an angular reduced basis"};
  app.require_subcommand(1);

  ProblemOptions problem;
  SolverOptions solver;
  TrainOptions train;
  std::string output = "out";
  std::string model_path;
  int directions = 0;
  int test = -1;
  bool fields = false;
  bool reference = false;
  std::vector<double> cs{1, 5, 10, 25, 50, 100, 500, 1000};
  double sweep_r_tol = 1e-8;
  int sweep_training = 40;
  int sweep_test = 32;

  auto* solve = app.add_subcommand("solve-full", "full-order SASI solve");
  add_problem_options(solve, problem);
  add_solver_options(solve, solver);
  solve->add_option("--directions", directions, "quadrature size (default 24 in 1D, 32 in 2D)");
  solve->add_option("--output", output, "output directory")->capture_default_str();
  solve->add_flag("--fields", fields, "also write one CSV per direction");

  auto* trainer = app.add_subcommand("train-rb", "greedy reduced basis training");
  add_problem_options(trainer, problem);
  add_solver_options(trainer, solver);
  add_train_options(trainer, train);
  trainer->add_option("--model", model_path, "model file to write")->required();
  trainer->add_option("--output", output, "optional directory for density and basis CSVs");

  auto* predictor = app.add_subcommand("predict", "online prediction from a model file");
  predictor->add_option("--model", model_path, "model file")->required();
  predictor->add_option("--directions", directions, "test rule size (default 32 in 1D, 24 in 2D)");
  predictor->add_option("--output", output, "output directory")->capture_default_str();
  predictor->add_flag("--reference", reference, "also solve the full-order problem and report errors");
  add_solver_options(predictor, solver);

  auto* bench = app.add_subcommand("benchmark", "reference solve, training and error metrics");
  add_problem_options(bench, problem);
  add_solver_options(bench, solver);
  add_train_options(bench, train);
  bench->add_option("--test", test, "test rule size, 0 to skip testing");
  bench->add_option("--output", output, "artifact directory")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "robustness sweep over the scattering strength");
  sweep->add_option("--c", cs, "scattering strengths")->capture_default_str();
  sweep->add_option("--r-tol", sweep_r_tol, "spectral ratio tolerance")->capture_default_str();
  sweep->add_option("--training", sweep_training, "training rule size")->capture_default_str();
  sweep->add_option("--test", sweep_test, "test rule size")->capture_default_str();
  sweep->add_option("--accelerator", solver.accelerator, "none, s2sa or dsa")->capture_default_str();
  sweep->add_option("--output", output, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*solve) return run_solve_full(problem, solver, directions, output, fields);
    if (*trainer) return run_train(problem, solver, train, model_path, output);
    if (*predictor) return run_predict(model_path, directions, output, reference, solver);
    if (*bench) return run_benchmark_cmd(problem, solver, train, test, bench->count("--r-tol") > 0, output);
    if (*sweep) return run_sweep(cs, sweep_r_tol, sweep_training, sweep_test, solver.accelerator, output);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
