#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace rtrb;
using namespace rtrb::test;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("rtrb_harness_" + name);
  fs::remove_all(d);
  return d;
}

BenchmarkSettings small_run() {
  auto s = default_benchmark(ExampleId::slab_scattering);
  s.cells = {40, 1};
  s.training_size = 16;
  s.test_size = 12;
  return s;
}

}  // namespace

TEST_CASE("error metrics") {
  const auto p = slab_problem(1.0, 1.0, 0.0, 0.0);
  const DGSpace one(build_mesh(p, 1), 1);
  const Vector a{{3.0, 4.0}}, b{{0.0, 1.0}}, rho{{1.0, 1.0}};
  const std::vector<Vector> ref{a, b}, same{a, b};
  const auto zero = error_metrics(one, ref, rho, same, rho);
  CHECK(zero.e_f == 0.0);
  CHECK(*zero.r_f == 0.0);
  CHECK(zero.e_rho == 0.0);

  // hand computation on one element: the norm is the Euclidean norm of the coefficients
  const std::vector<Vector> cand{Vector{{3.0, 3.0}}, Vector{{0.0, 3.0}}};
  const auto m = error_metrics(one, ref, rho, cand, Vector{{1.0, 0.0}});
  CHECK(m.e_f == doctest::Approx(2.0));
  CHECK(*m.r_f == doctest::Approx(2.0));
  CHECK(m.e_rho == doctest::Approx(1.0));
  CHECK(*m.r_rho == doctest::Approx(1.0 / std::sqrt(2.0)));

  const std::vector<Vector> scaled{1.01 * a, 1.01 * b};
  const auto s = error_metrics(one, ref, rho, scaled, 1.01 * rho);
  CHECK(*s.r_f == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(*s.r_rho == doctest::Approx(0.01).epsilon(1e-12));

  const std::vector<Vector> with_zero{a, Vector::Zero(2)};
  const auto z = error_metrics(one, with_zero, Vector::Zero(2), same, rho);
  CHECK_FALSE(z.r_f.has_value());
  CHECK_FALSE(z.r_rho.has_value());
  CHECK(std::isfinite(z.e_f));
  CHECK_THROWS_AS(error_metrics(one, ref, rho, {a}, rho), std::invalid_argument);
}

TEST_CASE("benchmark report") {
  const RunReport r = run_benchmark(small_run());
  REQUIRE_FALSE(r.diverged);
  REQUIRE(r.training);
  REQUIRE(r.testing);
  CHECK(r.history.size() == r.selected.size());
  CHECK(r.rb_dimension == r.basis.cols());
  CHECK(*r.training->r_f >= 0.0);
  CHECK(*r.testing->r_f < 1e-2);
  CHECK(r.timings.full_order > 0.0);
  CHECK(r.timings.relative() > 0.0);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].iteration == r.history[i - 1].iteration + 1);

  const RunReport again = run_benchmark(small_run());
  CHECK(again.rb_dimension == r.rb_dimension);
  CHECK(again.training->e_f == r.training->e_f);
  CHECK(again.testing->r_f == r.testing->r_f);
  REQUIRE(again.selected.size() == r.selected.size());
  for (std::size_t i = 0; i < r.selected.size(); ++i) CHECK(again.selected[i] == r.selected[i]);

  auto s = small_run();
  s.greedy.m_tol = 0;
  const RunReport initial = run_benchmark(s);
  CHECK(initial.history.empty());
  CHECK(initial.num_samples == 2u);
  CHECK(initial.training.has_value());
}

TEST_CASE("relative errors respect the definition-level bound") {
  const auto s = small_run();
  const auto space = space_for(s.problem, s.cells[0]);
  const auto q = gauss_legendre(s.training_size);
  const auto ops = assemble_operators(space, s.problem, q.directions);
  const auto ref = sasi_solve(ops, q, s.problem, SasiConfig{});
  const auto model = greedy_train(ops, s.problem, s.greedy);
  const auto pred = predict(model, ops);
  const auto m = error_metrics(*space, ref.fields, ref.rho, pred.fields, model.rho);
  double min_norm = INFINITY;
  for (const auto& f : ref.fields) min_norm = std::min(min_norm, l2_norm(*space, f));
  CHECK(*m.r_f <= m.e_f / min_norm * (1.0 + 1e-14));
}

TEST_CASE("failures are recorded in the report") {
  auto s = small_run();
  s.full_order.accelerator = Accelerator::none;
  s.full_order.iter_tol = 3;
  const RunReport r = run_benchmark(s);
  CHECK(r.diverged);
  CHECK(r.failure.find("did not converge") != std::string::npos);
  CHECK_FALSE(r.training.has_value());
}

TEST_CASE("artifact export") {
  const auto empty_dir = temp_dir("empty");
  const auto empty = export_artifacts(RunReport{}, empty_dir);
  REQUIRE(empty.size() == 1u);
  CHECK(empty[0].file == "metrics.json");
  CHECK(fs::exists(empty_dir / "manifest.txt"));

  const RunReport r = run_benchmark(small_run());
  const auto d1 = temp_dir("a"), d2 = temp_dir("b");
  const auto m1 = export_artifacts(r, d1);
  const auto m2 = export_artifacts(r, d2);
  CHECK(m1.size() == static_cast<std::size_t>(4 + r.rb_dimension));
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].file == m2[i].file);
    CHECK(m1[i].sha256 == m2[i].sha256);
    CHECK(m1[i].size == fs::file_size(d1 / m1[i].file));
  }
  CHECK(m1[0].file == "rho_full.csv");
  CHECK(m1[1].file == "rho_rb.csv");
  CHECK(m1[2].file == "history.csv");
  CHECK(m1[3].file == "basis_000.csv");

  std::ifstream in(d1 / "metrics.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["rb_dimension"] == r.rb_dimension);
  CHECK(j["training"]["R_f"].get<double>() == *r.training->r_f);

  for (const auto& d : {empty_dir, d1, d2}) fs::remove_all(d);
}

TEST_CASE("SHA-256 of a known input") {
  const auto path = fs::temp_directory_path() / "rtrb_sha_abc.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "abc";
  }
  CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(path);
}

TEST_CASE("robustness sweep rows") {
  const std::vector<double> one{10.0};
  const auto rows = robustness_sweep(one, 1e-6, 16, 12);
  REQUIRE(rows.size() == 1u);
  CHECK(rows[0].ok);
  CHECK(rows[0].c == 10.0);
  CHECK(rows[0].test_error.has_value());
  const auto j = sweep_json(rows);
  CHECK(j.size() == 1u);
  CHECK(j[0]["rb_dimension"] == rows[0].rb_dimension);

  const std::vector<double> bad{-1.0};
  const auto failed = robustness_sweep(bad, 1e-6, 16, 12);
  CHECK_FALSE(failed[0].ok);
  CHECK_FALSE(failed[0].failure.empty());
}

TEST_CASE("number formatting") {
  CHECK(format_sci(0.1) == "1.00000000000000006e-01");
  for (double v : {-2.5e-300, 1.0 / 3.0, 6.02214076e23}) CHECK(std::strtod(format_sci(v).c_str(), nullptr) == v);
}
