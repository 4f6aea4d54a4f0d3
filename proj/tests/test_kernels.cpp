#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rtrb/full_order.hpp"
#include "rtrb/kernels.hpp"

using namespace rtrb;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  std::mt19937 rng(1);
  const auto x = random_values(13, rng), y = random_values(13, rng);
  double ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ref += x[i] * y[i];
  CHECK(kernels::scalar::dot(x, y) == doctest::Approx(ref).epsilon(1e-14));

  const auto a = random_values(16, rng), v = random_values(4, rng);
  std::vector<double> out(4), expect(4, 0.0);
  kernels::scalar::block_gemv(a, v, out);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) expect[r] += a[r * 4 + c] * v[c];
  CHECK(max_diff(out, expect) < 1e-15);

  kernels::scalar::block_gemv_sub(a, v, out);
  CHECK(max_diff(out, std::vector<double>(4, 0.0)) < 1e-15);
}

TEST_CASE("weighted sum of columns") {
  const std::vector<double> c0{1.0, 2.0, 3.0}, c1{-1.0, 0.5, 4.0};
  const std::vector<const double*> cols{c0.data(), c1.data()};
  const std::vector<double> w{0.25, 0.75};
  std::vector<double> y(3);
  kernels::weighted_sum(w, cols, y);
  CHECK(y[0] == doctest::Approx(-0.5));
  CHECK(y[1] == doctest::Approx(0.875));
  CHECK(y[2] == doctest::Approx(3.75));
}

#if defined(RTRB_HAVE_AVX2)
TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!kernels::isa_available(kernels::Isa::avx2)) return;
  std::mt19937 rng(7);
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 17u, 64u, 1001u}) {
    const auto x = random_values(n, rng), y = random_values(n, rng);
    const double s = kernels::scalar::dot(x, y), v = kernels::avx2::dot(x, y);
    CHECK(std::abs(s - v) <= 1e-14 * std::max(1.0, static_cast<double>(n)));

    auto ys = y, yv = y;
    kernels::scalar::axpy(0.3, x, ys);
    kernels::avx2::axpy(0.3, x, yv);
    CHECK(max_diff(ys, yv) < 1e-15);

    std::vector<std::vector<double>> cols;
    std::vector<const double*> ptrs;
    for (int j = 0; j < 7; ++j) cols.push_back(random_values(n, rng));
    for (const auto& c : cols) ptrs.push_back(c.data());
    const auto w = random_values(7, rng);
    std::vector<double> ws(n), wv(n);
    kernels::scalar::weighted_sum(w, ptrs, ws);
    kernels::avx2::weighted_sum(w, ptrs, wv);
    CHECK(max_diff(ws, wv) < 1e-14);
  }
  for (std::size_t b : {1u, 2u, 3u, 4u, 9u}) {
    const auto a = random_values(b * b, rng), x = random_values(b, rng);
    std::vector<double> ys(b), yv(b);
    kernels::scalar::block_gemv(a, x, ys);
    kernels::avx2::block_gemv(a, x, yv);
    CHECK(max_diff(ys, yv) < 1e-15);
    kernels::scalar::block_gemv_sub(a, x, ys);
    kernels::avx2::block_gemv_sub(a, x, yv);
    CHECK(max_diff(ys, yv) < 1e-15);
  }
}

TEST_CASE("a full solve is insensitive to the kernel variant") {
  if (!kernels::isa_available(kernels::Isa::avx2)) return;
  const auto p = build_example(ExampleId::plane_checkerboard);
  const auto space = std::make_shared<const DGSpace>(build_mesh(p, 12, 12), 1);
  const auto q = uniform_circle(8);
  const DGOperators ops = assemble_operators(space, p, q.directions);
  const auto before = kernels::active_isa();
  kernels::set_isa(kernels::Isa::scalar);
  const auto a = sasi_solve(ops, q, p, SasiConfig{});
  kernels::set_isa(kernels::Isa::avx2);
  const auto b = sasi_solve(ops, q, p, SasiConfig{});
  kernels::set_isa(before);
  CHECK(a.iterations == b.iterations);
  CHECK(l2_norm(*space, a.rho - b.rho) <= 1e-12 * l2_norm(*space, a.rho));
}
#endif

TEST_CASE("dispatch can be pinned to the scalar path") {
  const auto before = kernels::active_isa();
  kernels::set_isa(kernels::Isa::scalar);
  CHECK(kernels::active_isa() == kernels::Isa::scalar);
  CHECK(kernels::isa_name(kernels::Isa::scalar) == "scalar");
  const std::vector<double> x{1.0, 2.0}, y{3.0, 4.0};
  CHECK(kernels::dot(x, y) == 11.0);
  kernels::set_isa(before);
  CHECK(kernels::active_isa() == before);
}
