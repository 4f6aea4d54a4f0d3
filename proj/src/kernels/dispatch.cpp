#include <cstdlib>
#include <stdexcept>
#include <string>

#include "rtrb/kernels.hpp"

namespace rtrb::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*weighted_sum)(std::span<const double>, std::span<const double* const>, std::span<double>);
  void (*block_gemv)(std::span<const double>, std::span<const double>, std::span<double>);
  void (*block_gemv_sub)(std::span<const double>, std::span<const double>, std::span<double>);
};

constexpr Table scalar_table{Isa::scalar, scalar::dot, scalar::axpy, scalar::weighted_sum, scalar::block_gemv,
                             scalar::block_gemv_sub};
#if defined(RTRB_HAVE_AVX2)
constexpr Table avx2_table{Isa::avx2, avx2::dot, avx2::axpy, avx2::weighted_sum, avx2::block_gemv,
                           avx2::block_gemv_sub};
#endif

const Table* pick_default() {
  const char* env = std::getenv("RTRB_ISA");
  if (env != nullptr && std::string(env) == "scalar") return &scalar_table;
#if defined(RTRB_HAVE_AVX2)
  if (isa_available(Isa::avx2)) return &avx2_table;
#endif
  return &scalar_table;
}

const Table*& table() {
  static const Table* t = pick_default();
  return t;
}

}  // namespace

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(RTRB_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table()->isa; }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("instruction set not available on this host");
#if defined(RTRB_HAVE_AVX2)
  table() = isa == Isa::avx2 ? &avx2_table : &scalar_table;
#else
  table() = &scalar_table;
#endif
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> x, std::span<const double> y) { return table()->dot(x, y); }
void axpy(double a, std::span<const double> x, std::span<double> y) { table()->axpy(a, x, y); }
void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y) {
  table()->weighted_sum(w, cols, y);
}
void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  table()->block_gemv(a, x, y);
}
void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  table()->block_gemv_sub(a, x, y);
}

}  // namespace rtrb::kernels
