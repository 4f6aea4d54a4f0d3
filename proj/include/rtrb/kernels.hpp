#pragma once

// Data-parallel inner loops shared by the solvers. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant; the variant is
// picked once at startup from CPUID and can be pinned with RTRB_ISA=scalar.

#include <span>
#include <string_view>

namespace rtrb::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
bool isa_available(Isa isa);
// Switches the dispatch table; throws std::invalid_argument if unavailable.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

double dot(std::span<const double> x, std::span<const double> y);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// y = sum_j w[j] * cols[j]; every column has y.size() entries
void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y);
// y = A x, A row-major n x n with n = x.size()
void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y);
// y -= A x
void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y);
void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y);
void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y);
}  // namespace scalar

#if defined(RTRB_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y);
void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y);
void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

}  // namespace rtrb::kernels
