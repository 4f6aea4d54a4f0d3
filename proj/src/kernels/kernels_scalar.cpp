#include "rtrb/kernels.hpp"

#include <cstddef>

namespace rtrb::kernels::scalar {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double* c = cols[j];
    const double wj = w[j];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += wj * c[i];
  }
}

void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += a[r * n + c] * x[c];
    y[r] = s;
  }
}

void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += a[r * n + c] * x[c];
    y[r] -= s;
  }
}

}  // namespace rtrb::kernels::scalar
