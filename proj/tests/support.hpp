#pragma once

#include <random>

#include "rtrb/harness.hpp"

namespace rtrb::test {

inline Vector random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double relative_l2(const DGSpace& space, const Vector& a, const Vector& ref) {
  return l2_norm(space, a - ref) / l2_norm(space, ref);
}

inline std::shared_ptr<const DGSpace> space_for(const ProblemSpec& p, int nx, int ny = 1) {
  return std::make_shared<const DGSpace>(build_mesh(p, nx, ny), 1);
}

inline ProblemSpec slab_problem(double length, double sigma_t, double sigma_s, double source) {
  ProblemSpec p;
  p.name = "slab";
  p.dimension = 1;
  p.domain = {0.0, length, 0.0, 0.0};
  p.sigma_t = [sigma_t](const Point&) { return sigma_t; };
  p.sigma_s = [sigma_s](const Point&) { return sigma_s; };
  p.source = [source](const Point&) { return source; };
  p.inflow = [](const Point&, const Direction&) { return 0.0; };
  return p;
}

}  // namespace rtrb::test
