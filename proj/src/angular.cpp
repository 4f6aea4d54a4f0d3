#include "rtrb/angular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rtrb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double snap(double c) { return std::abs(c) < 1e-15 ? 0.0 : c; }

}  // namespace

Direction Direction::slab(double v) {
  if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument("slab direction cosine outside [-1,1]");
  Direction d;
  d.dim_ = 1;
  d.x_ = v;
  return d;
}

Direction Direction::planar(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("non-finite angle");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  Direction d;
  d.dim_ = 2;
  d.theta_ = t;
  d.x_ = snap(std::cos(t));
  d.y_ = snap(std::sin(t));
  return d;
}

Direction Direction::planar(double theta, double x, double y) {
  if (!(theta >= 0.0 && theta < kTwoPi) || !(std::abs(x * x + y * y - 1.0) < 1e-12))
    throw std::invalid_argument("stored planar direction is not a unit vector with reduced angle");
  Direction d;
  d.dim_ = 2;
  d.theta_ = theta;
  d.x_ = x;
  d.y_ = y;
  return d;
}

Direction Direction::counterpart() const {
  Direction d = *this;
  d.x_ = -x_;
  d.y_ = -y_;
  if (dim_ == 2) d.theta_ = theta_ < std::numbers::pi ? theta_ + std::numbers::pi : theta_ - std::numbers::pi;
  return d;
}

Direction symmetric_counterpart(const Direction& d) { return d.counterpart(); }

double AngularQuadrature::weight_sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

SampleSet::SampleSet(std::vector<Direction> dirs) {
  for (const auto& d : dirs) insert(d);
}

bool SampleSet::contains(const Direction& d) const {
  return std::find(dirs_.begin(), dirs_.end(), d) != dirs_.end();
}

bool SampleSet::insert(const Direction& d) {
  if (contains(d)) return false;
  dirs_.push_back(d);
  return true;
}

void gauss_legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root, refined by Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (n % 2 == 1 && i == half - 1) x = 0.0;
    nodes[n - 1 - i] = x;
    nodes[i] = -x;
    weights[n - 1 - i] = w;
    weights[i] = w;
  }
}

AngularQuadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: N must be >= 1, got " + std::to_string(n));
  std::vector<double> x, w;
  gauss_legendre_rule(n, x, w);
  AngularQuadrature q;
  q.dimension = 1;
  for (int i = 0; i < n; ++i) {
    q.directions.push_back(Direction::slab(x[i]));
    q.weights.push_back(0.5 * w[i]);
  }
  return q;
}

AngularQuadrature uniform_circle(int n) {
  if (n < 1) throw std::invalid_argument("uniform_circle: N must be >= 1, got " + std::to_string(n));
  AngularQuadrature q;
  q.dimension = 2;
  q.directions.resize(2 * n);
  q.weights.assign(2 * n, 1.0 / (2.0 * n));
  for (int j = 1; j <= n; ++j) {
    const Direction d = Direction::planar((2.0 * j - 1.0) * std::numbers::pi / (2.0 * n));
    q.directions[j - 1] = d;
    q.directions[j - 1 + n] = d.counterpart();
  }
  return q;
}

AngularQuadrature initial_set(int dimension, int n0) {
  if (n0 < 2) throw std::invalid_argument("initial_set: N_0 must be >= 2");
  if (dimension == 1) return gauss_legendre(n0);
  if (dimension != 2) throw std::invalid_argument("initial_set: dimension must be 1 or 2");
  AngularQuadrature q;
  q.dimension = 2;
  q.directions.resize(n0);
  q.weights.assign(n0, 1.0 / n0);
  const bool even = n0 % 2 == 0;
  const int first = even ? n0 / 2 : n0;
  for (int j = 0; j < first; ++j) {
    q.directions[j] = Direction::planar(2.0 * j * std::numbers::pi / n0);
    if (even) q.directions[j + first] = q.directions[j].counterpart();
  }
  return q;
}

AngularQuadrature s2_set(int dimension) {
  if (dimension == 1) return gauss_legendre(2);
  if (dimension == 2) return uniform_circle(2);
  throw std::invalid_argument("s2_set: dimension must be 1 or 2");
}

AngularQuadrature training_quadrature(int dimension, int num_directions) {
  if (dimension == 1) return gauss_legendre(num_directions);
  if (dimension != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (num_directions < 2 || num_directions % 2 != 0)
    throw std::invalid_argument("2D direction count must be even and >= 2");
  return uniform_circle(num_directions / 2);
}

}  // namespace rtrb
