#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "rtrb/angular.hpp"

namespace rtrb {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Thrown for malformed problem definitions, unknown tags and bad CLI input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarField = std::function<double(const Point&)>;
// Inflow value at a boundary point for a direction; consulted only where
// the direction points into the domain.
using InflowFunction = std::function<double(const Point&, const Direction&)>;

/// Axis-aligned box [x_lo, x_hi] (x [y_lo, y_hi]).
struct Domain {
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
  bool contains(const Point& p, int dimension) const;
};

/// Physics of one steady transport problem. Immutable after construction.
struct ProblemSpec {
  std::string name;
  int dimension = 1;
  Domain domain;
  ScalarField sigma_s;
  ScalarField sigma_t;
  ScalarField source;
  InflowFunction inflow;
  // Default uniform cell count per axis.
  std::array<int, 2> default_cells{1, 1};
};

enum class ExampleId {
  slab_scattering,        // 1D Example 1
  slab_varying,           // 1D Example 2
  slab_two_material_1,    // 1D Example 3
  slab_two_material_2,    // 1D Example 4
  slab_transport,         // 1D Example 5
  slab_robustness,        // sigma_t = C + 0.5, sigma_s = C
  plane_checkerboard,     // 2D Example 1
  plane_scattering,       // 2D Example 2
  plane_intermediate,     // 2D Example 3
  plane_transport,        // 2D Example 4
};

/// Short CLI tags: "1d-ex1".."1d-ex5", "1d-robust", "2d-ex1".."2d-ex4".
ExampleId parse_example_id(const std::string& tag);
std::string example_tag(ExampleId id);

ProblemSpec build_example(ExampleId id, std::optional<double> c = std::nullopt);

enum class Region { white, black };
/// Checkerboard geometry of the multiscale 2D example on [0,10]^2.
Region checkerboard_region(double x, double y);

/// Key-value problem definition. See README for the format.
ProblemSpec parse_problem_config(const std::string& text);
ProblemSpec load_problem_config(const std::string& path);

/// Throws ConfigError if sigma_s < 0 or sigma_t < sigma_s at any point of a
/// lattice with `samples` points per axis.
void validate_cross_sections(const ProblemSpec& p, int samples = 101);

}  // namespace rtrb
