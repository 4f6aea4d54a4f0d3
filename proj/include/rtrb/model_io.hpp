#pragma once

#include <array>
#include <optional>
#include <string>

#include "rtrb/rbm.hpp"

namespace rtrb {

/// A trained model together with what is needed to rebuild its problem.
/// Either an example tag (plus the scattering strength for the robustness
/// family) or the full text of a problem config file is stored.
struct ModelFile {
  std::string example_tag;
  std::optional<double> scattering;
  std::string config_text;
  std::array<int, 2> cells{1, 1};
  Accelerator accelerator = Accelerator::s2sa;
  ReducedModel model;
};

/// Text layout, one keyword line per block, numbers in %.17e:
///   rtrb-model v1
///   example <tag> [scattering <C>]   |   config <line count> followed by the lines
///   cells <nx> <ny>
///   dimension <d>
///   accelerator <name>
///   ls_degree <s>
///   spectral_ratio <r>
///   exhausted <0|1>
///   samples <n>            then one line per sample: v (1D) or theta x y (2D)
///   rho <n>                then one value per line
///   singular_values <r>    then one value per line
///   basis <rows> <cols>    then one row per line
///   right_factors <rows> <cols>
///   history <k>            then: iteration ratio rank selected indicator
///                          counterpart ls_degree sasi_iterations
///   end
void write_model(const ModelFile& file, const std::string& path);
ModelFile read_model(const std::string& path);

/// Rebuilds the problem description stored in a model file.
ProblemSpec model_problem(const ModelFile& file);

}  // namespace rtrb
