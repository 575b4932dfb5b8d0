#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace meshforge {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  /// Randomized cases per operation.
  int cases = 100;
  /// Icosphere subdivision levels cycled through by the cases (0: 12 vertices, 1: 42).
  std::vector<int> sizes{0, 1};
  /// Central-difference step.
  double eps = 1e-5;
  /// Run the convolutions in float instead of double.
  bool single_precision = false;
  /// Denominator floor of the relative error; 0 picks 1e-6 (double) or 1e-2 (float).
  double floor = 0.0;
  int channels = 3;
  int multiplier = 2;
  int components = 6;
};

struct GradcheckResult {
  std::string op;
  double max_relative_error = 0.0;
  /// Parameter entries compared.
  std::size_t entries = 0;
};

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Analytic backward vs central differences for every convolution (per
/// parameter group), vertex2vertex, the 1x1 layer and the pooling adjoints.
/// The loss is <g, f(x)> for a random upstream g.
std::vector<GradcheckResult> run_gradchecks(const GradcheckOptions& options);

}  // namespace meshforge
