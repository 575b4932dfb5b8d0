#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace meshforge {

using Barycentric = std::array<double, 3>;

/// How the per-facet lattice order k is derived from the facet area.
enum class InterpolationCount {
  /// k = floor((A - Amin) / (Amax - Amin)) * alpha + beta
  literal_floor,
  /// k = floor(alpha * (A - Amin) / (Amax - Amin)) + beta
  scaled_floor,
};

/// Per-facet barycentric sample points, K = k(k+1)/2 per facet.
struct BarycentricPlan {
  std::vector<int> order;    // k per facet
  std::vector<int> offsets;  // facet f owns coords[offsets[f], offsets[f+1])
  std::vector<Barycentric> coords;
  int alpha = 1;
  int beta = 1;

  std::size_t num_facets() const { return order.size(); }
  std::span<const Barycentric> of(std::size_t f) const {
    return {coords.data() + offsets[f], static_cast<std::size_t>(offsets[f + 1] - offsets[f])};
  }
};

/// Uniform triangular lattice with k rows: the centroid for k = 1, otherwise
/// (i/(k-1), j/(k-1), 1 - (i+j)/(k-1)) for i + j <= k - 1.
std::vector<Barycentric> barycentric_lattice(int k);

/// Throws std::invalid_argument when alpha or beta is not positive or an area is negative.
BarycentricPlan build_barycentric_plan(std::span<const double> areas, int alpha = 1, int beta = 1,
                                       InterpolationCount rule = InterpolationCount::literal_floor);

}  // namespace meshforge
