#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meshforge/decimate.hpp"
#include "meshforge/mesh.hpp"

namespace meshforge {

enum class PoolMode { max, average, weighted, sum };

/// Cluster view of a replace tensor: input vertex i belongs to output row replace[i].
struct ClusterMap {
  std::span<const int> replace;
  std::size_t clusters = 0;

  static ClusterMap of(const DecimationResult& r) { return {r.replace, r.mesh.num_vertices()}; }
};

struct PoolResult {
  FeatureMatrix values;
  /// For max pooling: input row chosen for each (output row, channel),
  /// lowest index on ties. Empty for the other modes.
  std::vector<int> argmax;
};

/// Reduces the rows of each cluster. Weighted mode computes sum(w f) / sum(w)
/// and requires one weight per input vertex.
PoolResult pool(const FeatureMatrix& features, ClusterMap clusters, PoolMode mode,
                std::span<const double> weights = {});

/// Broadcasts row replace[i] of the coarse features to fine row i.
FeatureMatrix unpool(const FeatureMatrix& coarse, ClusterMap clusters);

/// Gradient of pool with respect to its input features.
FeatureMatrix pool_backward(const FeatureMatrix& grad_output, ClusterMap clusters, PoolMode mode,
                            std::span<const int> argmax = {}, std::span<const double> weights = {});

/// Gradient of unpool: the cluster-wise sum of the fine gradient.
FeatureMatrix unpool_backward(const FeatureMatrix& grad_fine, ClusterMap clusters);

}  // namespace meshforge
