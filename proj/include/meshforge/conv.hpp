#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meshforge/barycentric.hpp"
#include "meshforge/gmm.hpp"
#include "meshforge/mesh.hpp"

namespace meshforge {

/// Depthwise filter bank: every input channel c fans out to `multiplier`
/// output channels c * multiplier + m, each with its own weight per filter.
template <typename T>
struct DepthwiseKernel {
  int filters = 0;
  int channels = 0;
  int multiplier = 1;
  /// filters x (channels * multiplier)
  Tensor<T> weights;

  static DepthwiseKernel zeros(int filters, int channels, int multiplier);
  int output_channels() const { return channels * multiplier; }
};

/// Facet connectivity shared by the convolutions.
struct MeshTopology {
  std::size_t num_vertices = 0;
  std::vector<Facet> facets;
  VertexFacetAdjacency adjacency;

  static MeshTopology of(const TriMesh& mesh);
  std::size_t num_facets() const { return facets.size(); }
};

/// Facet -> vertex aggregation pattern used by facet2vertex. Output row r
/// averages the facets listed for it; a facet may feed several rows.
struct FacetGather {
  std::size_t outputs = 0;
  std::size_t num_facets = 0;
  std::vector<int> offsets;
  std::vector<int> facets;
  /// Transpose: the rows fed by each facet.
  std::vector<int> facet_offsets;
  std::vector<int> facet_rows;

  /// One row per vertex over its incident facets. Facets flagged in
  /// `exclude` (e.g. degenerate ones) are left out when given.
  static FacetGather per_vertex(const MeshTopology& topology, std::span<const char> exclude = {});
  /// Row r gathers the incident facets of every vertex i with
  /// vertex_to_row[i] == r (entries < 0 are skipped). Used for strided
  /// output onto a decimated vertex set.
  static FacetGather strided(const MeshTopology& topology, std::span<const int> vertex_to_row, std::size_t rows);

  std::size_t count(std::size_t row) const { return static_cast<std::size_t>(offsets[row + 1] - offsets[row]); }
  /// Rows with nothing to aggregate; their output is zero.
  std::vector<int> empty_rows() const;
};

/// Per-facet texture samples: barycentric position plus a feature row.
template <typename T>
struct TexturedFacetFeatures {
  std::vector<int> offsets{0};
  std::vector<Barycentric> coords;
  /// total samples x C
  Tensor<T> features;

  std::size_t num_facets() const { return offsets.size() - 1; }
};

template <typename T>
struct DepthwiseGradient {
  Tensor<T> features;
  Tensor<T> weights;
};

// ------------------------------------------------------------ vertex2facet

/// J = 1/K sum_k W_k * I_k with I_k, W_k the barycentric blends of the three
/// corner features and the three filters. Output: M x (C * multiplier).
template <typename T>
Tensor<T> vertex2facet_forward(const MeshTopology& topology, const Tensor<T>& vertex_features,
                               const DepthwiseKernel<T>& kernel, const BarycentricPlan& plan);

template <typename T>
DepthwiseGradient<T> vertex2facet_backward(const MeshTopology& topology, const Tensor<T>& vertex_features,
                                           const DepthwiseKernel<T>& kernel, const BarycentricPlan& plan,
                                           const Tensor<T>& grad_output);

// ------------------------------------------------------------ facet2facet

template <typename T>
Tensor<T> facet2facet_forward(const TexturedFacetFeatures<T>& textures, const DepthwiseKernel<T>& kernel);

/// Gradient rows follow the texture samples.
template <typename T>
DepthwiseGradient<T> facet2facet_backward(const TexturedFacetFeatures<T>& textures, const DepthwiseKernel<T>& kernel,
                                          const Tensor<T>& grad_output);

// ------------------------------------------------------------ facet2vertex

/// I_r = 1/|N(r)| sum_i (sum_t pi_it w_t) * J_i over the facets gathered for row r.
template <typename T>
Tensor<T> facet2vertex_forward(const FacetGather& gather, const Tensor<T>& facet_features,
                               const DepthwiseKernel<T>& kernel, const Tensor<T>& coefficients);

template <typename T>
struct Facet2VertexGradient {
  Tensor<T> features;
  Tensor<T> weights;
  /// dL/dpi, M x T.
  Tensor<T> coefficients;
  /// Filled by the overload taking the mixture; entries follow its trainable flags.
  GMMGradient mixture;
};

template <typename T>
Facet2VertexGradient<T> facet2vertex_backward(const FacetGather& gather, const Tensor<T>& facet_features,
                                              const DepthwiseKernel<T>& kernel, const Tensor<T>& coefficients,
                                              const Tensor<T>& grad_output);

/// As above with pi = gmm_coefficients(normals, gmm), also pulling dL/dpi back
/// to the mixture sigmas and means (ambient-space gradient for the means).
template <typename T>
Facet2VertexGradient<T> facet2vertex_backward(const FacetGather& gather, const Tensor<T>& facet_features,
                                              const DepthwiseKernel<T>& kernel, std::span<const Vec3> normals,
                                              const SphereGMM& gmm, const Tensor<T>& grad_output);

// ------------------------------------------------------------ 1x1 channel mixing

/// Dense per-row linear map x * weights (weights: C_in x C_out).
template <typename T>
Tensor<T> pointwise_forward(const Tensor<T>& x, const Tensor<T>& weights);

template <typename T>
DepthwiseGradient<T> pointwise_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& grad_output);

// ------------------------------------------------------------ vertex2vertex

/// vertex2facet followed by facet2vertex.
template <typename T>
struct VertexToVertex {
  DepthwiseKernel<T> to_facet;   // 3 filters, C channels
  DepthwiseKernel<T> to_vertex;  // T filters, C * to_facet.multiplier channels
};

template <typename T>
struct VertexToVertexState {
  Tensor<T> facet_features;
  Tensor<T> output;
};

template <typename T>
VertexToVertexState<T> vertex2vertex_forward(const MeshTopology& topology, const FacetGather& gather,
                                             const BarycentricPlan& plan, const Tensor<T>& coefficients,
                                             const VertexToVertex<T>& conv, const Tensor<T>& vertex_features);

template <typename T>
struct VertexToVertexGradient {
  Tensor<T> features;
  Tensor<T> to_facet_weights;
  Tensor<T> to_vertex_weights;
  Tensor<T> coefficients;
};

template <typename T>
VertexToVertexGradient<T> vertex2vertex_backward(const MeshTopology& topology, const FacetGather& gather,
                                                 const BarycentricPlan& plan, const Tensor<T>& coefficients,
                                                 const VertexToVertex<T>& conv, const Tensor<T>& vertex_features,
                                                 const VertexToVertexState<T>& state, const Tensor<T>& grad_output);

/// Facet normals of the mesh (zero for degenerate facets).
std::vector<Vec3> facet_normals(const TriMesh& mesh);
std::vector<double> facet_areas(const TriMesh& mesh);

}  // namespace meshforge
