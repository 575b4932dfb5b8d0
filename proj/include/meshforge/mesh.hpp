#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace meshforge {

using Vec3 = Eigen::Vector3d;
using Facet = std::array<int, 3>;
using Edge = std::pair<int, int>;

template <typename T>
using Tensor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-vertex feature rows (N x C). C may be zero.
using FeatureMatrix = Tensor<double>;

/// Raised when a mesh violates the structural invariants.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Triangle mesh: positions, per-vertex feature rows and facet index triples.
///
/// Files loaded through mesh_io carry features laid out as (x, y, z) or
/// (x, y, z, r, g, b) with colors rescaled to [-1, 1].
struct TriMesh {
  std::vector<Vec3> positions;
  FeatureMatrix features;
  std::vector<Facet> facets;

  std::size_t num_vertices() const { return positions.size(); }
  std::size_t num_facets() const { return facets.size(); }
  std::size_t channels() const { return static_cast<std::size_t>(features.cols()); }
};

/// Checks index range, distinct corners and feature row count.
/// With require_nonempty, also N >= 3 and M >= 1.
void validate(const TriMesh& mesh, bool require_nonempty = true);

/// Features made of the position channels only.
FeatureMatrix position_features(std::span<const Vec3> positions);

struct FacetGeometry {
  Vec3 normal = Vec3::Zero();
  double area = 0.0;
  /// d in n^T x + d = 0.
  double intercept = 0.0;
  bool degenerate = false;
};

/// Geometry of the triangle (p0, p1, p2). A triangle whose corner angle has
/// |sin| below 1e-14 is degenerate: zero normal, area and intercept.
FacetGeometry facet_geometry(const Vec3& p0, const Vec3& p1, const Vec3& p2);

std::vector<FacetGeometry> compute_facet_geometry(const TriMesh& mesh);

/// Compressed vertex -> incident facet lists. Facet ids are ascending per vertex.
struct VertexFacetAdjacency {
  std::vector<int> offsets;
  std::vector<int> facets;

  std::size_t num_vertices() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const int> of(std::size_t v) const {
    return {facets.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  std::size_t degree(std::size_t v) const { return static_cast<std::size_t>(offsets[v + 1] - offsets[v]); }
};

VertexFacetAdjacency vertex_facet_adjacency(const TriMesh& mesh);

/// Unique undirected edges (i < j), sorted lexicographically.
std::vector<Edge> edge_list(const TriMesh& mesh);
std::vector<Edge> edge_list(const TriMesh& mesh, const VertexFacetAdjacency& adjacency);

/// B meshes concatenated into one, with offset tables of length B + 1.
struct BatchedMesh {
  TriMesh mesh;
  std::vector<int> vertex_offsets{0};
  std::vector<int> facet_offsets{0};

  std::size_t batch_size() const { return vertex_offsets.size() - 1; }
};

/// Extracts mesh b with facet indices shifted back to local numbering.
TriMesh slice_batch(const BatchedMesh& batch, std::size_t b);

/// Counts reported by `meshforge validate`.
struct TopologyReport {
  std::size_t degenerate_facets = 0;
  /// Facets whose vertex set repeats an earlier facet (orientation ignored).
  std::size_t duplicate_facets = 0;
  /// Connected components among vertices referenced by facets.
  std::size_t components = 0;
  std::size_t isolated_vertices = 0;
};

TopologyReport analyze_topology(const TriMesh& mesh);

}  // namespace meshforge
