#include "meshforge/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "meshforge/parallel.hpp"

namespace meshforge {
namespace {

constexpr double kDegenerateSine = 1e-14;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

// Neighbours of v with a larger index, sorted and unique.
void upper_neighbours(const TriMesh& mesh, const VertexFacetAdjacency& adj, int v, std::vector<int>& out) {
  out.clear();
  for (int f : adj.of(v))
    for (int u : mesh.facets[f])
      if (u > v) out.push_back(u);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace

void validate(const TriMesh& mesh, bool require_nonempty) {
  const auto n = static_cast<long long>(mesh.num_vertices());
  if (require_nonempty && (n < 3 || mesh.num_facets() < 1)) {
    std::ostringstream msg;
    msg << "mesh needs at least 3 vertices and 1 facet (got " << n << " vertices, " << mesh.num_facets()
        << " facets)";
    throw MeshError(msg.str());
  }
  if (mesh.features.rows() != n && !(mesh.features.size() == 0 && mesh.features.cols() == 0)) {
    std::ostringstream msg;
    msg << "feature rows (" << mesh.features.rows() << ") do not match vertex count (" << n << ")";
    throw MeshError(msg.str());
  }
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const Facet& t = mesh.facets[f];
    for (int v : t) {
      if (v < 0 || v >= n) {
        std::ostringstream msg;
        msg << "facet " << f << " references vertex " << v << " outside [0, " << n << ")";
        throw MeshError(msg.str());
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      std::ostringstream msg;
      msg << "facet " << f << " repeats a vertex (" << t[0] << ", " << t[1] << ", " << t[2] << ")";
      throw MeshError(msg.str());
    }
  }
}

FeatureMatrix position_features(std::span<const Vec3> positions) {
  FeatureMatrix out(static_cast<Eigen::Index>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = positions[i].transpose();
  return out;
}

FacetGeometry facet_geometry(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 e1 = p1 - p0;
  const Vec3 e2 = p2 - p0;
  const Vec3 cross = e1.cross(e2);
  const double len = cross.norm();
  FacetGeometry g;
  if (!(len > kDegenerateSine * e1.norm() * e2.norm())) {
    g.degenerate = true;
    return g;
  }
  g.normal = cross / len;
  g.area = 0.5 * len;
  g.intercept = -g.normal.dot(p0);
  return g;
}

std::vector<FacetGeometry> compute_facet_geometry(const TriMesh& mesh) {
  validate(mesh, false);
  std::vector<FacetGeometry> out(mesh.num_facets());
  parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Facet& t = mesh.facets[f];
      out[f] = facet_geometry(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]);
    }
  });
  return out;
}

VertexFacetAdjacency vertex_facet_adjacency(const TriMesh& mesh) {
  validate(mesh, false);
  VertexFacetAdjacency adj;
  adj.offsets.assign(mesh.num_vertices() + 1, 0);
  for (const Facet& t : mesh.facets)
    for (int v : t) ++adj.offsets[v + 1];
  std::partial_sum(adj.offsets.begin(), adj.offsets.end(), adj.offsets.begin());
  adj.facets.resize(adj.offsets.back());
  std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  // Facets are visited in ascending order, so each list comes out sorted.
  for (std::size_t f = 0; f < mesh.num_facets(); ++f)
    for (int v : mesh.facets[f]) adj.facets[cursor[v]++] = static_cast<int>(f);
  return adj;
}

std::vector<Edge> edge_list(const TriMesh& mesh) { return edge_list(mesh, vertex_facet_adjacency(mesh)); }

std::vector<Edge> edge_list(const TriMesh& mesh, const VertexFacetAdjacency& adj) {
  const std::size_t n = mesh.num_vertices();
  std::vector<int> counts(n + 1, 0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<int> scratch;
    for (std::size_t v = lo; v < hi; ++v) {
      upper_neighbours(mesh, adj, static_cast<int>(v), scratch);
      counts[v + 1] = static_cast<int>(scratch.size());
    }
  });
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<Edge> edges(counts.back());
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<int> scratch;
    for (std::size_t v = lo; v < hi; ++v) {
      upper_neighbours(mesh, adj, static_cast<int>(v), scratch);
      int slot = counts[v];
      for (int u : scratch) edges[slot++] = {static_cast<int>(v), u};
    }
  });
  return edges;
}

TriMesh slice_batch(const BatchedMesh& batch, std::size_t b) {
  if (b >= batch.batch_size()) throw MeshError("batch index out of range");
  const int v0 = batch.vertex_offsets[b], v1 = batch.vertex_offsets[b + 1];
  const int f0 = batch.facet_offsets[b], f1 = batch.facet_offsets[b + 1];
  TriMesh out;
  out.positions.assign(batch.mesh.positions.begin() + v0, batch.mesh.positions.begin() + v1);
  out.features = batch.mesh.features.middleRows(v0, v1 - v0);
  out.facets.reserve(static_cast<std::size_t>(f1 - f0));
  for (int f = f0; f < f1; ++f) {
    Facet t = batch.mesh.facets[f];
    for (int& v : t) v -= v0;
    out.facets.push_back(t);
  }
  return out;
}

TopologyReport analyze_topology(const TriMesh& mesh) {
  validate(mesh, false);
  TopologyReport report;
  const auto geometry = compute_facet_geometry(mesh);
  for (const auto& g : geometry) report.degenerate_facets += g.degenerate ? 1 : 0;

  std::vector<Facet> keys = mesh.facets;
  for (Facet& k : keys) std::sort(k.begin(), k.end());
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 1; i < keys.size(); ++i) report.duplicate_facets += keys[i] == keys[i - 1] ? 1 : 0;

  DisjointSets sets(mesh.num_vertices());
  std::vector<char> referenced(mesh.num_vertices(), 0);
  for (const Facet& t : mesh.facets) {
    sets.unite(t[0], t[1]);
    sets.unite(t[1], t[2]);
    for (int v : t) referenced[v] = 1;
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!referenced[v])
      ++report.isolated_vertices;
    else if (sets.find(static_cast<int>(v)) == static_cast<int>(v))
      ++report.components;
  }
  return report;
}

}  // namespace meshforge
