#pragma once

#include <string>
#include <utility>
#include <vector>

#include "meshforge/mesh.hpp"

namespace fixtures {

using meshforge::Facet;
using meshforge::TriMesh;
using meshforge::Vec3;

inline TriMesh make(std::vector<Vec3> p, std::vector<Facet> f) {
  TriMesh m;
  m.positions = std::move(p);
  m.facets = std::move(f);
  m.features = meshforge::position_features(m.positions);
  return m;
}

inline TriMesh single_triangle() { return make({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}); }

// shared edge 0-1; apex 3 lifted off the plane
inline TriMesh two_triangles() {
  return make({{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, -1, 0.25}}, {{0, 1, 2}, {1, 0, 3}});
}

inline TriMesh two_disjoint_triangles() {
  return make({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 1}}, {{0, 1, 2}, {3, 4, 5}});
}

// six-vertex toy mesh, vertices a..f = 0..5; pairs (c,e), (a,f) come first
inline TriMesh six_vertex() {
  return make({{0, 4, 0}, {4, 1, 0}, {4, 4, 3}, {1, 1, 2}, {4, 4, 1}, {0, 4, 2}},
              {{0, 1, 5}, {0, 2, 3}, {0, 2, 4}, {0, 4, 5}, {2, 3, 4}});
}

inline TriMesh tetrahedron() {
  return make({{0, 0, 0}, {1, 0, 0}, {0.2, 1, 0}, {0.3, 0.3, 1}}, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}});
}

inline TriMesh octahedron() {
  return make({{1, 0, 0}, {-1, 0, 0}, {0, 1.2, 0}, {0, -1, 0}, {0.1, 0, 0.9}, {0, 0.2, -1}},
              {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}});
}

// 3 x 3 height field, 8 facets
inline TriMesh small_grid() {
  std::vector<Vec3> p;
  const double z[9] = {0, 0.1, -0.05, 0.2, 0.3, 0.0, -0.1, 0.15, 0.05};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) p.emplace_back(i, j * 1.1, z[j * 3 + i]);
  std::vector<Facet> f;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      const int a = j * 3 + i, b = a + 1, c = a + 3, d = c + 1;
      f.push_back({a, b, d});
      f.push_back({a, d, c});
    }
  return make(std::move(p), std::move(f));
}

/// Every fixture has at most 10 facets.
inline std::vector<std::pair<std::string, TriMesh>> corpus() {
  return {{"single_triangle", single_triangle()}, {"two_triangles", two_triangles()},
          {"two_disjoint", two_disjoint_triangles()}, {"six_vertex", six_vertex()},
          {"tetrahedron", tetrahedron()},         {"octahedron", octahedron()},
          {"small_grid", small_grid()}};
}

}  // namespace fixtures
