#include "meshforge/synthetic.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace meshforge {

TriMesh icosphere(int subdivisions) {
  if (subdivisions < 0) throw std::invalid_argument("subdivision level must be non-negative");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  for (const auto& p : {Vec3(-1, t, 0), Vec3(1, t, 0), Vec3(-1, -t, 0), Vec3(1, -t, 0), Vec3(0, -1, t), Vec3(0, 1, t),
                        Vec3(0, -1, -t), Vec3(0, 1, -t), Vec3(t, 0, -1), Vec3(t, 0, 1), Vec3(-t, 0, -1), Vec3(-t, 0, 1)})
    m.positions.push_back(p.normalized());
  m.facets = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
              {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
              {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      m.positions.push_back((m.positions[a] + m.positions[b]).normalized());
      const int id = static_cast<int>(m.positions.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Facet> next;
    next.reserve(m.facets.size() * 4);
    for (const Facet& f : m.facets) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.facets = std::move(next);
  }
  m.features = position_features(m.positions);
  return m;
}

TriMesh perturbed_grid(int nx, int ny, double amplitude, std::uint64_t seed) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs at least 2 x 2 vertices");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-amplitude, amplitude);
  TriMesh m;
  m.positions.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m.positions.emplace_back(i, j, amplitude > 0 ? jitter(rng) : 0.0);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
      if ((i + j) % 2 == 0) {
        m.facets.push_back({a, b, d});
        m.facets.push_back({a, d, c});
      } else {
        m.facets.push_back({a, b, c});
        m.facets.push_back({b, d, c});
      }
    }
  m.features = position_features(m.positions);
  return m;
}

TriMesh torus_grid(int nu, int nv, double amplitude, std::uint64_t seed) {
  if (nu < 3 || nv < 3) throw std::invalid_argument("torus needs at least 3 x 3 vertices");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-amplitude, amplitude);
  constexpr double big = 3.0, small = 1.0;
  TriMesh m;
  m.positions.reserve(static_cast<std::size_t>(nu) * nv);
  for (int u = 0; u < nu; ++u) {
    const double a = 2.0 * std::numbers::pi * u / nu;
    for (int v = 0; v < nv; ++v) {
      const double b = 2.0 * std::numbers::pi * v / nv;
      const double r = small * (1.0 + (amplitude > 0 ? jitter(rng) : 0.0));
      m.positions.emplace_back((big + r * std::cos(b)) * std::cos(a), (big + r * std::cos(b)) * std::sin(a),
                               r * std::sin(b));
    }
  }
  auto id = [&](int u, int v) { return ((u + nu) % nu) * nv + (v + nv) % nv; };
  m.facets.reserve(2 * m.positions.size());
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) {
      const int a = id(u, v), b = id(u + 1, v), c = id(u, v + 1), d = id(u + 1, v + 1);
      m.facets.push_back({a, b, d});
      m.facets.push_back({a, d, c});
    }
  m.features = position_features(m.positions);
  return m;
}

TriMesh synthetic_mesh(int vertices, std::uint64_t seed) {
  if (vertices < 18) throw std::invalid_argument("synthetic mesh needs at least 18 vertices");
  const int nv = std::max(3, static_cast<int>(std::lround(std::sqrt(vertices / 2.0))));
  const int nu = std::max(3, static_cast<int>(std::lround(static_cast<double>(vertices) / nv)));
  return torus_grid(nu, nv, 0.05, seed);
}

TriMesh random_small_mesh(std::uint64_t seed, int channels, bool refine) {
  TriMesh m = icosphere(refine ? 1 : 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15), value(-1.0, 1.0);
  for (Vec3& p : m.positions) p += Vec3(jitter(rng), jitter(rng), jitter(rng));
  m.features.resize(static_cast<Eigen::Index>(m.num_vertices()), channels);
  for (Eigen::Index i = 0; i < m.features.size(); ++i) m.features.data()[i] = value(rng);
  return m;
}

}  // namespace meshforge
