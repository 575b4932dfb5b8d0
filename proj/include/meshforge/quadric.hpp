#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// Quadric error form (A, b, c): error(x) = x^T A x + 2 b^T x + c.
struct Quadric {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Vec3 b = Vec3::Zero();
  double c = 0.0;

  double error(const Vec3& x) const { return x.dot(A * x) + 2.0 * b.dot(x) + c; }

  Quadric& operator+=(const Quadric& o) {
    A += o.A;
    b += o.b;
    c += o.c;
    return *this;
  }
  friend Quadric operator+(Quadric l, const Quadric& r) { return l += r; }
};

enum class Placement {
  /// Centroid of the contracted vertices.
  average,
  /// Minimiser -A^{-1} b, falling back to the centroid for ill-conditioned A.
  inverse,
};

/// Below this reciprocal condition number A is treated as singular.
inline constexpr double kMinReciprocalCondition = 1e-10;

/// (n n^T, d n, d^2). A degenerate facet yields the zero quadric.
Quadric facet_quadric(const FacetGeometry& geometry);

std::vector<Quadric> facet_quadrics(std::span<const FacetGeometry> geometry);

/// Sum of the quadrics of the facets around v; zero for an isolated vertex.
Quadric vertex_quadric(int v, const VertexFacetAdjacency& adjacency, std::span<const Quadric> facet_quadrics);

std::vector<Quadric> vertex_quadrics(const VertexFacetAdjacency& adjacency, std::span<const Quadric> facet_quadrics);

/// Reciprocal condition number of the symmetric matrix A (|lambda|min / |lambda|max).
double reciprocal_condition(const Eigen::Matrix3d& A);

/// -A^{-1} b when A is well conditioned.
std::optional<Vec3> quadric_minimizer(const Quadric& q);

struct PairCost {
  double cost = 0.0;
  Vec3 target = Vec3::Zero();
};

/// Contraction target for a vertex set with summed quadric q and the given
/// member centroid, and the quadric error at that target.
PairCost contraction_cost(const Quadric& q, const Vec3& centroid, Placement rule);

PairCost pair_cost(const Quadric& qi, const Quadric& qj, const Vec3& pi, const Vec3& pj, Placement rule);

PairCost pair_cost(const Edge& pair, std::span<const Quadric> vertex_quadrics, std::span<const Vec3> positions,
                   Placement rule);

}  // namespace meshforge
