#include "meshforge/quadric.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "meshforge/parallel.hpp"

namespace meshforge {

Quadric facet_quadric(const FacetGeometry& g) {
  Quadric q;
  if (g.degenerate) return q;
  q.A = g.normal * g.normal.transpose();
  q.b = g.intercept * g.normal;
  q.c = g.intercept * g.intercept;
  return q;
}

std::vector<Quadric> facet_quadrics(std::span<const FacetGeometry> geometry) {
  std::vector<Quadric> out(geometry.size());
  parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) out[f] = facet_quadric(geometry[f]);
  });
  return out;
}

Quadric vertex_quadric(int v, const VertexFacetAdjacency& adjacency, std::span<const Quadric> fq) {
  Quadric q;
  for (int f : adjacency.of(static_cast<std::size_t>(v))) q += fq[f];
  return q;
}

std::vector<Quadric> vertex_quadrics(const VertexFacetAdjacency& adjacency, std::span<const Quadric> fq) {
  std::vector<Quadric> out(adjacency.num_vertices());
  parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t v = lo; v < hi; ++v) out[v] = vertex_quadric(static_cast<int>(v), adjacency, fq);
  });
  return out;
}

double reciprocal_condition(const Eigen::Matrix3d& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
  eig.computeDirect(A, Eigen::EigenvaluesOnly);
  const Vec3 mags = eig.eigenvalues().cwiseAbs();
  const double hi = mags.maxCoeff();
  if (!(hi > 0.0)) return 0.0;
  return mags.minCoeff() / hi;
}

std::optional<Vec3> quadric_minimizer(const Quadric& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
  eig.compute(q.A);
  const Vec3 lambda = eig.eigenvalues();
  const double hi = lambda.cwiseAbs().maxCoeff();
  if (!(hi > 0.0) || lambda.cwiseAbs().minCoeff() / hi < kMinReciprocalCondition) return std::nullopt;
  const Eigen::Matrix3d& V = eig.eigenvectors();
  const Vec3 x = -(V * (V.transpose() * q.b).cwiseQuotient(lambda));
  if (!x.allFinite()) return std::nullopt;
  return x;
}

PairCost contraction_cost(const Quadric& q, const Vec3& centroid, Placement rule) {
  PairCost out;
  out.target = centroid;
  if (rule == Placement::inverse)
    if (auto x = quadric_minimizer(q)) out.target = *x;
  out.cost = q.error(out.target);
  return out;
}

PairCost pair_cost(const Quadric& qi, const Quadric& qj, const Vec3& pi, const Vec3& pj, Placement rule) {
  return contraction_cost(qi + qj, 0.5 * (pi + pj), rule);
}

PairCost pair_cost(const Edge& pair, std::span<const Quadric> vq, std::span<const Vec3> positions, Placement rule) {
  return pair_cost(vq[pair.first], vq[pair.second], positions[pair.first], positions[pair.second], rule);
}

}  // namespace meshforge
