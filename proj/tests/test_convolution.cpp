#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "meshforge/checkpoint.hpp"
#include "meshforge/conv.hpp"
#include "meshforge/gradcheck.hpp"
#include "meshforge/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace meshforge;

namespace {

template <typename T = double>
DepthwiseKernel<T> random_kernel(int filters, int channels, int lambda, std::mt19937_64& rng) {
  auto k = DepthwiseKernel<T>::zeros(filters, channels, lambda);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Eigen::Index i = 0; i < k.weights.size(); ++i) k.weights.data()[i] = static_cast<T>(u(rng));
  return k;
}

Tensor<double> random_tensor(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor<double> t(r, c);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

std::vector<std::vector<Barycentric>> samples_of(const BarycentricPlan& plan) {
  std::vector<std::vector<Barycentric>> out;
  for (std::size_t f = 0; f < plan.num_facets(); ++f) out.emplace_back(plan.of(f).begin(), plan.of(f).end());
  return out;
}

}  // namespace

// ------------------------------------------------------------ barycentric plans

TEST_CASE("interpolation counts from the area rule") {
  const std::vector<double> areas{1.0, 2.0, 4.0};
  const BarycentricPlan p = build_barycentric_plan(areas);
  CHECK(p.order == std::vector<int>{1, 1, 2});
  CHECK(p.of(0).size() == 1);
  CHECK(p.of(2).size() == 3);
  CHECK(p.of(0)[0][0] == doctest::Approx(1.0 / 3.0));

  const BarycentricPlan scaled = build_barycentric_plan(areas, 4, 1, InterpolationCount::scaled_floor);
  CHECK(scaled.order == std::vector<int>{1, 2, 5});

  const std::vector<double> flat{3.0, 3.0};
  CHECK(build_barycentric_plan(flat, 1, 2).order == std::vector<int>{2, 2});
  CHECK_THROWS_AS(build_barycentric_plan(areas, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_barycentric_plan(areas, 1, 0), std::invalid_argument);
  const std::vector<double> negative{-1.0, 1.0};
  CHECK_THROWS_AS(build_barycentric_plan(negative), std::invalid_argument);
}

TEST_CASE("lattice with k = 3 has six symmetric points") {
  const auto l = barycentric_lattice(3);
  REQUIRE(l.size() == 6);
  std::set<std::array<long, 3>> points;
  for (const auto& xi : l) {
    CHECK(std::abs(xi[0] + xi[1] + xi[2] - 1.0) < 1e-12);
    for (double v : xi) CHECK(v >= 0.0);
    points.insert({std::lround(xi[0] * 2), std::lround(xi[1] * 2), std::lround(xi[2] * 2)});
  }
  // permuting the corners maps the set onto itself
  for (const auto& p : points) {
    std::array<long, 3> q = p;
    std::sort(q.begin(), q.end());
    do CHECK(points.count(q) == 1);
    while (std::next_permutation(q.begin(), q.end()));
  }
  for (int k = 1; k <= 8; ++k) CHECK(barycentric_lattice(k).size() == static_cast<std::size_t>(k * (k + 1) / 2));
}

// ------------------------------------------------------------ mixture

TEST_CASE("default sphere means") {
  const auto six = default_sphere_means(6);
  CHECK(six[0] == Vec3(1, 0, 0));
  CHECK(six[1] == Vec3(-1, 0, 0));
  CHECK(six[5] == Vec3(0, 0, -1));
  const auto m18 = default_sphere_means(18);
  REQUIRE(m18.size() == 18);
  double min_angle = 180.0;
  for (std::size_t i = 0; i < m18.size(); ++i) {
    CHECK(std::abs(m18[i].norm() - 1.0) < 1e-12);
    for (std::size_t j = i + 1; j < m18.size(); ++j) {
      const double d = m18[i].dot(m18[j]);
      bool known = false;
      for (double v : {0.0, 0.5, -0.5, 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2, -1.0})
        known = known || std::abs(d - v) < 1e-12;
      CHECK(known);
      min_angle = std::min(min_angle, std::acos(std::clamp(d, -1.0, 1.0)) * 180.0 / std::numbers::pi);
    }
  }
  CHECK(min_angle == doctest::Approx(45.0));
  for (int t : {1, 7, 32}) {
    const auto m = default_sphere_means(t);
    CHECK(m.size() == static_cast<std::size_t>(t));
    for (const Vec3& v : m) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(default_sphere_means(0), std::invalid_argument);
}

TEST_CASE("fuzzy coefficients") {
  std::vector<Vec3> normals{Vec3(0, 0, 1), Vec3::Zero(), Vec3(1, 1, 0).normalized()};
  SphereGMM one = SphereGMM::regular(1);
  const Tensor<double> p1 = gmm_coefficients(normals, one);
  for (int i = 0; i < 3; ++i) CHECK(p1(i, 0) == 1.0);

  // n on mu_0, all other means at the same distance z
  SphereGMM g = SphereGMM::regular(6, 0.5);
  const std::vector<Vec3> on_axis{Vec3(1, 0, 0)};
  const Tensor<double> p = gmm_coefficients(on_axis, g);
  const double z_side = 2.0 / 0.25, z_back = 4.0 / 0.25;
  const double expected = 1.0 / (1.0 + 4.0 * std::exp(-z_side) + std::exp(-z_back));
  CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-12));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<Vec3> many;
  for (int i = 0; i < 200; ++i) many.push_back(Vec3(nd(rng), nd(rng), nd(rng)).normalized());
  many.push_back(Vec3::Zero());
  SphereGMM g18 = SphereGMM::regular(18);
  const Tensor<double> pi = gmm_coefficients(many, g18);
  const auto ref = oracle::softmax_coefficients(many, g18.means, g18.sigmas);
  CHECK(oracle::max_abs_diff(oracle::to_mat(pi), ref) < 1e-12);
  for (Eigen::Index i = 0; i < pi.rows(); ++i) {
    CHECK(std::abs(pi.row(i).sum() - 1.0) < 1e-9);
    CHECK(pi.row(i).minCoeff() > 0.0);
  }
  CHECK(pi(200, 3) == doctest::Approx(1.0 / 18));

  SphereGMM bad = g18;
  bad.sigmas[2] = 0.0;
  CHECK_THROWS_AS(gmm_coefficients(many, bad), std::invalid_argument);
  bad = g18;
  bad.means[0] *= 2.0;
  CHECK_THROWS_AS(gmm_coefficients(many, bad), std::invalid_argument);
}

// ------------------------------------------------------------ forwards against scalar loops

TEST_CASE("forwards equal the scalar loops on the fixture corpus") {
  std::mt19937_64 rng(2024);
  for (auto& [name, mesh] : fixtures::corpus()) {
    CAPTURE(name);
    REQUIRE(mesh.num_facets() <= 10);
    const MeshTopology topo = MeshTopology::of(mesh);
    for (int lambda : {1, 2}) {
      const Tensor<double> I = random_tensor(static_cast<Eigen::Index>(mesh.num_vertices()), 3, rng);
      const auto plan = build_barycentric_plan(facet_areas(mesh), 2, 1);
      const auto k3 = random_kernel(3, 3, lambda, rng);
      const auto J = vertex2facet_forward(topo, I, k3, plan);
      const auto Jref = oracle::vertex2facet(mesh, oracle::to_mat(I), oracle::to_mat(k3.weights), lambda, samples_of(plan));
      CHECK(oracle::max_abs_diff(oracle::to_mat(J), Jref) < 1e-9);

      // facet2vertex
      SphereGMM g = SphereGMM::regular(6, 0.6);
      const auto normals = facet_normals(mesh);
      const Tensor<double> pi = gmm_coefficients(normals, g);
      const Tensor<double> Jf = random_tensor(static_cast<Eigen::Index>(mesh.num_facets()), 2, rng);
      const auto kt = random_kernel(6, 2, lambda, rng);
      const auto out = facet2vertex_forward(FacetGather::per_vertex(topo), Jf, kt, pi);
      const auto ref = oracle::facet2vertex(mesh, oracle::to_mat(Jf), oracle::to_mat(kt.weights), lambda, oracle::to_mat(pi));
      CHECK(oracle::max_abs_diff(oracle::to_mat(out), ref) < 1e-9);

      // facet2facet
      TexturedFacetFeatures<double> tex;
      std::vector<std::vector<Barycentric>> coords;
      std::vector<oracle::Mat> feats;
      std::uniform_int_distribution<int> count(1, 4);
      std::uniform_real_distribution<double> u(0, 1);
      for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        coords.emplace_back();
        feats.emplace_back();
        for (int s = count(rng); s > 0; --s) {
          double a = u(rng), b = u(rng) * (1 - a);
          coords.back().push_back({a, b, 1 - a - b});
          feats.back().push_back({u(rng), u(rng)});
        }
        for (std::size_t s = 0; s < coords.back().size(); ++s) tex.coords.push_back(coords.back()[s]);
        tex.offsets.push_back(static_cast<int>(tex.coords.size()));
      }
      tex.features.resize(static_cast<Eigen::Index>(tex.coords.size()), 2);
      Eigen::Index row = 0;
      for (const auto& fm : feats)
        for (const auto& r : fm) tex.features.row(row++) << r[0], r[1];
      const auto k2 = random_kernel(3, 2, lambda, rng);
      const auto Jt = facet2facet_forward(tex, k2);
      CHECK(oracle::max_abs_diff(oracle::to_mat(Jt), oracle::facet2facet(coords, feats, oracle::to_mat(k2.weights), lambda)) < 1e-9);
    }
  }
}

TEST_CASE("vertex2facet closed forms") {
  const TriMesh m = fixtures::single_triangle();
  const MeshTopology topo = MeshTopology::of(m);
  std::mt19937_64 rng(3);
  // constant features, equal filters: J = w * I for any plan
  auto k = DepthwiseKernel<double>::zeros(3, 2, 1);
  k.weights.row(0) << 0.7, -0.2;
  k.weights.row(1) = k.weights.row(0);
  k.weights.row(2) = k.weights.row(0);
  Tensor<double> I(3, 2);
  I << 1.5, 2.0, 1.5, 2.0, 1.5, 2.0;
  for (int beta : {1, 2, 5}) {
    const auto J = vertex2facet_forward(topo, I, k, build_barycentric_plan(std::vector<double>{0.5}, 1, beta));
    CHECK(J(0, 0) == doctest::Approx(0.7 * 1.5));
    CHECK(J(0, 1) == doctest::Approx(-0.2 * 2.0));
  }
  // centroid: mean filter times mean feature
  const auto kr = random_kernel(3, 1, 1, rng);
  const Tensor<double> Ir = random_tensor(3, 1, rng);
  const auto J = vertex2facet_forward(topo, Ir, kr, build_barycentric_plan(std::vector<double>{0.5}));
  CHECK(J(0, 0) == doctest::Approx(kr.weights.col(0).mean() * Ir.col(0).mean()).epsilon(1e-12));
  CHECK_THROWS_AS(vertex2facet_forward(topo, random_tensor(3, 2, rng), kr,
                                       build_barycentric_plan(std::vector<double>{0.5})),
                  std::invalid_argument);
}

TEST_CASE("facet2facet closed forms") {
  TexturedFacetFeatures<double> tex;
  tex.coords = {{1, 0, 0}};
  tex.offsets = {0, 1};
  tex.features.resize(1, 2);
  tex.features << 0.3, -0.4;
  auto k = DepthwiseKernel<double>::zeros(3, 2, 1);
  k.weights << 1, 2, 3, 4, 5, 6;
  const auto J = facet2facet_forward(tex, k);
  CHECK(J(0, 0) == doctest::Approx(0.3));
  CHECK(J(0, 1) == doctest::Approx(-0.8));
  TexturedFacetFeatures<double> empty;
  empty.offsets = {0, 0};
  empty.features.resize(0, 2);
  CHECK_THROWS_AS(facet2facet_forward(empty, k), std::invalid_argument);
}

TEST_CASE("facet2vertex closed forms") {
  const TriMesh m = fixtures::single_triangle();
  const MeshTopology topo = MeshTopology::of(m);
  auto k = DepthwiseKernel<double>::zeros(3, 1, 1);
  k.weights << 2, 3, 5;
  Tensor<double> pi(1, 3);
  pi << 0, 1, 0;
  Tensor<double> J(1, 1);
  J << 0.25;
  const auto out = facet2vertex_forward(FacetGather::per_vertex(topo), J, k, pi);
  for (int v = 0; v < 3; ++v) CHECK(out(v, 0) == doctest::Approx(0.75));

  // equal inputs everywhere: output w * J regardless of valence
  const TriMesh o = fixtures::octahedron();
  const MeshTopology ot = MeshTopology::of(o);
  auto ke = DepthwiseKernel<double>::zeros(6, 1, 2);
  ke.weights.col(0).setConstant(0.5);
  ke.weights.col(1).setConstant(-1.5);
  const Tensor<double> opi = gmm_coefficients(facet_normals(o), SphereGMM::regular(6));
  const Tensor<double> Jc = Tensor<double>::Constant(8, 1, 2.0);
  const auto oc = facet2vertex_forward(FacetGather::per_vertex(ot), Jc, ke, opi);
  for (Eigen::Index v = 0; v < 6; ++v) {
    CHECK(oc(v, 0) == doctest::Approx(1.0));
    CHECK(oc(v, 1) == doctest::Approx(-3.0));
  }
}

TEST_CASE("facet2vertex gathers flag empty rows and support strided output") {
  TriMesh m = fixtures::small_grid();
  m.positions.emplace_back(5, 5, 5);
  m.features = position_features(m.positions);
  const MeshTopology topo = MeshTopology::of(m);
  const FacetGather g = FacetGather::per_vertex(topo);
  CHECK(g.empty_rows() == std::vector<int>{9});

  std::mt19937_64 rng(5);
  const auto k = random_kernel(6, 2, 1, rng);
  const Tensor<double> pi = gmm_coefficients(facet_normals(m), SphereGMM::regular(6));
  const Tensor<double> J = random_tensor(8, 2, rng);
  const auto out = facet2vertex_forward(g, J, k, pi);
  CHECK(out.row(9).isZero());

  // strided onto two rows: row r averages every facet incidence of its members
  const std::vector<int> rows{0, 0, 0, 1, 1, 1, -1, -1, -1, -1};
  const FacetGather s = FacetGather::strided(topo, rows, 2);
  const auto so = facet2vertex_forward(s, J, k, pi);
  const Tensor<double> per_facet = facet2vertex_forward(FacetGather::per_vertex(topo), J, k, pi);
  Tensor<double> expect = Tensor<double>::Zero(2, 2);
  int counts[2] = {0, 0};
  const auto adj = vertex_facet_adjacency(m);
  const Tensor<double> w_eff = pi * k.weights;
  for (int v = 0; v < 6; ++v)
    for (int f : adj.of(v)) {
      expect.row(rows[v]) += w_eff.row(f).cwiseProduct(J.row(f));
      ++counts[rows[v]];
    }
  expect.row(0) /= counts[0];
  expect.row(1) /= counts[1];
  CHECK((so - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(per_facet.rows() == 10);
}

TEST_CASE("degenerate facets: uniform coefficients, optionally excluded") {
  TriMesh m = fixtures::two_triangles();
  m.positions[2] = Vec3(2, 0, 0);  // facet 0 collinear
  m.features = position_features(m.positions);
  const auto normals = facet_normals(m);
  CHECK(normals[0] == Vec3::Zero());
  const Tensor<double> pi = gmm_coefficients(normals, SphereGMM::regular(6));
  CHECK(pi(0, 2) == doctest::Approx(1.0 / 6));
  const MeshTopology topo = MeshTopology::of(m);
  const std::vector<char> degenerate{1, 0};
  const FacetGather skip = FacetGather::per_vertex(topo, degenerate);
  CHECK(skip.count(0) == 1);
  CHECK(skip.count(2) == 0);
  CHECK(FacetGather::per_vertex(topo).count(0) == 2);
}

TEST_CASE("vertex2vertex composes the two stages") {
  const TriMesh m = fixtures::single_triangle();
  const MeshTopology topo = MeshTopology::of(m);
  std::mt19937_64 rng(12);
  VertexToVertex<double> conv{random_kernel(3, 2, 2, rng), random_kernel(6, 4, 1, rng)};
  const auto plan = build_barycentric_plan(facet_areas(m), 1, 2);
  const Tensor<double> pi = gmm_coefficients(facet_normals(m), SphereGMM::regular(6));
  const Tensor<double> I = random_tensor(3, 2, rng);
  const auto state = vertex2vertex_forward(topo, FacetGather::per_vertex(topo), plan, pi, conv, I);

  // by hand: one facet, three lattice points at the corners
  Eigen::RowVectorXd J = Eigen::RowVectorXd::Zero(4);
  for (int s = 0; s < 3; ++s)
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < 2; ++l) J(c * 2 + l) += conv.to_facet.weights(s, c * 2 + l) * I(s, c) / 3.0;
  const Eigen::RowVectorXd weff = pi.row(0) * conv.to_vertex.weights;
  for (int v = 0; v < 3; ++v) CHECK((state.output.row(v) - weff.cwiseProduct(J)).norm() < 1e-12);

  // constant features and equal filters stay constant
  VertexToVertex<double> flat{DepthwiseKernel<double>::zeros(3, 1, 1), DepthwiseKernel<double>::zeros(6, 1, 1)};
  flat.to_facet.weights.setConstant(2.0);
  flat.to_vertex.weights.setConstant(0.5);
  const TriMesh o = fixtures::octahedron();
  const MeshTopology ot = MeshTopology::of(o);
  const auto out = vertex2vertex_forward(ot, FacetGather::per_vertex(ot), build_barycentric_plan(facet_areas(o)),
                                         Tensor<double>(gmm_coefficients(facet_normals(o), SphereGMM::regular(6))), flat,
                                         Tensor<double>(Tensor<double>::Constant(6, 1, 3.0)))
                       .output;
  CHECK((out.array() - 3.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("forwards are linear in the features") {
  std::mt19937_64 rng(21);
  const TriMesh m = random_small_mesh(4, 3, true);
  const MeshTopology topo = MeshTopology::of(m);
  const auto plan = build_barycentric_plan(facet_areas(m), 2, 2);
  const auto k = random_kernel(3, 3, 2, rng);
  const Tensor<double> X = random_tensor(42, 3, rng), Y = random_tensor(42, 3, rng);
  const double a = 0.7, b = -1.3;
  const Tensor<double> lhs = vertex2facet_forward(topo, Tensor<double>(a * X + b * Y), k, plan);
  const Tensor<double> rhs = a * vertex2facet_forward(topo, X, k, plan) + b * vertex2facet_forward(topo, Y, k, plan);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);

  const auto kt = random_kernel(6, 3, 1, rng);
  const Tensor<double> pi = gmm_coefficients(facet_normals(m), SphereGMM::regular(6));
  const FacetGather g = FacetGather::per_vertex(topo);
  const Tensor<double> FX = random_tensor(80, 3, rng), FY = random_tensor(80, 3, rng);
  const Tensor<double> l2 = facet2vertex_forward(g, Tensor<double>(a * FX + b * FY), kt, pi);
  const Tensor<double> r2 = a * facet2vertex_forward(g, FX, kt, pi) + b * facet2vertex_forward(g, FY, kt, pi);
  CHECK((l2 - r2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("facet2vertex: translation and scale invariant, not rotation invariant") {
  TriMesh m = random_small_mesh(31, 2, true);
  const MeshTopology topo = MeshTopology::of(m);
  std::mt19937_64 rng(6);
  const auto k = random_kernel(18, 2, 1, rng);
  const Tensor<double> J = random_tensor(80, 2, rng);
  const SphereGMM g = SphereGMM::regular(18);
  auto eval = [&](const TriMesh& mm) {
    return facet2vertex_forward(FacetGather::per_vertex(topo), J, k,
                                Tensor<double>(gmm_coefficients(facet_normals(mm), g)));
  };
  // dyadic positions so that translation and doubling are exact
  for (Vec3& p : m.positions)
    for (int a = 0; a < 3; ++a) p[a] = std::round(p[a] * 1024.0) / 1024.0;
  const Tensor<double> base = eval(m);
  TriMesh moved = m, scaled = m, rotated = m;
  for (Vec3& p : moved.positions) p += Vec3(3, -5, 8);
  for (Vec3& p : scaled.positions) p *= 4.0;
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  for (Vec3& p : rotated.positions) p = R * p;
  CHECK(eval(moved) == base);
  CHECK(eval(scaled) == base);
  CHECK((eval(rotated) - base).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("zero upstream gives zero gradients") {
  std::mt19937_64 rng(2);
  const TriMesh m = random_small_mesh(1, 2, false);
  const MeshTopology topo = MeshTopology::of(m);
  const auto plan = build_barycentric_plan(facet_areas(m));
  const auto k = random_kernel(3, 2, 2, rng);
  const auto g = vertex2facet_backward(topo, Tensor<double>(m.features), k, plan, Tensor<double>(Tensor<double>::Zero(20, 4)));
  CHECK(g.features.isZero());
  CHECK(g.weights.isZero());
  const auto kt = random_kernel(6, 2, 1, rng);
  SphereGMM gmm = SphereGMM::regular(6);
  gmm.train_means = true;
  const auto f2v = facet2vertex_backward(FacetGather::per_vertex(topo), random_tensor(20, 2, rng), kt,
                                         facet_normals(m), gmm, Tensor<double>(Tensor<double>::Zero(12, 2)));
  CHECK(f2v.features.isZero());
  CHECK(f2v.weights.isZero());
  for (double s : f2v.mixture.sigmas) CHECK(s == 0.0);
  for (const Vec3& mu : f2v.mixture.means) CHECK(mu.isZero());
}

TEST_CASE("single component: sigma gradient vanishes; flags gate the mixture gradients") {
  std::mt19937_64 rng(3);
  const TriMesh m = random_small_mesh(2, 2, false);
  const MeshTopology topo = MeshTopology::of(m);
  SphereGMM one = SphereGMM::regular(1);
  const auto k = random_kernel(1, 2, 1, rng);
  const auto g = facet2vertex_backward(FacetGather::per_vertex(topo), random_tensor(20, 2, rng), k, facet_normals(m),
                                       one, random_tensor(12, 2, rng));
  REQUIRE(g.mixture.sigmas.size() == 1);
  CHECK(std::abs(g.mixture.sigmas[0]) < 1e-14);
  CHECK(g.mixture.means.empty());
}

TEST_CASE("single-facet finite difference on I_1") {
  const TriMesh m = fixtures::single_triangle();
  const MeshTopology topo = MeshTopology::of(m);
  std::mt19937_64 rng(9);
  const auto k = random_kernel(3, 1, 1, rng);
  const auto plan = build_barycentric_plan(facet_areas(m), 1, 3);
  Tensor<double> I = random_tensor(3, 1, rng);
  const auto g = vertex2facet_backward(topo, I, k, plan, Tensor<double>(Tensor<double>::Ones(1, 1)));
  const double h = 1e-5, saved = I(0, 0);
  I(0, 0) = saved + h;
  const double plus = vertex2facet_forward(topo, I, k, plan)(0, 0);
  I(0, 0) = saved - h;
  const double minus = vertex2facet_forward(topo, I, k, plan)(0, 0);
  CHECK(relative_error(g.features(0, 0), (plus - minus) / (2 * h)) < 1e-4);
}

TEST_CASE("gradient harness, double path") {
  GradcheckOptions opt;
  opt.cases = 10;
  const auto results = run_gradchecks(opt);
  CHECK(results.size() == 17);
  for (const auto& r : results) {
    CAPTURE(r.op);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(r.entries > 0);
  }
}

TEST_CASE("gradient harness, zero-channel features give exact zeros") {
  GradcheckOptions opt;
  opt.cases = 2;
  opt.channels = 0;
  for (const auto& r : run_gradchecks(opt)) CHECK(r.max_relative_error == 0.0);
}

TEST_CASE("gradient harness, float path at eps 1e-3") {
  GradcheckOptions opt;
  opt.cases = 20;
  opt.single_precision = true;
  opt.eps = 1e-3;
  for (const auto& r : run_gradchecks(opt)) {
    CAPTURE(r.op);
    // mixture parameters sum float rounding over every vertex; see README
    const bool mixture = r.op == "facet2vertex.sigmas" || r.op == "facet2vertex.means";
    CHECK(r.max_relative_error < (mixture ? 5e-2 : 1e-2));
  }
}

TEST_CASE("float and double paths agree") {
  std::mt19937_64 rng(77);
  const TriMesh m = random_small_mesh(8, 3, true);
  const MeshTopology topo = MeshTopology::of(m);
  const auto plan = build_barycentric_plan(facet_areas(m), 2, 1);
  const auto kd = random_kernel(3, 3, 2, rng);
  DepthwiseKernel<float> kf{kd.filters, kd.channels, kd.multiplier, kd.weights.cast<float>()};
  const Tensor<double> I = m.features;
  const auto Jd = vertex2facet_forward(topo, I, kd, plan);
  const auto Jf = vertex2facet_forward(topo, Tensor<float>(I.cast<float>()), kf, plan);
  CHECK((Jd - Jf.cast<double>()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("pointwise layer") {
  Tensor<double> x(2, 2), w(2, 3);
  x << 1, 2, 3, 4;
  w << 1, 0, -1, 0, 1, 2;
  const auto y = pointwise_forward(x, w);
  CHECK(y(1, 2) == doctest::Approx(5.0));
  CHECK_THROWS_AS(pointwise_forward(w, w), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(4);
  Checkpoint ck;
  ck.channels = 3;
  ck.multiplier = 2;
  const auto k = random_kernel(3, 3, 2, rng);
  SphereGMM g = SphereGMM::regular(18);
  g.sigmas[4] = 0.31;
  ck.put_kernel("v2f", k);
  ck.put_gmm(g);
  const auto path = std::filesystem::temp_directory_path() / "meshforge_test.ckpt";
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.components == 18);
  CHECK(back.channels == 3);
  CHECK(back.multiplier == 2);
  const auto kb = back.get_kernel<double>("v2f");
  CHECK(kb.weights == k.weights);
  CHECK(kb.channels == 3);
  const SphereGMM gb = back.get_gmm();
  CHECK(gb.sigmas == g.sigmas);
  CHECK(gb.means == g.means);
  CHECK_THROWS_AS(back.get("missing"), std::out_of_range);

  {
    std::ofstream junk(path, std::ios::binary);
    junk << "nope";
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}
