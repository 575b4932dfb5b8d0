#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>
#include <sstream>

#include "meshforge/io.hpp"
#include "meshforge/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace meshforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "meshforge_io_test";
  fs::create_directories(dir);
  return dir / name;
}

TriMesh colored(TriMesh m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  FeatureMatrix f(static_cast<Eigen::Index>(m.num_vertices()), 6);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    f.row(static_cast<Eigen::Index>(i)).head<3>() = m.positions[i].transpose();
    for (int c = 0; c < 3; ++c) f(static_cast<Eigen::Index>(i), 3 + c) = 2.0 * byte(rng) / 255.0 - 1.0;
  }
  m.features = f;
  return m;
}

void check_same(const TriMesh& a, const TriMesh& b, double tol) {
  REQUIRE(a.num_vertices() == b.num_vertices());
  REQUIRE(a.facets == b.facets);
  for (std::size_t i = 0; i < a.num_vertices(); ++i) CHECK((a.positions[i] - b.positions[i]).norm() < tol);
  REQUIRE(a.channels() == b.channels());
}

}  // namespace

TEST_CASE("minimal OBJ") {
  std::istringstream in("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const TriMesh m = read_obj(in);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_facets() == 1);
  CHECK(m.channels() == 3);
  CHECK(m.facets[0] == Facet{0, 1, 2});
}

TEST_CASE("OBJ quads are fan-triangulated and negative indices resolve") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n");
  const TriMesh m = read_obj(in);
  REQUIRE(m.num_facets() == 2);
  CHECK(m.facets[0] == Facet{0, 1, 2});
  CHECK(m.facets[1] == Facet{0, 2, 3});
}

TEST_CASE("OBJ with slashes and colors") {
  std::istringstream in("v 0 0 0 1 0 0.5\nv 1 0 0 0 1 0\nv 0 1 0 1 1 1\nf 1/1/1 2/2/2 3//3\n");
  const TriMesh m = read_obj(in);
  REQUIRE(m.channels() == 6);
  CHECK(m.features(0, 3) == doctest::Approx(1.0));
  CHECK(m.features(0, 5) == doctest::Approx(0.0));
  CHECK(m.features(1, 3) == doctest::Approx(-1.0));
}

TEST_CASE("OBJ errors carry the line") {
  std::istringstream bad_number("v 0 0 0\nv 1 x 0\n");
  try {
    (void)read_obj(bad_number);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
    CHECK(e.unit() == ParseError::Unit::line);
  }
  std::istringstream bad_index("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 9\n");
  try {
    (void)read_obj(bad_index);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
    CHECK(std::string(e.what()).find("facet 1") != std::string::npos);
  }
}

TEST_CASE("PLY color 255 maps to 1") {
  std::istringstream in(
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nelement face 1\n"
      "property list uchar int vertex_indices\nend_header\n0 0 0 255 0 128\n1 0 0 0 0 0\n0 1 0 1 2 3\n3 0 1 2\n");
  const TriMesh m = read_ply(in);
  REQUIRE(m.channels() == 6);
  CHECK(m.features(0, 3) == 1.0);
  CHECK(m.features(0, 4) == -1.0);
  CHECK(m.features(0, 5) == doctest::Approx(2.0 * 128 / 255.0 - 1.0));
}

TEST_CASE("binary PLY truncated body reports a byte offset") {
  std::ostringstream out;
  write_ply(fixtures::six_vertex(), out);
  std::string data = out.str();
  data.resize(data.size() - 7);
  std::istringstream in(data);
  try {
    (void)read_ply(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.unit() == ParseError::Unit::byte);
  }
}

TEST_CASE("round trips") {
  const TriMesh plain = random_small_mesh(5, 0, true);
  TriMesh with_pos = plain;
  with_pos.features = position_features(with_pos.positions);
  const TriMesh rgb = colored(with_pos, 9);

  for (const char* ext : {".obj", ".ply"}) {
    CAPTURE(ext);
    const fs::path p = scratch(std::string("plain") + ext);
    save_mesh(with_pos, p);
    check_same(with_pos, load_mesh(p), 1e-6);

    const fs::path q = scratch(std::string("rgb") + ext);
    save_mesh(rgb, q);
    const TriMesh back = load_mesh(q);
    check_same(rgb, back, 1e-6);
    CHECK(has_color_channels(back));
    CHECK((back.features.rightCols(3) - rgb.features.rightCols(3)).cwiseAbs().maxCoeff() < 1e-6);
  }
  const fs::path a = scratch("ascii.ply");
  save_mesh(fixtures::six_vertex(), a, MeshFormat::ply, PlyEncoding::ascii);
  check_same(fixtures::six_vertex(), load_mesh(a), 1e-6);
}

TEST_CASE("saved files carry color fields only when present") {
  std::ostringstream obj;
  write_obj(fixtures::single_triangle(), obj);
  CHECK(obj.str().find("v 0 0 0\n") != std::string::npos);
  std::ostringstream ply;
  write_ply(colored(fixtures::single_triangle(), 1), ply, PlyEncoding::ascii);
  CHECK(ply.str().find("property uchar red") != std::string::npos);
}

TEST_CASE("unknown extension is a parse error") {
  CHECK_THROWS_AS(load_mesh("mesh.stl"), ParseError);
}

TEST_CASE("concat_batch") {
  const TriMesh t = fixtures::single_triangle();
  const std::vector<TriMesh> one{t};
  const BatchedMesh b1 = concat_batch(one);
  CHECK(b1.vertex_offsets == std::vector<int>{0, 3});

  const std::vector<TriMesh> two{t, t};
  const BatchedMesh b2 = concat_batch(two);
  CHECK(b2.mesh.facets[1] == Facet{3, 4, 5});
  CHECK(b2.facet_offsets == std::vector<int>{0, 1, 2});

  std::vector<TriMesh> many;
  for (std::uint64_t s = 0; s < 5; ++s) many.push_back(random_small_mesh(s, 3, s % 2 == 1));
  const BatchedMesh bm = concat_batch(many);
  REQUIRE(bm.batch_size() == many.size());
  for (std::size_t i = 0; i < many.size(); ++i) {
    const TriMesh back = slice_batch(bm, i);
    CHECK(back.facets == many[i].facets);
    CHECK(back.positions == many[i].positions);
    CHECK(back.features == many[i].features);
  }

  TriMesh other = t;
  other.features.resize(3, 2);
  const std::vector<TriMesh> mismatch{t, other};
  CHECK_THROWS_AS(concat_batch(mismatch), MeshError);
}
