#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "meshforge/bench.hpp"
#include "meshforge/decimate.hpp"
#include "meshforge/io.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace meshforge;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MESHFORGE_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "meshforge_cli_test";
  fs::create_directories(d);
  return d;
}

fs::path write(const TriMesh& m, const std::string& name) {
  const fs::path p = scratch() / name;
  save_mesh(m, p);
  return p;
}

}  // namespace

TEST_CASE("decimate writes the mesh and the cluster sidecar") {
  const fs::path in = write(fixtures::six_vertex(), "six_vertex.obj");
  const fs::path out = scratch() / "six_vertex_out.ply";
  const Run r = run("decimate " + in.string() + " " + out.string() + " -n 2 --rounds 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("output: 2 vertices") != std::string::npos);
  const TriMesh m = load_mesh(out);
  CHECK(m.num_vertices() == 2);
  const ClusterSidecar s = read_cluster_sidecar(out.string() + ".clusters");
  CHECK(s.output_vertices == 2);
  REQUIRE(s.replace.size() == 6);
  CHECK(s.replace[0] == s.replace[1]);
  CHECK(s.replace[1] == s.replace[5]);
  CHECK(s.replace[2] == s.replace[3]);
  CHECK(s.replace[3] == s.replace[4]);
  CHECK(s.replace[0] != s.replace[2]);
}

TEST_CASE("decimate to the input size is the identity") {
  const fs::path in = write(fixtures::octahedron(), "octa.ply");
  const fs::path out = scratch() / "octa_out.ply";
  CHECK(run("decimate " + in.string() + " " + out.string() + " -n 6").code == 0);
  const TriMesh a = load_mesh(in), b = load_mesh(out);
  CHECK(a.positions == b.positions);
  CHECK(a.facets == b.facets);
}

TEST_CASE("decimate exit codes") {
  const fs::path in = write(fixtures::two_disjoint_triangles(), "disjoint.obj");
  const fs::path out = scratch() / "disjoint_out.obj";
  CHECK(run("decimate " + in.string() + " " + out.string() + " -n 1 --rounds 1").code == 3);
  CHECK(run("decimate " + in.string() + " " + out.string() + " -n 99").code == 3);

  const fs::path bad = scratch() / "bad.obj";
  std::ofstream(bad) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
  CHECK(run("decimate " + bad.string() + " " + out.string() + " -n 2").code == 2);
  CHECK(run("decimate " + (scratch() / "missing.obj").string() + " " + out.string() + " -n 2").code == 2);
  CHECK(run("decimate").code == 2);
}

TEST_CASE("seeded decimation is byte-identical across runs") {
  const fs::path in = write(fixtures::small_grid(), "grid.ply");
  const fs::path a = scratch() / "grid_a.ply", b = scratch() / "grid_b.ply";
  REQUIRE(run("decimate " + in.string() + " " + a.string() + " -n 4 --seed 17").code == 0);
  REQUIRE(run("decimate " + in.string() + " " + b.string() + " -n 4 --seed 17").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".clusters") == slurp(b.string() + ".clusters"));
}

TEST_CASE("validate reports topology") {
  const Run one = run("validate " + write(fixtures::single_triangle(), "tri.obj").string());
  CHECK(one.code == 0);
  CHECK(one.out.find("components: 1\n") != std::string::npos);
  CHECK(one.out.find("color: no") != std::string::npos);

  const Run two = run("validate " + write(fixtures::two_disjoint_triangles(), "two.obj").string());
  CHECK(two.out.find("components: 2\n") != std::string::npos);

  TriMesh dup = fixtures::two_triangles();
  dup.facets.push_back({2, 1, 0});
  const Run d = run("validate " + write(dup, "dup.obj").string());
  CHECK(d.code == 0);
  CHECK(d.out.find("duplicate facets: 1\n") != std::string::npos);

  const fs::path bad = scratch() / "bad.ply";
  std::ofstream(bad) << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nend_header\n0\n";
  CHECK(run("validate " + bad.string()).code == 2);
}

TEST_CASE("bench writes one row per target, algorithm and repeat") {
  const fs::path csv = scratch() / "bench.csv";
  const Run r = run("bench synthetic:600 --targets 300,0.25 --algorithms parallel,qem_oracle --repeats 1 --csv " +
                    csv.string());
  CHECK(r.code == 0);
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  CHECK(line == kBenchSchema);
  std::getline(in, line);
  CHECK(line == kBenchColumns);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("gradcheck subcommand") {
  CHECK(run("gradcheck --cases 3").code == 0);
  CHECK(run("gradcheck --cases 2 --channels 0").code == 0);
}
