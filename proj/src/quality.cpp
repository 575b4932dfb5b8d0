#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "meshforge/decimate.hpp"

namespace meshforge {
namespace {

constexpr std::array<char, 4> kSidecarMagic{'M', 'F', 'C', 'L'};
constexpr std::uint32_t kSidecarVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error(std::string("truncated cluster sidecar while reading ") + what);
  return v;
}

}  // namespace

QualityReport quality_report(const TriMesh& original, const DecimationResult& result) {
  if (result.replace.size() != original.num_vertices())
    throw std::invalid_argument("replace tensor does not match the original vertex count");
  const std::size_t out_n = result.mesh.num_vertices();
  QualityReport report;
  report.output_vertices = out_n;
  report.output_facets = result.mesh.num_facets();

  const VertexFacetAdjacency adj = vertex_facet_adjacency(original);
  const auto fq = facet_quadrics(compute_facet_geometry(original));
  const auto vq = vertex_quadrics(adj, fq);

  std::vector<Quadric> cluster_q(out_n);
  std::vector<std::size_t> sizes(out_n, 0);
  for (std::size_t v = 0; v < original.num_vertices(); ++v) {
    const int o = result.replace[v];
    if (o < 0 || static_cast<std::size_t>(o) >= out_n) throw std::invalid_argument("replace entry out of range");
    cluster_q[o] += vq[v];
    ++sizes[o];
  }
  double sum = 0.0;
  for (std::size_t o = 0; o < out_n; ++o) {
    // a sum of squared distances; clamp the rounding below zero
    const double e = std::max(0.0, cluster_q[o].error(result.mesh.positions[o]));
    sum += e;
    report.max_error = std::max(report.max_error, e);
    if (sizes[o] >= report.cluster_histogram.size()) report.cluster_histogram.resize(sizes[o] + 1, 0);
    ++report.cluster_histogram[sizes[o]];
  }
  report.mean_error = out_n > 0 ? sum / static_cast<double>(out_n) : 0.0;
  return report;
}

void write_cluster_sidecar(const DecimationResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kSidecarMagic.data(), kSidecarMagic.size());
  put(out, kSidecarVersion);
  put(out, static_cast<std::uint64_t>(result.replace.size()));
  put(out, static_cast<std::uint64_t>(result.mesh.num_vertices()));
  for (int v : result.replace) put(out, static_cast<std::int32_t>(v));
  for (int v : result.mapping) put(out, static_cast<std::int32_t>(v));
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ClusterSidecar read_cluster_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kSidecarMagic) throw std::runtime_error("not a cluster sidecar: " + path.string());
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kSidecarVersion) throw std::runtime_error("unsupported cluster sidecar version");
  const auto n_in = get<std::uint64_t>(in, "input count");
  ClusterSidecar s;
  s.output_vertices = get<std::uint64_t>(in, "output count");
  s.replace.resize(n_in);
  s.mapping.resize(n_in);
  for (auto& v : s.replace) v = get<std::int32_t>(in, "replace");
  for (auto& v : s.mapping) v = get<std::int32_t>(in, "mapping");
  return s;
}

}  // namespace meshforge
