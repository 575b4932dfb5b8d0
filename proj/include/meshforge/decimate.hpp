#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshforge/mesh.hpp"
#include "meshforge/quadric.hpp"

namespace meshforge {

/// Requested vertex count cannot be reached with the available edges.
class InfeasibleTarget : public std::runtime_error {
 public:
  InfeasibleTarget(const std::string& what, std::size_t achievable_minimum)
      : std::runtime_error(what), achievable_minimum_(achievable_minimum) {}
  std::size_t achievable_minimum() const { return achievable_minimum_; }

 private:
  std::size_t achievable_minimum_;
};

struct DecimationConfig {
  int target_vertices = 0;
  Placement placement = Placement::average;
  /// Seeds the shuffle among equal-cost pairs; without it ties keep edge order.
  std::optional<std::uint64_t> shuffle_seed;
  /// nullopt: halve per round, then one exact round. 0: identity.
  std::optional<int> rounds;
};

/// Decimated mesh plus the per-input-vertex cluster tensors.
///
/// replace[i] is the output vertex of the cluster holding input vertex i.
/// mapping[i] equals replace[i], or -1 when every facet incident to i was
/// removed as degenerate. Input vertices without any facet keep replace[i].
struct DecimationResult {
  TriMesh mesh;
  std::vector<int> replace;
  std::vector<int> mapping;
  /// Set by the iterative oracle when it ran out of candidate pairs.
  bool partial = false;
  int rounds_run = 0;

  std::size_t num_clusters() const { return mesh.num_vertices(); }
};

/// Cluster-based simplifier: sort edge pairs by quadric cost once, form
/// disjoint two-vertex clusters greedily, absorb leftovers, contract every
/// cluster independently.
DecimationResult decimate_parallel(const TriMesh& mesh, const DecimationConfig& config);

/// Decimation of every mesh of a batch to config.target_vertices. The
/// returned tensors use batch-global indices.
struct BatchedDecimationResult {
  BatchedMesh batch;
  std::vector<int> replace;
  std::vector<int> mapping;
};

BatchedDecimationResult decimate_parallel(const BatchedMesh& batch, const DecimationConfig& config);

/// Vertex targets used by successive rounds for the given schedule.
std::vector<int> round_schedule(int input_vertices, int target_vertices, std::optional<int> rounds);

struct OracleConfig {
  /// Contract until the live facet count drops below this.
  int target_facets = 0;
  /// Non-edge pairs closer than tau become candidates too (0 = edges only).
  double tau = 0.0;
  Placement placement = Placement::average;
  /// Optional early stop once this many vertices remain.
  std::optional<int> target_vertices;
  /// Rejects contractions that flip an incident facet normal.
  bool reject_normal_flips = true;
};

/// Classic iterative greedy quadric-error simplifier, used as a baseline.
DecimationResult decimate_qem_oracle(const TriMesh& mesh, const OracleConfig& config);

struct QualityReport {
  std::size_t output_vertices = 0;
  std::size_t output_facets = 0;
  /// Quadric error of each output vertex against the original facet planes
  /// of its cluster members.
  double mean_error = 0.0;
  double max_error = 0.0;
  /// cluster_histogram[s] = number of clusters with s members.
  std::vector<std::size_t> cluster_histogram;
};

QualityReport quality_report(const TriMesh& original, const DecimationResult& result);

/// Sidecar holding replace/mapping: "MFCL", u32 version, u64 input count,
/// u64 output count, i32 replace[], i32 mapping[] (little-endian).
void write_cluster_sidecar(const DecimationResult& result, const std::filesystem::path& path);

struct ClusterSidecar {
  std::uint64_t output_vertices = 0;
  std::vector<int> replace;
  std::vector<int> mapping;
};

ClusterSidecar read_cluster_sidecar(const std::filesystem::path& path);

}  // namespace meshforge
