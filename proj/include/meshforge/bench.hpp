#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "meshforge/decimate.hpp"

namespace meshforge {

enum class BenchAlgorithm { parallel, qem_oracle };

const char* to_string(BenchAlgorithm a);
BenchAlgorithm parse_algorithm(const std::string& name);

struct BenchRecord {
  std::size_t input_vertices = 0;
  std::size_t input_facets = 0;
  int target_vertices = 0;
  BenchAlgorithm algorithm = BenchAlgorithm::parallel;
  double wall_ms = 0.0;
  double mean_quadric_error = 0.0;
  std::uint64_t seed = 0;
};

/// Version line written above the column header.
inline constexpr const char* kBenchSchema = "# schema: meshforge.bench v1";
inline constexpr const char* kBenchColumns =
    "input_vertices,input_facets,target_vertices,algorithm,wall_ms,mean_quadric_error,seed";

void write_bench_header(std::ostream& out);
void write_bench_row(std::ostream& out, const BenchRecord& r);

/// Runs one algorithm `repeats` times on the mesh and records the median wall
/// time of the simplification call (no I/O) plus the quality of the last run.
/// The oracle stops at the same vertex count as the parallel path.
BenchRecord run_bench(const TriMesh& mesh, int target_vertices, BenchAlgorithm algorithm, int repeats,
                      std::uint64_t seed);

/// Times just the simplification call in milliseconds.
double time_decimation(const TriMesh& mesh, int target_vertices, BenchAlgorithm algorithm, std::uint64_t seed,
                       DecimationResult* out = nullptr);

double median(std::vector<double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line y = slope x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace meshforge
