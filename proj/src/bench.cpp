#include "meshforge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace meshforge {

const char* to_string(BenchAlgorithm a) { return a == BenchAlgorithm::parallel ? "parallel" : "qem_oracle"; }

BenchAlgorithm parse_algorithm(const std::string& name) {
  if (name == "parallel") return BenchAlgorithm::parallel;
  if (name == "qem_oracle" || name == "oracle") return BenchAlgorithm::qem_oracle;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected parallel or qem_oracle)");
}

void write_bench_header(std::ostream& out) { out << kBenchSchema << '\n' << kBenchColumns << '\n'; }

void write_bench_row(std::ostream& out, const BenchRecord& r) {
  const auto flags = out.flags();
  out << r.input_vertices << ',' << r.input_facets << ',' << r.target_vertices << ',' << to_string(r.algorithm) << ','
      << std::fixed << std::setprecision(3) << r.wall_ms << ',' << std::scientific << std::setprecision(9)
      << r.mean_quadric_error << ',' << r.seed << '\n';
  out.flags(flags);
}

double time_decimation(const TriMesh& mesh, int target_vertices, BenchAlgorithm algorithm, std::uint64_t seed,
                       DecimationResult* out) {
  using clock = std::chrono::steady_clock;
  DecimationResult r;
  const auto start = clock::now();
  if (algorithm == BenchAlgorithm::parallel) {
    DecimationConfig cfg;
    cfg.target_vertices = target_vertices;
    cfg.shuffle_seed = seed;
    r = decimate_parallel(mesh, cfg);
  } else {
    OracleConfig cfg;
    cfg.target_vertices = target_vertices;
    r = decimate_qem_oracle(mesh, cfg);
  }
  const auto stop = clock::now();
  if (out) *out = std::move(r);
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

BenchRecord run_bench(const TriMesh& mesh, int target_vertices, BenchAlgorithm algorithm, int repeats,
                      std::uint64_t seed) {
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  BenchRecord rec;
  rec.input_vertices = mesh.num_vertices();
  rec.input_facets = mesh.num_facets();
  rec.target_vertices = target_vertices;
  rec.algorithm = algorithm;
  rec.seed = seed;
  std::vector<double> times;
  DecimationResult last;
  for (int i = 0; i < repeats; ++i) times.push_back(time_decimation(mesh, target_vertices, algorithm, seed, &last));
  rec.wall_ms = std::max(median(times), 1e-6);
  rec.mean_quadric_error = quality_report(mesh, last).mean_error;
  return rec;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct x values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace meshforge
