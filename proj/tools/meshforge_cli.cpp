// meshforge command-line driver: decimate, bench, gradcheck, validate.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "meshforge/bench.hpp"
#include "meshforge/decimate.hpp"
#include "meshforge/gradcheck.hpp"
#include "meshforge/io.hpp"
#include "meshforge/parallel.hpp"
#include "meshforge/synthetic.hpp"

namespace fs = std::filesystem;
using namespace meshforge;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kInputError = 2, kInfeasible = 3 };

int input_error(const std::string& msg) {
  std::cerr << "error: " << msg << '\n';
  return kInputError;
}

std::optional<TriMesh> load_or_report(const std::string& path, int& code) {
  try {
    TriMesh m = load_mesh(path);
    validate(m, true);
    return m;
  } catch (const ParseError& e) {
    std::cerr << "error: " << path << ":" << (e.unit() == ParseError::Unit::line ? "line " : "byte ") << e.position()
              << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << path << ": " << e.what() << '\n';
  }
  code = kInputError;
  return std::nullopt;
}

MeshFormat parse_format(const std::string& s) {
  if (s == "ply") return MeshFormat::ply;
  if (s == "obj") return MeshFormat::obj;
  return MeshFormat::automatic;
}

// ------------------------------------------------------------ decimate

struct DecimateArgs {
  std::string input, output;
  int target = 0;
  std::optional<int> rounds;
  std::string placement = "average";
  std::optional<std::uint64_t> seed;
  std::string format = "auto";
  bool ascii = false;
};

int cmd_decimate(const DecimateArgs& a) {
  int code = kOk;
  auto mesh = load_or_report(a.input, code);
  if (!mesh) return code;
  if (a.target > static_cast<int>(mesh->num_vertices())) {
    std::cerr << "error: target " << a.target << " exceeds the " << mesh->num_vertices() << " input vertices\n";
    return kInfeasible;
  }
  DecimationConfig cfg;
  cfg.target_vertices = a.target;
  cfg.rounds = a.rounds;
  cfg.placement = a.placement == "inverse" ? Placement::inverse : Placement::average;
  cfg.shuffle_seed = a.seed;
  DecimationResult r;
  try {
    r = decimate_parallel(*mesh, cfg);
  } catch (const InfeasibleTarget& e) {
    std::cerr << "error: " << e.what() << " (smallest reachable: " << e.achievable_minimum() << ")\n";
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    return input_error(e.what());
  }

  try {
    save_mesh(r.mesh, a.output, parse_format(a.format),
              a.ascii ? PlyEncoding::ascii : PlyEncoding::binary_little_endian);
    write_cluster_sidecar(r, a.output + ".clusters");
  } catch (const std::exception& e) {
    return input_error(e.what());
  }

  const QualityReport q = quality_report(*mesh, r);
  std::cout << "input: " << mesh->num_vertices() << " vertices, " << mesh->num_facets() << " facets\n"
            << "output: " << q.output_vertices << " vertices, " << q.output_facets << " facets in " << r.rounds_run
            << " round(s)\n"
            << std::setprecision(6) << "quadric error: mean " << q.mean_error << ", max " << q.max_error << '\n'
            << "cluster sizes:";
  for (std::size_t s = 1; s < q.cluster_histogram.size(); ++s)
    if (q.cluster_histogram[s]) std::cout << ' ' << s << "x" << q.cluster_histogram[s];
  std::cout << "\nclusters: " << a.output << ".clusters\n";
  return kOk;
}

// ------------------------------------------------------------ bench

struct BenchArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> targets{"0.5"};
  std::vector<std::string> algorithms{"parallel", "qem_oracle"};
  int repeats = 3;
  std::string csv;
  std::uint64_t seed = 1;
};

// Plain paths pass through; a final component with * or ? is matched in its directory.
std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    if (p.rfind("synthetic:", 0) == 0 || p.find_first_of("*?") == std::string::npos) {
      out.push_back(p);
      continue;
    }
    const fs::path path(p);
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::string rx;
    for (char ch : path.filename().string()) {
      if (ch == '*')
        rx += ".*";
      else if (ch == '?')
        rx += '.';
      else if (std::string("\\^$.|+()[]{}").find(ch) != std::string::npos)
        rx += std::string("\\") + ch;
      else
        rx += ch;
    }
    const std::regex re(rx);
    std::vector<std::string> hits;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec))
      if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), re))
        hits.push_back(entry.path().string());
    if (hits.empty()) std::cerr << "warning: no files match " << p << '\n';
    std::sort(hits.begin(), hits.end());
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

// Integers are absolute vertex counts; values in (0, 1) are fractions of the input.
int resolve_target(const std::string& text, std::size_t input_vertices) {
  const double v = std::stod(text);
  if (v > 0.0 && v < 1.0) return std::max(1, static_cast<int>(std::ceil(v * static_cast<double>(input_vertices))));
  return static_cast<int>(v);
}

int cmd_bench(const BenchArgs& a) {
  std::vector<BenchAlgorithm> algorithms;
  try {
    for (const auto& name : a.algorithms) algorithms.push_back(parse_algorithm(name));
    for (const auto& t : a.targets) (void)std::stod(t);
  } catch (const std::exception& e) {
    return input_error(std::string("bad --algorithms or --targets: ") + e.what());
  }
  const auto inputs = expand_inputs(a.inputs);
  if (inputs.empty()) return input_error("bench needs at least one input mesh");

  std::ofstream file;
  if (!a.csv.empty()) {
    file.open(a.csv);
    if (!file) return input_error("cannot write " + a.csv);
  }
  std::ostream& csv = a.csv.empty() ? std::cout : file;
  write_bench_header(csv);

  std::vector<BenchRecord> rows;
  std::size_t failures = 0;
  for (const auto& path : inputs) {
    TriMesh mesh;
    try {
      if (path.rfind("synthetic:", 0) == 0)
        mesh = synthetic_mesh(std::stoi(path.substr(10)), a.seed);
      else
        mesh = load_mesh(path);
      validate(mesh, true);
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << path << ": " << e.what() << '\n';
      ++failures;
      continue;
    }
    for (const auto& t : a.targets)
      for (BenchAlgorithm alg : algorithms) {
        try {
          const int target = resolve_target(t, mesh.num_vertices());
          // one row per repeat, each a single timed run
          for (int rep = 0; rep < a.repeats; ++rep) {
            BenchRecord rec = run_bench(mesh, target, alg, 1, a.seed);
            write_bench_row(csv, rec);
            rows.push_back(rec);
          }
        } catch (const std::exception& e) {
          std::cerr << "warning: " << path << " target " << t << " " << to_string(alg) << ": " << e.what() << '\n';
          ++failures;
        }
      }
  }
  csv.flush();

  // summary: medians per (input size, target, algorithm)
  std::map<std::tuple<std::size_t, int, int>, std::vector<double>> groups;
  for (const auto& r : rows)
    groups[{r.input_vertices, r.target_vertices, static_cast<int>(r.algorithm)}].push_back(r.wall_ms);
  std::ostream& log = a.csv.empty() ? std::cerr : std::cout;
  std::map<std::size_t, std::vector<double>> parallel_by_size;
  for (const auto& [key, times] : groups) {
    const auto [n, target, alg] = key;
    if (alg != static_cast<int>(BenchAlgorithm::parallel)) continue;
    const double par = median(times);
    parallel_by_size[n].push_back(par);
    auto it = groups.find({n, target, static_cast<int>(BenchAlgorithm::qem_oracle)});
    if (it != groups.end())
      log << "speedup at " << n << " vertices -> " << target << ": " << std::setprecision(3)
          << median(it->second) / par << "x\n";
  }
  if (parallel_by_size.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& [n, times] : parallel_by_size) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(median(times));
    }
    const LinearFit fit = fit_line(xs, ys);
    log << "linear fit of parallel wall_ms vs input vertices: R^2 = " << std::setprecision(4) << fit.r_squared << '\n';
  }
  if (failures) log << failures << " run(s) failed\n";
  return kOk;
}

// ------------------------------------------------------------ gradcheck

int cmd_gradcheck(const GradcheckOptions& opt, double tolerance) {
  std::vector<GradcheckResult> results;
  try {
    results = run_gradchecks(opt);
  } catch (const std::invalid_argument& e) {
    return input_error(e.what());
  }
  bool ok = true;
  std::cout << (opt.single_precision ? "float" : "double") << " path, eps " << opt.eps << ", " << opt.cases
            << " cases\n";
  for (const auto& r : results) {
    const bool pass = r.max_relative_error < tolerance;
    ok = ok && pass;
    std::cout << std::left << std::setw(26) << r.op << std::right << std::scientific << std::setprecision(3)
              << r.max_relative_error << std::defaultfloat << "  (" << r.entries << " entries) "
              << (pass ? "ok" : "FAIL") << '\n';
  }
  return ok ? kOk : kCheckFailed;
}

// ------------------------------------------------------------ validate

int cmd_validate(const std::string& path) {
  TriMesh mesh;
  try {
    mesh = load_mesh(path);
    validate(mesh, false);
  } catch (const ParseError& e) {
    std::cerr << "error: " << path << ":" << (e.unit() == ParseError::Unit::line ? "line " : "byte ") << e.position()
              << ": " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    return input_error(path + ": " + e.what());
  }
  const MeshFileStats s = mesh_stats(mesh);
  const TopologyReport t = analyze_topology(mesh);
  std::cout << "vertices: " << s.vertex_count << '\n'
            << "facets: " << s.facet_count << '\n'
            << "color: " << (s.has_color ? "yes" : "no") << '\n'
            << std::setprecision(9) << "bbox: [" << s.bbox_min.x() << ", " << s.bbox_min.y() << ", " << s.bbox_min.z()
            << "] - [" << s.bbox_max.x() << ", " << s.bbox_max.y() << ", " << s.bbox_max.z() << "]\n"
            << "degenerate facets: " << t.degenerate_facets << '\n'
            << "duplicate facets: " << t.duplicate_facets << '\n'
            << "components: " << t.components << '\n'
            << "isolated vertices: " << t.isolated_vertices << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_limit();
  CLI::App app{"meshforge: parallel mesh decimation and mesh convolutions"};
  app.require_subcommand(1);

  DecimateArgs dec;
  auto* d = app.add_subcommand("decimate", "Cluster-decimate a mesh to a target vertex count");
  d->add_option("input", dec.input, "Input mesh (.ply or .obj)")->required();
  d->add_option("output", dec.output, "Output mesh; the cluster tensors go to <output>.clusters")->required();
  d->add_option("-n,--target-vertices", dec.target, "Output vertex count")->required();
  d->add_option("--rounds", dec.rounds, "Number of rounds (default: halve, then one exact round)");
  d->add_option("--placement", dec.placement, "Contracted vertex placement")
      ->check(CLI::IsMember({"average", "inverse"}));
  d->add_option("--seed", dec.seed, "Shuffle seed for equal-cost pairs");
  d->add_option("--format", dec.format, "Output format")->check(CLI::IsMember({"auto", "ply", "obj"}));
  d->add_flag("--ascii", dec.ascii, "Write ASCII instead of binary PLY");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time parallel decimation against the iterative baseline");
  b->add_option("inputs", bench.inputs, "Meshes, globs, or synthetic:<vertices>")->required();
  b->add_option("--targets", bench.targets, "Targets: vertex counts, or fractions in (0,1)")->delimiter(',');
  b->add_option("--algorithms", bench.algorithms, "parallel and/or qem_oracle")->delimiter(',');
  b->add_option("--repeats", bench.repeats, "Runs per configuration")->check(CLI::PositiveNumber);
  b->add_option("--csv", bench.csv, "CSV output file (default: standard output)");
  b->add_option("--seed", bench.seed, "Seed for shuffles and synthetic meshes");

  GradcheckOptions grad;
  double tolerance = 1e-4;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  g->add_option("--seed", grad.seed, "Random seed");
  g->add_option("--sizes", grad.sizes, "Icosphere levels of the random meshes (0 or 1)")->delimiter(',');
  g->add_option("--eps", grad.eps, "Finite-difference step");
  g->add_option("--cases", grad.cases, "Randomized cases per operation")->check(CLI::PositiveNumber);
  g->add_option("--channels", grad.channels, "Feature channels")->check(CLI::NonNegativeNumber);
  g->add_option("--tolerance", tolerance, "Maximum accepted relative error");
  g->add_flag("--float", grad.single_precision, "Check the single-precision path");

  std::string validate_path;
  auto* v = app.add_subcommand("validate", "Report mesh statistics and topology problems");
  v->add_option("input", validate_path, "Mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  if (d->parsed()) return cmd_decimate(dec);
  if (b->parsed()) return cmd_bench(bench);
  if (g->parsed()) return cmd_gradcheck(grad, tolerance);
  return cmd_validate(validate_path);
}
