#include "meshforge/decimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "meshforge/io.hpp"
#include "meshforge/parallel.hpp"

namespace meshforge {
namespace {

constexpr double kShuffleBucketFraction = 1e-12;

// Monotone map from doubles to unsigned integers.
std::uint64_t ordered_bits(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return (u >> 63) ? ~u : u | (std::uint64_t{1} << 63);
}

// Stable LSD radix pass sequence over 11-bit digits.
void radix_sort_by(std::vector<int>& order, const std::vector<std::uint64_t>& key) {
  constexpr int kBits = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kBits;
  std::vector<int> scratch(order.size());
  std::vector<std::size_t> count(kBuckets);
  for (int shift = 0; shift < 64; shift += kBits) {
    std::fill(count.begin(), count.end(), 0);
    for (int e : order) ++count[(key[e] >> shift) & (kBuckets - 1)];
    if (*std::max_element(count.begin(), count.end()) == order.size()) continue;
    std::size_t sum = 0;
    for (std::size_t& c : count) sum += std::exchange(c, sum);
    for (int e : order) scratch[count[(key[e] >> shift) & (kBuckets - 1)]++] = e;
    order.swap(scratch);
  }
}

// Edge visiting order: ascending cost; equal costs (or, with a seed, costs
// within one bucket of width 1e-12 * range) ordered by a seeded random key,
// then by edge index.
std::vector<int> pair_order(const std::vector<double>& costs, std::optional<std::uint64_t> seed) {
  std::vector<int> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> key(costs.size());
  if (!seed) {
    for (std::size_t e = 0; e < costs.size(); ++e) key[e] = ordered_bits(costs[e]);
    radix_sort_by(order, key);
    return order;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double c : costs) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const double width = costs.empty() ? 0.0 : kShuffleBucketFraction * (hi - lo);
  std::mt19937_64 rng(*seed);
  for (std::size_t e = 0; e < costs.size(); ++e) key[e] = rng();
  radix_sort_by(order, key);
  for (std::size_t e = 0; e < costs.size(); ++e)
    key[e] = ordered_bits(width > 0.0 ? std::floor((costs[e] - lo) / width) : 0.0);
  radix_sort_by(order, key);
  return order;
}

DecimationResult identity_result(const TriMesh& mesh) {
  DecimationResult r;
  r.mesh = mesh;
  r.replace.resize(mesh.num_vertices());
  std::iota(r.replace.begin(), r.replace.end(), 0);
  r.mapping = r.replace;
  return r;
}

// One core round of the cluster simplifier down to exactly `target` vertices.
DecimationResult decimate_round(const TriMesh& mesh, int target, Placement rule, std::optional<std::uint64_t> seed) {
  const int n = static_cast<int>(mesh.num_vertices());
  const int to_remove = n - target;

  const VertexFacetAdjacency adj = vertex_facet_adjacency(mesh);
  const auto geometry = compute_facet_geometry(mesh);
  const auto fq = facet_quadrics(geometry);
  const auto vq = vertex_quadrics(adj, fq);

  // Candidate pairs are the mesh edges, each with its contraction cost.
  const std::vector<Edge> edges = edge_list(mesh, adj);
  std::vector<double> costs(edges.size());
  parallel_for(edges.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) costs[e] = pair_cost(edges[e], vq, mesh.positions, rule).cost;
  });
  const std::vector<int> order = pair_order(costs, seed);

  // Greedy disjoint pairing.
  std::vector<int> cluster(n, -1);
  std::vector<int> cluster_rep;
  int removed = 0;
  for (int e : order) {
    if (removed >= to_remove) break;
    const auto [i, j] = edges[e];
    if (cluster[i] >= 0 || cluster[j] >= 0) continue;
    cluster[i] = cluster[j] = static_cast<int>(cluster_rep.size());
    cluster_rep.push_back(std::min(i, j));
    ++removed;
  }

  // Leftover vertices join a seeded cluster they are connected to, through
  // their cheapest such edge (ties: lowest representative). Cheapest first.
  if (removed < to_remove) {
    struct Candidate {
      double cost = std::numeric_limits<double>::infinity();
      int rep = std::numeric_limits<int>::max();
      int cluster = -1;
    };
    std::vector<Candidate> best(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      for (auto [v, u] : {std::pair{i, j}, std::pair{j, i}}) {
        if (cluster[v] >= 0 || cluster[u] < 0) continue;
        const int rep = cluster_rep[cluster[u]];
        Candidate& b = best[v];
        if (costs[e] < b.cost || (costs[e] == b.cost && rep < b.rep)) b = {costs[e], rep, cluster[u]};
      }
    }
    std::vector<int> leftovers;
    for (int v = 0; v < n; ++v)
      if (cluster[v] < 0 && best[v].cluster >= 0) leftovers.push_back(v);
    std::sort(leftovers.begin(), leftovers.end(), [&](int a, int b) {
      return best[a].cost != best[b].cost ? best[a].cost < best[b].cost : a < b;
    });
    for (int v : leftovers) {
      if (removed >= to_remove) break;
      cluster[v] = best[v].cluster;
      ++removed;
    }
    if (removed < to_remove) {
      const auto minimum = static_cast<std::size_t>(n - removed);
      std::ostringstream msg;
      msg << "cannot reduce " << n << " vertices to " << target << "; the edge graph allows at least " << minimum;
      throw InfeasibleTarget(msg.str(), minimum);
    }
  }

  // Output vertices ordered by their lowest member index.
  DecimationResult r;
  r.replace.assign(n, -1);
  std::vector<int> out_of_cluster(cluster_rep.size(), -1);
  int out_count = 0;
  for (int v = 0; v < n; ++v) {
    if (cluster[v] < 0) {
      r.replace[v] = out_count++;
    } else {
      int& slot = out_of_cluster[cluster[v]];
      if (slot < 0) slot = out_count++;
      r.replace[v] = slot;
    }
  }

  std::vector<int> member_offsets(out_count + 1, 0);
  for (int v = 0; v < n; ++v) ++member_offsets[r.replace[v] + 1];
  std::partial_sum(member_offsets.begin(), member_offsets.end(), member_offsets.begin());
  std::vector<int> members(n);
  {
    std::vector<int> cursor(member_offsets.begin(), member_offsets.end() - 1);
    for (int v = 0; v < n; ++v) members[cursor[r.replace[v]]++] = v;
  }

  // Contract every cluster independently.
  const auto channels = mesh.features.cols();
  r.mesh.positions.resize(out_count);
  r.mesh.features.setZero(out_count, channels);
  parallel_for(static_cast<std::size_t>(out_count), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t o = lo; o < hi; ++o) {
      Quadric q;
      Vec3 centroid = Vec3::Zero();
      const int b = member_offsets[o], e = member_offsets[o + 1];
      for (int k = b; k < e; ++k) {
        q += vq[members[k]];
        centroid += mesh.positions[members[k]];
        if (channels > 0) r.mesh.features.row(static_cast<Eigen::Index>(o)) += mesh.features.row(members[k]);
      }
      const double inv = 1.0 / static_cast<double>(e - b);
      centroid *= inv;
      if (channels > 0) r.mesh.features.row(static_cast<Eigen::Index>(o)) *= inv;
      r.mesh.positions[o] = contraction_cost(q, centroid, rule).target;
    }
  });

  // Remap facets, drop degenerate ones, deduplicate the rest.
  const std::size_t m = mesh.num_facets();
  std::vector<Facet> remapped(m);
  std::vector<char> keep(m, 0);
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Facet& t = mesh.facets[f];
      remapped[f] = {r.replace[t[0]], r.replace[t[1]], r.replace[t[2]]};
      const Facet& u = remapped[f];
      keep[f] = (u[0] != u[1] && u[1] != u[2] && u[0] != u[2]) ? 1 : 0;
    }
  });
  std::vector<char> survives(keep);  // not degenerate; duplicates still count
  {
    // Bucket by lowest corner; the first facet of each corner set is kept.
    std::vector<Facet> sorted(m);
    std::vector<int> offsets(out_count + 1, 0);
    for (std::size_t f = 0; f < m; ++f) {
      if (!keep[f]) continue;
      sorted[f] = remapped[f];
      std::sort(sorted[f].begin(), sorted[f].end());
      ++offsets[sorted[f][0] + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<int> bucket(offsets.back());
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t f = 0; f < m; ++f)
      if (keep[f]) bucket[cursor[sorted[f][0]]++] = static_cast<int>(f);
    for (int o = 0; o < out_count; ++o)
      for (int a = offsets[o]; a < offsets[o + 1]; ++a)
        for (int b = offsets[o]; b < a; ++b)
          if (keep[bucket[b]] && sorted[bucket[a]] == sorted[bucket[b]]) {
            keep[bucket[a]] = 0;
            break;
          }
  }
  for (std::size_t f = 0; f < m; ++f)
    if (keep[f]) r.mesh.facets.push_back(remapped[f]);

  r.mapping.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    const auto incident = adj.of(static_cast<std::size_t>(v));
    const bool alive = incident.empty() ||
                       std::any_of(incident.begin(), incident.end(), [&](int f) { return survives[f] != 0; });
    r.mapping[v] = alive ? r.replace[v] : -1;
  }
  r.rounds_run = 1;
  return r;
}

// Chains a later round onto an earlier one.
void compose(DecimationResult& acc, DecimationResult next) {
  for (std::size_t i = 0; i < acc.replace.size(); ++i) {
    acc.replace[i] = next.replace[acc.replace[i]];
    acc.mapping[i] = acc.mapping[i] < 0 ? -1 : next.mapping[acc.mapping[i]];
  }
  acc.mesh = std::move(next.mesh);
  acc.rounds_run += next.rounds_run;
}

}  // namespace

std::vector<int> round_schedule(int input_vertices, int target_vertices, std::optional<int> rounds) {
  if (target_vertices <= 0) throw std::invalid_argument("target vertex count must be positive");
  if (target_vertices > input_vertices) {
    std::ostringstream msg;
    msg << "target vertex count " << target_vertices << " exceeds input vertex count " << input_vertices;
    throw std::invalid_argument(msg.str());
  }
  std::vector<int> targets;
  if (target_vertices == input_vertices || (rounds && *rounds == 0)) return targets;
  if (rounds && *rounds < 0) throw std::invalid_argument("round count must be non-negative");
  if (!rounds) {
    int current = input_vertices;
    while ((current + 1) / 2 > target_vertices) {
      current = (current + 1) / 2;
      targets.push_back(current);
    }
  } else {
    const double ratio = static_cast<double>(target_vertices) / input_vertices;
    int previous = input_vertices;
    for (int k = 1; k < *rounds; ++k) {
      const int t = static_cast<int>(std::lround(input_vertices * std::pow(ratio, static_cast<double>(k) / *rounds)));
      if (t < previous && t > target_vertices) {
        targets.push_back(t);
        previous = t;
      }
    }
  }
  targets.push_back(target_vertices);
  return targets;
}

DecimationResult decimate_parallel(const TriMesh& mesh, const DecimationConfig& config) {
  validate(mesh, true);
  const int n = static_cast<int>(mesh.num_vertices());
  const auto targets = round_schedule(n, config.target_vertices, config.rounds);
  DecimationResult acc = identity_result(mesh);
  for (int t : targets) {
    if (t == static_cast<int>(acc.mesh.num_vertices())) continue;
    compose(acc, decimate_round(acc.mesh, t, config.placement, config.shuffle_seed));
  }
  return acc;
}

BatchedDecimationResult decimate_parallel(const BatchedMesh& batch, const DecimationConfig& config) {
  const std::size_t count = batch.batch_size();
  std::vector<DecimationResult> parts(count);
  parallel_for(
      count,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) parts[b] = decimate_parallel(slice_batch(batch, b), config);
      },
      1);

  std::vector<TriMesh> meshes;
  meshes.reserve(count);
  BatchedDecimationResult out;
  int offset = 0;
  for (auto& p : parts) {
    for (int v : p.replace) out.replace.push_back(v + offset);
    for (int v : p.mapping) out.mapping.push_back(v < 0 ? -1 : v + offset);
    offset += static_cast<int>(p.mesh.num_vertices());
    meshes.push_back(std::move(p.mesh));
  }
  out.batch = concat_batch(meshes);
  return out;
}

}  // namespace meshforge
