#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

#include "meshforge/decimate.hpp"

namespace meshforge {
namespace {

struct HeapEntry {
  double cost;
  int i, j;
  unsigned vi, vj;
  Vec3 target;
};

struct CostGreater {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    if (a.i != b.i) return a.i > b.i;
    return a.j > b.j;
  }
};

void erase_value(std::vector<int>& v, int x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) {
    *it = v.back();
    v.pop_back();
  }
}

void insert_unique(std::vector<int>& v, int x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

class IterativeSimplifier {
 public:
  IterativeSimplifier(const TriMesh& mesh, const OracleConfig& config) : mesh_(mesh), config_(config) {
    const std::size_t n = mesh.num_vertices();
    pos_ = mesh.positions;
    facets_ = mesh.facets;
    facet_alive_.assign(facets_.size(), 1);
    live_facets_ = facets_.size();
    alive_.assign(n, 1);
    live_vertices_ = n;
    version_.assign(n, 0);
    merged_into_.assign(n, -1);
    vertex_facets_.resize(n);
    partners_.resize(n);

    const VertexFacetAdjacency adj = vertex_facet_adjacency(mesh);
    const auto fq = facet_quadrics(compute_facet_geometry(mesh));
    q_ = vertex_quadrics(adj, fq);
    for (std::size_t v = 0; v < n; ++v) {
      auto of = adj.of(v);
      vertex_facets_[v].assign(of.begin(), of.end());
    }
    for (const auto& [i, j] : edge_list(mesh, adj)) {
      partners_[i].push_back(j);
      partners_[j].push_back(i);
    }
    if (config.tau > 0.0) add_proximity_pairs(config.tau);
    for (std::size_t i = 0; i < n; ++i)
      for (int j : partners_[i])
        if (static_cast<int>(i) < j) push_pair(static_cast<int>(i), j);
  }

  DecimationResult run() {
    bool reached = done();
    while (!reached && !heap_.empty()) {
      HeapEntry top = heap_.top();
      heap_.pop();
      if (!alive_[top.i] || !alive_[top.j] || version_[top.i] != top.vi || version_[top.j] != top.vj) continue;
      // Rejected pairs come back once an endpoint changes.
      if (config_.reject_normal_flips && flips_normal(top.i, top.j, top.target)) continue;
      contract(top.i, top.j, top.target);
      reached = done();
    }
    return collect(!reached);
  }

 private:
  bool done() const {
    if (static_cast<long long>(live_facets_) < config_.target_facets) return true;
    return config_.target_vertices && static_cast<long long>(live_vertices_) <= *config_.target_vertices;
  }

  void add_proximity_pairs(double tau) {
    struct CellHash {
      std::size_t operator()(const std::array<long long, 3>& c) const {
        return static_cast<std::size_t>(c[0] * 73856093LL ^ c[1] * 19349663LL ^ c[2] * 83492791LL);
      }
    };
    std::unordered_map<std::array<long long, 3>, std::vector<int>, CellHash> grid;
    auto cell_of = [&](const Vec3& p) {
      return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / tau)),
                                      static_cast<long long>(std::floor(p.y() / tau)),
                                      static_cast<long long>(std::floor(p.z() / tau))};
    };
    for (std::size_t v = 0; v < pos_.size(); ++v) grid[cell_of(pos_[v])].push_back(static_cast<int>(v));
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      const auto c = cell_of(pos_[v]);
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy)
          for (long long dz = -1; dz <= 1; ++dz) {
            auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
            if (it == grid.end()) continue;
            for (int u : it->second)
              if (u > static_cast<int>(v) && (pos_[u] - pos_[v]).norm() < tau) {
                insert_unique(partners_[v], u);
                insert_unique(partners_[u], static_cast<int>(v));
              }
          }
    }
  }

  void push_pair(int i, int j) {
    if (i > j) std::swap(i, j);
    const PairCost pc = pair_cost(q_[i], q_[j], pos_[i], pos_[j], config_.placement);
    heap_.push({pc.cost, i, j, version_[i], version_[j], pc.target});
  }

  bool flips_normal(int i, int j, const Vec3& target) const {
    for (int v : {i, j}) {
      for (int f : vertex_facets_[v]) {
        if (!facet_alive_[f]) continue;
        const Facet& t = facets_[f];
        const bool has_i = t[0] == i || t[1] == i || t[2] == i;
        const bool has_j = t[0] == j || t[1] == j || t[2] == j;
        if (has_i && has_j) continue;
        const Vec3 before = (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
        std::array<Vec3, 3> p{pos_[t[0]], pos_[t[1]], pos_[t[2]]};
        for (int k = 0; k < 3; ++k)
          if (t[k] == v) p[k] = target;
        const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
        if (before.dot(after) < 0.0) return true;
      }
    }
    return false;
  }

  // Merges j into i (i < j) at `target`.
  void contract(int i, int j, const Vec3& target) {
    pos_[i] = target;
    q_[i] += q_[j];
    alive_[j] = 0;
    merged_into_[j] = i;
    --live_vertices_;

    for (int f : vertex_facets_[j]) {
      if (!facet_alive_[f]) continue;
      Facet& t = facets_[f];
      if (t[0] == i || t[1] == i || t[2] == i) {
        facet_alive_[f] = 0;
        --live_facets_;
        continue;
      }
      for (int& v : t)
        if (v == j) v = i;
      vertex_facets_[i].push_back(f);
    }
    std::erase_if(vertex_facets_[i], [&](int f) { return !facet_alive_[f]; });
    vertex_facets_[j].clear();

    for (int k : partners_[j]) {
      if (k == i) continue;
      erase_value(partners_[k], j);
      insert_unique(partners_[k], i);
      insert_unique(partners_[i], k);
    }
    erase_value(partners_[i], j);
    partners_[j].clear();

    ++version_[i];
    ++version_[j];
    for (int k : partners_[i]) push_pair(i, k);
  }

  int root(int v) const {
    while (merged_into_[v] >= 0) v = merged_into_[v];
    return v;
  }

  DecimationResult collect(bool partial) const {
    const std::size_t n = pos_.size();
    DecimationResult r;
    r.partial = partial;
    r.rounds_run = 1;
    std::vector<int> out_index(n, -1);
    int count = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (alive_[v]) out_index[v] = count++;
    r.replace.resize(n);
    for (std::size_t v = 0; v < n; ++v) r.replace[v] = out_index[root(static_cast<int>(v))];

    const auto channels = mesh_.features.cols();
    r.mesh.positions.resize(count);
    r.mesh.features.setZero(count, channels);
    std::vector<int> sizes(count, 0);
    for (std::size_t v = 0; v < n; ++v) {
      const int o = r.replace[v];
      ++sizes[o];
      if (channels > 0) r.mesh.features.row(o) += mesh_.features.row(static_cast<Eigen::Index>(v));
    }
    for (std::size_t v = 0; v < n; ++v)
      if (alive_[v]) r.mesh.positions[out_index[v]] = pos_[v];
    for (int o = 0; o < count && channels > 0; ++o) r.mesh.features.row(o) /= sizes[o];

    for (std::size_t f = 0; f < facets_.size(); ++f)
      if (facet_alive_[f])
        r.mesh.facets.push_back({out_index[facets_[f][0]], out_index[facets_[f][1]], out_index[facets_[f][2]]});

    r.mapping = r.replace;
    // Degeneration is judged on each input vertex's original incident facets.
    std::vector<char> incident(n, 0), alive_incident(n, 0);
    for (std::size_t f = 0; f < mesh_.facets.size(); ++f)
      for (int v : mesh_.facets[f]) {
        incident[v] = 1;
        if (facet_alive_[f]) alive_incident[v] = 1;
      }
    for (std::size_t v = 0; v < n; ++v)
      if (incident[v] && !alive_incident[v]) r.mapping[v] = -1;
    return r;
  }

  const TriMesh& mesh_;
  OracleConfig config_;
  std::vector<Vec3> pos_;
  std::vector<Quadric> q_;
  std::vector<Facet> facets_;
  std::vector<char> facet_alive_;
  std::size_t live_facets_ = 0;
  std::vector<char> alive_;
  std::size_t live_vertices_ = 0;
  std::vector<unsigned> version_;
  std::vector<int> merged_into_;
  std::vector<std::vector<int>> vertex_facets_;
  std::vector<std::vector<int>> partners_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, CostGreater> heap_;
};

}  // namespace

DecimationResult decimate_qem_oracle(const TriMesh& mesh, const OracleConfig& config) {
  validate(mesh, true);
  if (config.tau < 0.0) throw std::invalid_argument("tau must be non-negative");
  IterativeSimplifier simplifier(mesh, config);
  return simplifier.run();
}

}  // namespace meshforge
