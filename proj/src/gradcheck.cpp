#include "meshforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "meshforge/conv.hpp"
#include "meshforge/decimate.hpp"
#include "meshforge/pooling.hpp"
#include "meshforge/synthetic.hpp"

namespace meshforge {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

namespace {

using Index = Eigen::Index;

template <typename M>
void fill_uniform(M& m, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<typename M::Scalar>(d(rng));
}

class Tally {
 public:
  explicit Tally(double floor) : floor_(floor) {}
  void add(const std::string& op, double analytic, double numeric) {
    const double err = relative_error(analytic, numeric, floor_);
    auto& r = slot(op);
    r.max_relative_error = std::max(r.max_relative_error, err);
    ++r.entries;
  }
  GradcheckResult& slot(const std::string& op) {
    auto it = index_.find(op);
    if (it == index_.end()) {
      it = index_.emplace(op, results_.size()).first;
      results_.push_back({op, 0.0, 0});
    }
    return results_[it->second];
  }
  std::vector<GradcheckResult> take() { return std::move(results_); }

 private:
  double floor_;
  std::map<std::string, std::size_t> index_;
  std::vector<GradcheckResult> results_;
};

// <g, f(+h) - f(-h)> / 2h with the outputs differenced entrywise first.
template <typename T, typename Out>
double central_difference(T& param, double h, const Tensor<T>& upstream, Out&& forward) {
  const T saved = param;
  param = static_cast<T>(saved + h);
  const Tensor<T> plus = forward();
  param = static_cast<T>(saved - h);
  const Tensor<T> minus = forward();
  param = saved;
  double acc = 0.0;
  for (Index i = 0; i < upstream.size(); ++i)
    acc += static_cast<double>(upstream.data()[i]) *
           (static_cast<double>(plus.data()[i]) - static_cast<double>(minus.data()[i]));
  return acc / (2.0 * h);
}

template <typename T, typename Out>
void check_tensor(Tally& tally, const std::string& op, Tensor<T>& param, const Tensor<T>& analytic, double h,
                  const Tensor<T>& upstream, Out&& forward) {
  tally.slot(op);
  for (Index i = 0; i < param.size(); ++i) {
    const double numeric = central_difference(param.data()[i], h, upstream, forward);
    tally.add(op, static_cast<double>(analytic.data()[i]), numeric);
  }
}

template <typename T>
DepthwiseKernel<T> random_kernel(int filters, int channels, int multiplier, std::mt19937_64& rng) {
  auto k = DepthwiseKernel<T>::zeros(filters, channels, multiplier);
  fill_uniform(k.weights, rng);
  return k;
}

SphereGMM random_gmm(int components, std::mt19937_64& rng) {
  SphereGMM g = SphereGMM::regular(components);
  std::uniform_real_distribution<double> sigma(0.4, 1.2);
  for (double& s : g.sigmas) s = sigma(rng);
  g.train_means = true;
  return g;
}

template <typename T>
TexturedFacetFeatures<T> random_textures(std::size_t facets, int channels, std::mt19937_64& rng) {
  TexturedFacetFeatures<T> tex;
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t f = 0; f < facets; ++f) {
    const int n = count(rng);
    for (int s = 0; s < n; ++s) {
      double a = u(rng), b = u(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      tex.coords.push_back({a, b, 1.0 - a - b});
    }
    tex.offsets.push_back(static_cast<int>(tex.coords.size()));
  }
  tex.features.resize(static_cast<Index>(tex.coords.size()), channels);
  fill_uniform(tex.features, rng);
  return tex;
}

template <typename T>
void run_convolutions(const GradcheckOptions& opt, Tally& tally, std::mt19937_64& rng, int level) {
  const double h = opt.eps;
  const int c = opt.channels, lambda = opt.multiplier;
  TriMesh mesh = random_small_mesh(rng(), c, level > 0);
  const MeshTopology topo = MeshTopology::of(mesh);
  const std::vector<Vec3> normals = facet_normals(mesh);
  std::uniform_int_distribution<int> small(1, 3);
  const BarycentricPlan plan = build_barycentric_plan(facet_areas(mesh), small(rng), small(rng));
  const FacetGather gather = FacetGather::per_vertex(topo);
  Tensor<T> features = mesh.features.cast<T>();

  {  // vertex2facet
    auto kernel = random_kernel<T>(3, c, lambda, rng);
    Tensor<T> up(static_cast<Index>(topo.num_facets()), c * lambda);
    fill_uniform(up, rng);
    const auto grad = vertex2facet_backward(topo, features, kernel, plan, up);
    auto fwd = [&] { return vertex2facet_forward(topo, features, kernel, plan); };
    check_tensor(tally, "vertex2facet.features", features, grad.features, h, up, fwd);
    check_tensor(tally, "vertex2facet.weights", kernel.weights, grad.weights, h, up, fwd);
  }
  {  // facet2facet
    auto tex = random_textures<T>(topo.num_facets(), c, rng);
    auto kernel = random_kernel<T>(3, c, lambda, rng);
    Tensor<T> up(static_cast<Index>(topo.num_facets()), c * lambda);
    fill_uniform(up, rng);
    const auto grad = facet2facet_backward(tex, kernel, up);
    auto fwd = [&] { return facet2facet_forward(tex, kernel); };
    check_tensor(tally, "facet2facet.features", tex.features, grad.features, h, up, fwd);
    check_tensor(tally, "facet2facet.weights", kernel.weights, grad.weights, h, up, fwd);
  }
  {  // facet2vertex, including the mixture parameters
    SphereGMM gmm = random_gmm(opt.components, rng);
    auto kernel = random_kernel<T>(opt.components, c, lambda, rng);
    Tensor<T> facet_features(static_cast<Index>(topo.num_facets()), c);
    fill_uniform(facet_features, rng);
    Tensor<T> up(static_cast<Index>(topo.num_vertices), c * lambda);
    fill_uniform(up, rng);
    const auto grad = facet2vertex_backward(gather, facet_features, kernel, normals, gmm, up);
    auto fwd = [&] {
      const Tensor<T> pi = gmm_coefficients_unchecked(normals, gmm).template cast<T>();
      return facet2vertex_forward(gather, facet_features, kernel, pi);
    };
    check_tensor(tally, "facet2vertex.features", facet_features, grad.features, h, up, fwd);
    check_tensor(tally, "facet2vertex.weights", kernel.weights, grad.weights, h, up, fwd);
    tally.slot("facet2vertex.sigmas");
    for (std::size_t t = 0; t < gmm.components(); ++t) {
      auto fwd_d = [&] {
        return facet2vertex_forward(gather, facet_features, kernel,
                                    Tensor<T>(gmm_coefficients_unchecked(normals, gmm).template cast<T>()));
      };
      // sigma and mean live in double; difference them there
      const double saved = gmm.sigmas[t];
      gmm.sigmas[t] = saved + h;
      const Tensor<T> plus = fwd_d();
      gmm.sigmas[t] = saved - h;
      const Tensor<T> minus = fwd_d();
      gmm.sigmas[t] = saved;
      double numeric = 0.0;
      for (Index i = 0; i < up.size(); ++i)
        numeric += static_cast<double>(up.data()[i]) *
                   (static_cast<double>(plus.data()[i]) - static_cast<double>(minus.data()[i]));
      tally.add("facet2vertex.sigmas", grad.mixture.sigmas[t], numeric / (2.0 * h));

      for (int axis = 0; axis < 3; ++axis) {
        const double m0 = gmm.means[t][axis];
        gmm.means[t][axis] = m0 + h;
        const Tensor<T> mp = fwd_d();
        gmm.means[t][axis] = m0 - h;
        const Tensor<T> mm = fwd_d();
        gmm.means[t][axis] = m0;
        double n = 0.0;
        for (Index i = 0; i < up.size(); ++i)
          n += static_cast<double>(up.data()[i]) * (static_cast<double>(mp.data()[i]) - static_cast<double>(mm.data()[i]));
        tally.add("facet2vertex.means", grad.mixture.means[t][axis], n / (2.0 * h));
      }
    }
  }
  {  // vertex2vertex
    VertexToVertex<T> conv{random_kernel<T>(3, c, lambda, rng), random_kernel<T>(opt.components, c * lambda, 1, rng)};
    const Tensor<T> pi = gmm_coefficients(normals, random_gmm(opt.components, rng)).template cast<T>();
    Tensor<T> up(static_cast<Index>(topo.num_vertices), c * lambda);
    fill_uniform(up, rng);
    const auto state = vertex2vertex_forward(topo, gather, plan, pi, conv, features);
    const auto grad = vertex2vertex_backward(topo, gather, plan, pi, conv, features, state, up);
    auto fwd = [&] { return vertex2vertex_forward(topo, gather, plan, pi, conv, features).output; };
    check_tensor(tally, "vertex2vertex.features", features, grad.features, h, up, fwd);
    check_tensor(tally, "vertex2vertex.weights", conv.to_facet.weights, grad.to_facet_weights, h, up, fwd);
    check_tensor(tally, "vertex2vertex.weights", conv.to_vertex.weights, grad.to_vertex_weights, h, up, fwd);
  }
  {  // 1x1 layer
    Tensor<T> w(c, 4);
    fill_uniform(w, rng);
    Tensor<T> up(features.rows(), 4);
    fill_uniform(up, rng);
    const auto grad = pointwise_backward(features, w, up);
    auto fwd = [&] { return pointwise_forward(features, w); };
    check_tensor(tally, "pointwise.features", features, grad.features, h, up, fwd);
    check_tensor(tally, "pointwise.weights", w, grad.weights, h, up, fwd);
  }
}

void run_pooling(const GradcheckOptions& opt, Tally& tally, std::mt19937_64& rng, int level) {
  const double h = opt.eps;
  TriMesh mesh = random_small_mesh(rng(), opt.channels, level > 0);
  DecimationConfig cfg;
  cfg.target_vertices = static_cast<int>((mesh.num_vertices() + 1) / 2);
  cfg.shuffle_seed = rng();
  const DecimationResult dec = decimate_parallel(mesh, cfg);
  const ClusterMap clusters = ClusterMap::of(dec);
  // evenly spaced distinct values so a step of eps cannot reorder a max
  FeatureMatrix x(mesh.features.rows(), mesh.features.cols());
  std::vector<double> levels(static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < levels.size(); ++i)
    levels[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(levels.size(), 2) - 1);
  std::shuffle(levels.begin(), levels.end(), rng);
  std::copy(levels.begin(), levels.end(), x.data());
  std::vector<double> weights(mesh.num_vertices());
  std::uniform_real_distribution<double> wd(0.5, 1.5);
  for (double& w : weights) w = wd(rng);

  const std::pair<PoolMode, const char*> modes[] = {{PoolMode::sum, "pool.sum"},
                                                    {PoolMode::average, "pool.average"},
                                                    {PoolMode::weighted, "pool.weighted"},
                                                    {PoolMode::max, "pool.max"}};
  for (const auto& [mode, name] : modes) {
    const std::span<const double> w = mode == PoolMode::weighted ? std::span<const double>(weights) : std::span<const double>();
    const PoolResult base = pool(x, clusters, mode, w);
    FeatureMatrix up(base.values.rows(), base.values.cols());
    fill_uniform(up, rng);
    const FeatureMatrix grad = pool_backward(up, clusters, mode, base.argmax, w);
    check_tensor(tally, name, x, grad, h, up, [&] { return pool(x, clusters, mode, w).values; });
  }
  FeatureMatrix coarse(static_cast<Index>(clusters.clusters), x.cols());
  fill_uniform(coarse, rng);
  FeatureMatrix up(x.rows(), x.cols());
  fill_uniform(up, rng);
  const FeatureMatrix grad = unpool_backward(up, clusters);
  check_tensor(tally, "unpool", coarse, grad, h, up, [&] { return unpool(coarse, clusters); });
}

}  // namespace

std::vector<GradcheckResult> run_gradchecks(const GradcheckOptions& options) {
  if (options.cases < 1) throw std::invalid_argument("gradcheck needs at least one case");
  if (options.sizes.empty()) throw std::invalid_argument("gradcheck needs at least one size");
  if (!(options.eps > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (options.channels < 0 || options.multiplier < 1 || options.components < 1)
    throw std::invalid_argument("gradcheck shape parameters out of range");
  std::mt19937_64 rng(options.seed);
  Tally tally(options.floor > 0.0 ? options.floor : options.single_precision ? 1e-2 : 1e-6);
  for (int i = 0; i < options.cases; ++i) {
    const int level = options.sizes[static_cast<std::size_t>(i) % options.sizes.size()];
    if (options.single_precision)
      run_convolutions<float>(options, tally, rng, level);
    else
      run_convolutions<double>(options, tally, rng, level);
    run_pooling(options, tally, rng, level);
  }
  return tally.take();
}

}  // namespace meshforge
