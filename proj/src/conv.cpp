#include "meshforge/conv.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

#include "meshforge/parallel.hpp"

namespace meshforge {
namespace {

using Index = Eigen::Index;

template <typename T>
void check_kernel(const DepthwiseKernel<T>& k, int filters, Index channels, const char* op) {
  const std::string name(op);
  if (k.filters != filters) throw std::invalid_argument(name + ": expected " + std::to_string(filters) + " filters");
  if (k.channels != channels) throw std::invalid_argument(name + ": kernel channels do not match the input");
  if (k.multiplier < 1) throw std::invalid_argument(name + ": channel multiplier must be positive");
  if (k.weights.rows() != filters || k.weights.cols() != Index{k.channels} * k.multiplier)
    throw std::invalid_argument(name + ": weight matrix has the wrong shape");
}

void check_rows(Index rows, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(rows) != expected) throw std::invalid_argument(std::string(what) + ": row count mismatch");
}

// (1/K) sum_k xi_k xi_k^T for the facet's samples.
Eigen::Matrix3d moment(std::span<const Barycentric> coords) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const Barycentric& b : coords)
    for (int s = 0; s < 3; ++s)
      for (int r = 0; r < 3; ++r) m(s, r) += b[s] * b[r];
  return m / static_cast<double>(coords.size());
}

// Per-chunk accumulator for weight gradients.
template <typename T>
Tensor<T> reduce_weights(std::size_t items, Index filters, Index cols,
                         const std::function<void(std::size_t, std::size_t, Tensor<T>&)>& body) {
  const Tensor<T> zero = Tensor<T>::Zero(filters, cols);
  return deterministic_reduce(items, 512, zero, body, [](Tensor<T>& into, const Tensor<T>& part) { into += part; });
}

}  // namespace

template <typename T>
DepthwiseKernel<T> DepthwiseKernel<T>::zeros(int filters, int channels, int multiplier) {
  DepthwiseKernel k;
  k.filters = filters;
  k.channels = channels;
  k.multiplier = multiplier;
  k.weights = Tensor<T>::Zero(filters, Index{channels} * multiplier);
  return k;
}

MeshTopology MeshTopology::of(const TriMesh& mesh) {
  MeshTopology t;
  t.num_vertices = mesh.num_vertices();
  t.facets = mesh.facets;
  t.adjacency = vertex_facet_adjacency(mesh);
  return t;
}

namespace {

FacetGather finish_gather(std::size_t rows, std::size_t num_facets, std::vector<int> offsets, std::vector<int> facets) {
  FacetGather g;
  g.outputs = rows;
  g.num_facets = num_facets;
  g.offsets = std::move(offsets);
  g.facets = std::move(facets);
  g.facet_offsets.assign(num_facets + 1, 0);
  for (int f : g.facets) ++g.facet_offsets[static_cast<std::size_t>(f) + 1];
  for (std::size_t f = 0; f < num_facets; ++f) g.facet_offsets[f + 1] += g.facet_offsets[f];
  g.facet_rows.resize(g.facets.size());
  std::vector<int> cursor(g.facet_offsets.begin(), g.facet_offsets.end() - 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (int e = g.offsets[r]; e < g.offsets[r + 1]; ++e)
      g.facet_rows[static_cast<std::size_t>(cursor[static_cast<std::size_t>(g.facets[e])]++)] = static_cast<int>(r);
  return g;
}

}  // namespace

FacetGather FacetGather::per_vertex(const MeshTopology& topology, std::span<const char> exclude) {
  if (!exclude.empty() && exclude.size() != topology.num_facets())
    throw std::invalid_argument("facet exclusion mask has the wrong length");
  std::vector<int> offsets{0}, facets;
  offsets.reserve(topology.num_vertices + 1);
  facets.reserve(topology.adjacency.facets.size());
  for (std::size_t v = 0; v < topology.num_vertices; ++v) {
    for (int f : topology.adjacency.of(v))
      if (exclude.empty() || !exclude[static_cast<std::size_t>(f)]) facets.push_back(f);
    offsets.push_back(static_cast<int>(facets.size()));
  }
  return finish_gather(topology.num_vertices, topology.num_facets(), std::move(offsets), std::move(facets));
}

FacetGather FacetGather::strided(const MeshTopology& topology, std::span<const int> vertex_to_row, std::size_t rows) {
  if (vertex_to_row.size() != topology.num_vertices)
    throw std::invalid_argument("vertex-to-row map must cover every input vertex");
  std::vector<std::vector<int>> per_row(rows);
  for (std::size_t v = 0; v < topology.num_vertices; ++v) {
    const int r = vertex_to_row[v];
    if (r < 0) continue;
    if (static_cast<std::size_t>(r) >= rows) throw std::invalid_argument("vertex-to-row entry out of range");
    for (int f : topology.adjacency.of(v)) per_row[static_cast<std::size_t>(r)].push_back(f);
  }
  std::vector<int> offsets{0}, facets;
  for (auto& list : per_row) {
    // a facet shared by two members of the same cluster counts twice
    std::sort(list.begin(), list.end());
    facets.insert(facets.end(), list.begin(), list.end());
    offsets.push_back(static_cast<int>(facets.size()));
  }
  return finish_gather(rows, topology.num_facets(), std::move(offsets), std::move(facets));
}

std::vector<int> FacetGather::empty_rows() const {
  std::vector<int> out;
  for (std::size_t r = 0; r < outputs; ++r)
    if (count(r) == 0) out.push_back(static_cast<int>(r));
  return out;
}

// ------------------------------------------------------------ vertex2facet

template <typename T>
Tensor<T> vertex2facet_forward(const MeshTopology& topology, const Tensor<T>& vertex_features,
                               const DepthwiseKernel<T>& kernel, const BarycentricPlan& plan) {
  check_kernel(kernel, 3, vertex_features.cols(), "vertex2facet");
  check_rows(vertex_features.rows(), topology.num_vertices, "vertex2facet features");
  if (plan.num_facets() != topology.num_facets()) throw std::invalid_argument("vertex2facet: plan does not match the facets");
  const Index c_in = kernel.channels, lambda = kernel.multiplier;
  Tensor<T> out(static_cast<Index>(topology.num_facets()), c_in * lambda);

  parallel_for(
      topology.num_facets(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
          const Eigen::Matrix3d m = moment(plan.of(f));
          const Facet& tri = topology.facets[f];
          for (Index c = 0; c < c_in; ++c) {
            T blended[3];
            for (int s = 0; s < 3; ++s) {
              double acc = 0.0;
              for (int r = 0; r < 3; ++r) acc += m(s, r) * static_cast<double>(vertex_features(tri[r], c));
              blended[s] = static_cast<T>(acc);
            }
            for (Index l = 0; l < lambda; ++l) {
              const Index col = c * lambda + l;
              out(static_cast<Index>(f), col) = kernel.weights(0, col) * blended[0] +
                                                kernel.weights(1, col) * blended[1] +
                                                kernel.weights(2, col) * blended[2];
            }
          }
        }
      },
      256);
  return out;
}

template <typename T>
DepthwiseGradient<T> vertex2facet_backward(const MeshTopology& topology, const Tensor<T>& vertex_features,
                                           const DepthwiseKernel<T>& kernel, const BarycentricPlan& plan,
                                           const Tensor<T>& grad_output) {
  check_kernel(kernel, 3, vertex_features.cols(), "vertex2facet");
  check_rows(grad_output.rows(), topology.num_facets(), "vertex2facet gradient");
  const Index c_in = kernel.channels, lambda = kernel.multiplier, cols = c_in * lambda;
  const std::size_t m_count = topology.num_facets();

  // corner[f] holds dL/dI for the three corners of f, C values each
  Tensor<T> corner(static_cast<Index>(m_count), 3 * c_in);
  std::vector<Eigen::Matrix3d> moments(m_count);
  parallel_for(
      m_count,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
          moments[f] = moment(plan.of(f));
          const Index row = static_cast<Index>(f);
          for (Index c = 0; c < c_in; ++c) {
            double g[3] = {0.0, 0.0, 0.0};
            for (Index l = 0; l < lambda; ++l) {
              const Index col = c * lambda + l;
              for (int s = 0; s < 3; ++s) g[s] += static_cast<double>(kernel.weights(s, col) * grad_output(row, col));
            }
            for (int r = 0; r < 3; ++r)
              corner(row, r * c_in + c) =
                  static_cast<T>(moments[f](0, r) * g[0] + moments[f](1, r) * g[1] + moments[f](2, r) * g[2]);
          }
        }
      },
      256);

  DepthwiseGradient<T> out;
  out.features = Tensor<T>::Zero(static_cast<Index>(topology.num_vertices), c_in);
  parallel_for(topology.num_vertices, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t v = lo; v < hi; ++v)
      for (int f : topology.adjacency.of(v)) {
        const Facet& tri = topology.facets[static_cast<std::size_t>(f)];
        for (int r = 0; r < 3; ++r)
          if (tri[r] == static_cast<int>(v))
            out.features.row(static_cast<Index>(v)) += corner.block(f, r * c_in, 1, c_in);
      }
  });

  out.weights = reduce_weights<T>(m_count, 3, cols, [&](std::size_t lo, std::size_t hi, Tensor<T>& acc) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Facet& tri = topology.facets[f];
      const Index row = static_cast<Index>(f);
      for (Index c = 0; c < c_in; ++c)
        for (int s = 0; s < 3; ++s) {
          double blended = 0.0;
          for (int r = 0; r < 3; ++r) blended += moments[f](s, r) * static_cast<double>(vertex_features(tri[r], c));
          for (Index l = 0; l < lambda; ++l) {
            const Index col = c * lambda + l;
            acc(s, col) += static_cast<T>(blended) * grad_output(row, col);
          }
        }
    }
  });
  return out;
}

// ------------------------------------------------------------ facet2facet

namespace {

template <typename T>
void check_textures(const TexturedFacetFeatures<T>& tex) {
  if (tex.offsets.empty() || tex.offsets.front() != 0) throw std::invalid_argument("facet2facet: bad sample offsets");
  if (static_cast<std::size_t>(tex.offsets.back()) != tex.coords.size() ||
      static_cast<Index>(tex.coords.size()) != tex.features.rows())
    throw std::invalid_argument("facet2facet: samples, coordinates and feature rows disagree");
  for (std::size_t f = 0; f < tex.num_facets(); ++f)
    if (tex.offsets[f + 1] <= tex.offsets[f]) throw std::invalid_argument("facet2facet: every facet needs a sample");
}

// (1/Gamma) sum_g xi_gs F_g[c], written into blended (3 x C)
template <typename T>
void blend_samples(const TexturedFacetFeatures<T>& tex, std::size_t f, Index c_in, Eigen::MatrixXd& blended) {
  blended.setZero(3, c_in);
  const int lo = tex.offsets[f], hi = tex.offsets[f + 1];
  for (int g = lo; g < hi; ++g)
    for (int s = 0; s < 3; ++s)
      blended.row(s) += tex.coords[static_cast<std::size_t>(g)][s] * tex.features.row(g).template cast<double>();
  blended /= static_cast<double>(hi - lo);
}

}  // namespace

template <typename T>
Tensor<T> facet2facet_forward(const TexturedFacetFeatures<T>& textures, const DepthwiseKernel<T>& kernel) {
  check_textures(textures);
  check_kernel(kernel, 3, textures.features.cols(), "facet2facet");
  const Index c_in = kernel.channels, lambda = kernel.multiplier;
  Tensor<T> out(static_cast<Index>(textures.num_facets()), c_in * lambda);
  parallel_for(
      textures.num_facets(),
      [&](std::size_t lo, std::size_t hi) {
        Eigen::MatrixXd blended;
        for (std::size_t f = lo; f < hi; ++f) {
          blend_samples(textures, f, c_in, blended);
          for (Index c = 0; c < c_in; ++c)
            for (Index l = 0; l < lambda; ++l) {
              const Index col = c * lambda + l;
              T acc = 0;
              for (int s = 0; s < 3; ++s) acc += kernel.weights(s, col) * static_cast<T>(blended(s, c));
              out(static_cast<Index>(f), col) = acc;
            }
        }
      },
      256);
  return out;
}

template <typename T>
DepthwiseGradient<T> facet2facet_backward(const TexturedFacetFeatures<T>& textures, const DepthwiseKernel<T>& kernel,
                                          const Tensor<T>& grad_output) {
  check_textures(textures);
  check_kernel(kernel, 3, textures.features.cols(), "facet2facet");
  check_rows(grad_output.rows(), textures.num_facets(), "facet2facet gradient");
  const Index c_in = kernel.channels, lambda = kernel.multiplier, cols = c_in * lambda;

  DepthwiseGradient<T> out;
  out.features.resize(textures.features.rows(), c_in);
  parallel_for(
      textures.num_facets(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t f = lo; f < hi; ++f) {
          const int g_lo = textures.offsets[f], g_hi = textures.offsets[f + 1];
          const double inv = 1.0 / static_cast<double>(g_hi - g_lo);
          for (Index c = 0; c < c_in; ++c) {
            double gs[3] = {0.0, 0.0, 0.0};
            for (Index l = 0; l < lambda; ++l) {
              const Index col = c * lambda + l;
              for (int s = 0; s < 3; ++s)
                gs[s] += static_cast<double>(kernel.weights(s, col) * grad_output(static_cast<Index>(f), col));
            }
            for (int g = g_lo; g < g_hi; ++g) {
              const Barycentric& xi = textures.coords[static_cast<std::size_t>(g)];
              out.features(g, c) = static_cast<T>(inv * (xi[0] * gs[0] + xi[1] * gs[1] + xi[2] * gs[2]));
            }
          }
        }
      },
      256);

  out.weights = reduce_weights<T>(textures.num_facets(), 3, cols, [&](std::size_t lo, std::size_t hi, Tensor<T>& acc) {
    Eigen::MatrixXd blended;
    for (std::size_t f = lo; f < hi; ++f) {
      blend_samples(textures, f, c_in, blended);
      for (Index c = 0; c < c_in; ++c)
        for (Index l = 0; l < lambda; ++l) {
          const Index col = c * lambda + l;
          for (int s = 0; s < 3; ++s)
            acc(s, col) += static_cast<T>(blended(s, c)) * grad_output(static_cast<Index>(f), col);
        }
    }
  });
  return out;
}

// ------------------------------------------------------------ facet2vertex

namespace {

template <typename T>
void check_f2v(const FacetGather& gather, const Tensor<T>& facet_features, const DepthwiseKernel<T>& kernel,
               const Tensor<T>& coefficients) {
  check_kernel(kernel, static_cast<int>(coefficients.cols()), facet_features.cols(), "facet2vertex");
  check_rows(facet_features.rows(), gather.num_facets, "facet2vertex features");
  check_rows(coefficients.rows(), gather.num_facets, "facet2vertex coefficients");
}

// W_i = sum_t pi_it w_t, one row per facet
template <typename T>
Tensor<T> effective_weights(const DepthwiseKernel<T>& kernel, const Tensor<T>& coefficients) {
  Tensor<T> w(coefficients.rows(), kernel.weights.cols());
  parallel_for(
      static_cast<std::size_t>(coefficients.rows()),
      [&](std::size_t lo, std::size_t hi) {
        const Index n = static_cast<Index>(hi - lo);
        w.middleRows(static_cast<Index>(lo), n).noalias() =
            coefficients.middleRows(static_cast<Index>(lo), n) * kernel.weights;
      },
      1024);
  return w;
}

}  // namespace

template <typename T>
Tensor<T> facet2vertex_forward(const FacetGather& gather, const Tensor<T>& facet_features,
                               const DepthwiseKernel<T>& kernel, const Tensor<T>& coefficients) {
  check_f2v(gather, facet_features, kernel, coefficients);
  const Index c_in = kernel.channels, lambda = kernel.multiplier;
  const Tensor<T> w_eff = effective_weights(kernel, coefficients);
  Tensor<T> out = Tensor<T>::Zero(static_cast<Index>(gather.outputs), c_in * lambda);
  parallel_for(gather.outputs, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const std::size_t n = gather.count(r);
      if (n == 0) continue;
      const Index row = static_cast<Index>(r);
      for (int e = gather.offsets[r]; e < gather.offsets[r + 1]; ++e) {
        const Index f = gather.facets[static_cast<std::size_t>(e)];
        for (Index c = 0; c < c_in; ++c) {
          const T j = facet_features(f, c);
          for (Index l = 0; l < lambda; ++l) out(row, c * lambda + l) += w_eff(f, c * lambda + l) * j;
        }
      }
      out.row(row) /= static_cast<T>(n);
    }
  });
  return out;
}

template <typename T>
Facet2VertexGradient<T> facet2vertex_backward(const FacetGather& gather, const Tensor<T>& facet_features,
                                              const DepthwiseKernel<T>& kernel, const Tensor<T>& coefficients,
                                              const Tensor<T>& grad_output) {
  check_f2v(gather, facet_features, kernel, coefficients);
  check_rows(grad_output.rows(), gather.outputs, "facet2vertex gradient");
  const Index c_in = kernel.channels, lambda = kernel.multiplier, cols = c_in * lambda;
  const Index t_count = kernel.filters;
  const Tensor<T> w_eff = effective_weights(kernel, coefficients);

  // G_i = sum over the rows fed by facet i of g_r / n_r
  Tensor<T> spread(static_cast<Index>(gather.num_facets), cols);
  parallel_for(gather.num_facets, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Index row = static_cast<Index>(f);
      spread.row(row).setZero();
      for (int e = gather.facet_offsets[f]; e < gather.facet_offsets[f + 1]; ++e) {
        const auto r = static_cast<std::size_t>(gather.facet_rows[static_cast<std::size_t>(e)]);
        spread.row(row) += grad_output.row(static_cast<Index>(r)) / static_cast<T>(gather.count(r));
      }
    }
  });

  Facet2VertexGradient<T> out;
  out.features.resize(static_cast<Index>(gather.num_facets), c_in);
  out.coefficients.resize(static_cast<Index>(gather.num_facets), t_count);
  // after this pass spread holds J_i[c] * G_i[c, m]
  parallel_for(gather.num_facets, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Index row = static_cast<Index>(f);
      for (Index c = 0; c < c_in; ++c) {
        T acc = 0;
        const T j = facet_features(row, c);
        for (Index l = 0; l < lambda; ++l) {
          const Index col = c * lambda + l;
          acc += w_eff(row, col) * spread(row, col);
          spread(row, col) *= j;
        }
        out.features(row, c) = acc;
      }
      for (Index t = 0; t < t_count; ++t) out.coefficients(row, t) = kernel.weights.row(t).dot(spread.row(row));
    }
  });

  out.weights = reduce_weights<T>(gather.num_facets, t_count, cols, [&](std::size_t lo, std::size_t hi, Tensor<T>& acc) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Index row = static_cast<Index>(f);
      for (Index t = 0; t < t_count; ++t) acc.row(t) += coefficients(row, t) * spread.row(row);
    }
  });
  return out;
}

template <typename T>
Facet2VertexGradient<T> facet2vertex_backward(const FacetGather& gather, const Tensor<T>& facet_features,
                                              const DepthwiseKernel<T>& kernel, std::span<const Vec3> normals,
                                              const SphereGMM& gmm, const Tensor<T>& grad_output) {
  const Tensor<double> pi = gmm_coefficients(normals, gmm);
  auto out = facet2vertex_backward(gather, facet_features, kernel, Tensor<T>(pi.template cast<T>()), grad_output);
  out.mixture = gmm_coefficients_backward(normals, gmm, pi, out.coefficients.template cast<double>());
  return out;
}

// ------------------------------------------------------------ pointwise

template <typename T>
Tensor<T> pointwise_forward(const Tensor<T>& x, const Tensor<T>& weights) {
  if (x.cols() != weights.rows()) throw std::invalid_argument("pointwise: input channels do not match the weights");
  Tensor<T> out(x.rows(), weights.cols());
  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t lo, std::size_t hi) {
    const Index n = static_cast<Index>(hi - lo);
    out.middleRows(static_cast<Index>(lo), n).noalias() = x.middleRows(static_cast<Index>(lo), n) * weights;
  });
  return out;
}

template <typename T>
DepthwiseGradient<T> pointwise_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& grad_output) {
  if (x.cols() != weights.rows() || grad_output.cols() != weights.cols() || grad_output.rows() != x.rows())
    throw std::invalid_argument("pointwise: gradient shape mismatch");
  DepthwiseGradient<T> out;
  out.features.resize(x.rows(), x.cols());
  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t lo, std::size_t hi) {
    const Index n = static_cast<Index>(hi - lo);
    out.features.middleRows(static_cast<Index>(lo), n).noalias() =
        grad_output.middleRows(static_cast<Index>(lo), n) * weights.transpose();
  });
  const Tensor<T> zero = Tensor<T>::Zero(weights.rows(), weights.cols());
  out.weights = deterministic_reduce(
      static_cast<std::size_t>(x.rows()), 1024, zero,
      [&](std::size_t lo, std::size_t hi, Tensor<T>& acc) {
        const Index n = static_cast<Index>(hi - lo);
        acc.noalias() += x.middleRows(static_cast<Index>(lo), n).transpose() *
                         grad_output.middleRows(static_cast<Index>(lo), n);
      },
      [](Tensor<T>& into, const Tensor<T>& part) { into += part; });
  return out;
}

// ------------------------------------------------------------ vertex2vertex

template <typename T>
VertexToVertexState<T> vertex2vertex_forward(const MeshTopology& topology, const FacetGather& gather,
                                             const BarycentricPlan& plan, const Tensor<T>& coefficients,
                                             const VertexToVertex<T>& conv, const Tensor<T>& vertex_features) {
  VertexToVertexState<T> state;
  state.facet_features = vertex2facet_forward(topology, vertex_features, conv.to_facet, plan);
  state.output = facet2vertex_forward(gather, state.facet_features, conv.to_vertex, coefficients);
  return state;
}

template <typename T>
VertexToVertexGradient<T> vertex2vertex_backward(const MeshTopology& topology, const FacetGather& gather,
                                                 const BarycentricPlan& plan, const Tensor<T>& coefficients,
                                                 const VertexToVertex<T>& conv, const Tensor<T>& vertex_features,
                                                 const VertexToVertexState<T>& state, const Tensor<T>& grad_output) {
  auto upper = facet2vertex_backward(gather, state.facet_features, conv.to_vertex, coefficients, grad_output);
  auto lower = vertex2facet_backward(topology, vertex_features, conv.to_facet, plan, upper.features);
  VertexToVertexGradient<T> out;
  out.features = std::move(lower.features);
  out.to_facet_weights = std::move(lower.weights);
  out.to_vertex_weights = std::move(upper.weights);
  out.coefficients = std::move(upper.coefficients);
  return out;
}

std::vector<Vec3> facet_normals(const TriMesh& mesh) {
  const auto geo = compute_facet_geometry(mesh);
  std::vector<Vec3> out(geo.size());
  for (std::size_t f = 0; f < geo.size(); ++f) out[f] = geo[f].normal;
  return out;
}

std::vector<double> facet_areas(const TriMesh& mesh) {
  const auto geo = compute_facet_geometry(mesh);
  std::vector<double> out(geo.size());
  for (std::size_t f = 0; f < geo.size(); ++f) out[f] = geo[f].area;
  return out;
}

#define MESHFORGE_CONV_INSTANTIATE(T)                                                                               \
  template struct DepthwiseKernel<T>;                                                                               \
  template Tensor<T> vertex2facet_forward(const MeshTopology&, const Tensor<T>&, const DepthwiseKernel<T>&,         \
                                          const BarycentricPlan&);                                                  \
  template DepthwiseGradient<T> vertex2facet_backward(const MeshTopology&, const Tensor<T>&,                        \
                                                      const DepthwiseKernel<T>&, const BarycentricPlan&,            \
                                                      const Tensor<T>&);                                            \
  template Tensor<T> facet2facet_forward(const TexturedFacetFeatures<T>&, const DepthwiseKernel<T>&);               \
  template DepthwiseGradient<T> facet2facet_backward(const TexturedFacetFeatures<T>&, const DepthwiseKernel<T>&,    \
                                                     const Tensor<T>&);                                             \
  template Tensor<T> facet2vertex_forward(const FacetGather&, const Tensor<T>&, const DepthwiseKernel<T>&,          \
                                          const Tensor<T>&);                                                        \
  template Facet2VertexGradient<T> facet2vertex_backward(const FacetGather&, const Tensor<T>&,                      \
                                                         const DepthwiseKernel<T>&, const Tensor<T>&,               \
                                                         const Tensor<T>&);                                         \
  template Facet2VertexGradient<T> facet2vertex_backward(const FacetGather&, const Tensor<T>&,                      \
                                                         const DepthwiseKernel<T>&, std::span<const Vec3>,          \
                                                         const SphereGMM&, const Tensor<T>&);                       \
  template Tensor<T> pointwise_forward(const Tensor<T>&, const Tensor<T>&);                                         \
  template DepthwiseGradient<T> pointwise_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);           \
  template VertexToVertexState<T> vertex2vertex_forward(const MeshTopology&, const FacetGather&,                    \
                                                        const BarycentricPlan&, const Tensor<T>&,                   \
                                                        const VertexToVertex<T>&, const Tensor<T>&);                \
  template VertexToVertexGradient<T> vertex2vertex_backward(                                                        \
      const MeshTopology&, const FacetGather&, const BarycentricPlan&, const Tensor<T>&, const VertexToVertex<T>&,  \
      const Tensor<T>&, const VertexToVertexState<T>&, const Tensor<T>&);

MESHFORGE_CONV_INSTANTIATE(float)
MESHFORGE_CONV_INSTANTIATE(double)

#undef MESHFORGE_CONV_INSTANTIATE

}  // namespace meshforge
