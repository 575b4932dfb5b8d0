#include "meshforge/pooling.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

#include "meshforge/parallel.hpp"

namespace meshforge {
namespace {

struct Members {
  std::vector<int> offsets;
  std::vector<int> rows;
};

// Members of each cluster in ascending input order.
Members members_of(ClusterMap clusters) {
  Members m;
  m.offsets.assign(clusters.clusters + 1, 0);
  for (int r : clusters.replace) {
    if (r < 0 || static_cast<std::size_t>(r) >= clusters.clusters) throw std::invalid_argument("replace entry out of range");
    ++m.offsets[r + 1];
  }
  std::partial_sum(m.offsets.begin(), m.offsets.end(), m.offsets.begin());
  m.rows.resize(clusters.replace.size());
  std::vector<int> cursor(m.offsets.begin(), m.offsets.end() - 1);
  for (std::size_t i = 0; i < clusters.replace.size(); ++i) m.rows[cursor[clusters.replace[i]]++] = static_cast<int>(i);
  return m;
}

void check_rows(Eigen::Index rows, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(rows) != expected) {
    std::ostringstream msg;
    msg << what << ": expected " << expected << " rows, got " << rows;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

PoolResult pool(const FeatureMatrix& features, ClusterMap clusters, PoolMode mode, std::span<const double> weights) {
  check_rows(features.rows(), clusters.replace.size(), "pool input");
  if (mode == PoolMode::weighted && weights.size() != clusters.replace.size())
    throw std::invalid_argument("weighted pooling needs one weight per input vertex");
  const Members m = members_of(clusters);
  const Eigen::Index channels = features.cols();
  PoolResult out;
  out.values.setZero(static_cast<Eigen::Index>(clusters.clusters), channels);
  if (mode == PoolMode::max) out.argmax.assign(clusters.clusters * static_cast<std::size_t>(channels), -1);

  parallel_for(clusters.clusters, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t o = lo; o < hi; ++o) {
      const int b = m.offsets[o], e = m.offsets[o + 1];
      if (b == e) throw std::logic_error("empty cluster in pooling");
      auto row = out.values.row(static_cast<Eigen::Index>(o));
      switch (mode) {
        case PoolMode::max:
          for (Eigen::Index c = 0; c < channels; ++c) {
            int best = m.rows[b];
            for (int k = b + 1; k < e; ++k)
              if (features(m.rows[k], c) > features(best, c)) best = m.rows[k];
            row(c) = features(best, c);
            out.argmax[o * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] = best;
          }
          break;
        case PoolMode::sum:
        case PoolMode::average:
          for (int k = b; k < e; ++k) row += features.row(m.rows[k]);
          if (mode == PoolMode::average) row /= static_cast<double>(e - b);
          break;
        case PoolMode::weighted: {
          double total = 0.0;
          for (int k = b; k < e; ++k) {
            row += weights[m.rows[k]] * features.row(m.rows[k]);
            total += weights[m.rows[k]];
          }
          row /= total;
          break;
        }
      }
    }
  });
  return out;
}

FeatureMatrix unpool(const FeatureMatrix& coarse, ClusterMap clusters) {
  check_rows(coarse.rows(), clusters.clusters, "unpool input");
  FeatureMatrix fine(static_cast<Eigen::Index>(clusters.replace.size()), coarse.cols());
  parallel_for(clusters.replace.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const int r = clusters.replace[i];
      if (r < 0 || static_cast<std::size_t>(r) >= clusters.clusters) throw std::invalid_argument("replace entry out of range");
      fine.row(static_cast<Eigen::Index>(i)) = coarse.row(r);
    }
  });
  return fine;
}

FeatureMatrix pool_backward(const FeatureMatrix& grad_output, ClusterMap clusters, PoolMode mode,
                            std::span<const int> argmax, std::span<const double> weights) {
  check_rows(grad_output.rows(), clusters.clusters, "pool gradient");
  const Eigen::Index channels = grad_output.cols();
  const std::size_t n = clusters.replace.size();
  FeatureMatrix grad = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), channels);
  switch (mode) {
    case PoolMode::sum:
      return unpool(grad_output, clusters);
    case PoolMode::average: {
      std::vector<int> sizes(clusters.clusters, 0);
      for (int r : clusters.replace) ++sizes[r];
      grad = unpool(grad_output, clusters);
      for (std::size_t i = 0; i < n; ++i) grad.row(static_cast<Eigen::Index>(i)) /= sizes[clusters.replace[i]];
      return grad;
    }
    case PoolMode::weighted: {
      if (weights.size() != n) throw std::invalid_argument("weighted pooling needs one weight per input vertex");
      std::vector<double> totals(clusters.clusters, 0.0);
      for (std::size_t i = 0; i < n; ++i) totals[clusters.replace[i]] += weights[i];
      grad = unpool(grad_output, clusters);
      for (std::size_t i = 0; i < n; ++i) grad.row(static_cast<Eigen::Index>(i)) *= weights[i] / totals[clusters.replace[i]];
      return grad;
    }
    case PoolMode::max: {
      if (argmax.size() != clusters.clusters * static_cast<std::size_t>(channels))
        throw std::invalid_argument("max pooling backward needs the forward argmax");
      // Each (cluster, channel) routes to one input row; rows belong to one cluster.
      for (std::size_t o = 0; o < clusters.clusters; ++o)
        for (Eigen::Index c = 0; c < channels; ++c)
          grad(argmax[o * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)], c) +=
              grad_output(static_cast<Eigen::Index>(o), c);
      return grad;
    }
  }
  return grad;
}

FeatureMatrix unpool_backward(const FeatureMatrix& grad_fine, ClusterMap clusters) {
  return pool(grad_fine, clusters, PoolMode::sum).values;
}

}  // namespace meshforge
