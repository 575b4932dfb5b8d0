#include "meshforge/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "meshforge/parallel.hpp"

namespace meshforge {
namespace {

bool is_zero(const Vec3& n) { return n.x() == 0.0 && n.y() == 0.0 && n.z() == 0.0; }

struct GMMPartial {
  std::vector<double> sigmas;
  std::vector<Vec3> means;
};

}  // namespace

SphereGMM SphereGMM::regular(int components, double sigma) {
  SphereGMM g;
  g.means = default_sphere_means(components);
  g.sigmas.assign(g.means.size(), sigma);
  return g;
}

void validate(const SphereGMM& gmm) {
  if (gmm.means.empty()) throw std::invalid_argument("mixture needs at least one component");
  if (gmm.means.size() != gmm.sigmas.size()) throw std::invalid_argument("means and sigmas differ in length");
  for (const Vec3& m : gmm.means)
    if (std::abs(m.norm() - 1.0) > 1e-9) throw std::invalid_argument("mixture means must be unit vectors");
  for (double s : gmm.sigmas)
    if (!(s > 0.0)) throw std::invalid_argument("mixture sigmas must be positive");
}

std::vector<Vec3> default_sphere_means(int components) {
  if (components <= 0) throw std::invalid_argument("component count must be positive");
  std::vector<Vec3> out;
  if (components == 6 || components == 18) {
    for (int axis = 0; axis < 3; ++axis)
      for (double s : {1.0, -1.0}) {
        Vec3 v = Vec3::Zero();
        v[axis] = s;
        out.push_back(v);
      }
    if (components == 18) {
      const double h = 1.0 / std::numbers::sqrt2;
      for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}})
        for (double sa : {1.0, -1.0})
          for (double sb : {1.0, -1.0}) {
            Vec3 v = Vec3::Zero();
            v[a] = sa * h;
            v[b] = sb * h;
            out.push_back(v.normalized());
          }
    }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int t = 0; t < components; ++t) {
    const double z = components == 1 ? 1.0 : 1.0 - 2.0 * (t + 0.5) / components;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * t;
    out.push_back(Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized());
  }
  return out;
}

Tensor<double> gmm_coefficients(std::span<const Vec3> normals, const SphereGMM& gmm) {
  validate(gmm);
  return gmm_coefficients_unchecked(normals, gmm);
}

Tensor<double> gmm_coefficients_unchecked(std::span<const Vec3> normals, const SphereGMM& gmm) {
  if (gmm.means.empty() || gmm.means.size() != gmm.sigmas.size())
    throw std::invalid_argument("mixture means and sigmas must be non-empty and equal in length");
  const auto m = static_cast<Eigen::Index>(normals.size());
  const auto t_count = static_cast<Eigen::Index>(gmm.components());
  Tensor<double> pi(m, t_count);
  parallel_for(normals.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> logits(static_cast<std::size_t>(t_count));
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      if (is_zero(normals[i])) {
        pi.row(row).setConstant(1.0 / static_cast<double>(t_count));
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (Eigen::Index t = 0; t < t_count; ++t) {
        const double s = gmm.sigmas[t];
        logits[t] = -(normals[i] - gmm.means[t]).squaredNorm() / (s * s);
        top = std::max(top, logits[t]);
      }
      double total = 0.0;
      for (Eigen::Index t = 0; t < t_count; ++t) {
        pi(row, t) = std::exp(logits[t] - top);
        total += pi(row, t);
      }
      pi.row(row) /= total;
    }
  });
  return pi;
}

GMMGradient gmm_coefficients_backward(std::span<const Vec3> normals, const SphereGMM& gmm,
                                      const Tensor<double>& pi, const Tensor<double>& grad_pi) {
  const std::size_t t_count = gmm.components();
  GMMPartial identity;
  identity.sigmas.assign(t_count, 0.0);
  identity.means.assign(t_count, Vec3::Zero());

  // dL/dz_t = -pi_t (g_t - sum_m pi_m g_m); z_t = |n - mu_t|^2 / sigma_t^2.
  GMMPartial total = deterministic_reduce(
      normals.size(), 256, identity,
      [&](std::size_t lo, std::size_t hi, GMMPartial& acc) {
        for (std::size_t i = lo; i < hi; ++i) {
          if (is_zero(normals[i])) continue;
          const auto row = static_cast<Eigen::Index>(i);
          const double mean_g = pi.row(row).dot(grad_pi.row(row));
          for (std::size_t t = 0; t < t_count; ++t) {
            const auto col = static_cast<Eigen::Index>(t);
            const double dz = -pi(row, col) * (grad_pi(row, col) - mean_g);
            const Vec3 diff = normals[i] - gmm.means[t];
            const double s = gmm.sigmas[t];
            acc.sigmas[t] += dz * (-2.0 * diff.squaredNorm() / (s * s * s));
            acc.means[t] += dz * (-2.0 / (s * s)) * diff;
          }
        }
      },
      [&](GMMPartial& into, const GMMPartial& part) {
        for (std::size_t t = 0; t < t_count; ++t) {
          into.sigmas[t] += part.sigmas[t];
          into.means[t] += part.means[t];
        }
      });

  GMMGradient out;
  if (gmm.train_sigmas) out.sigmas = std::move(total.sigmas);
  if (gmm.train_means) out.means = std::move(total.means);
  return out;
}

}  // namespace meshforge
