#pragma once

#include <span>
#include <vector>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// Isotropic Gaussian mixture on the unit sphere (Sigma_t = sigma_t^2 I).
struct SphereGMM {
  std::vector<Vec3> means;
  std::vector<double> sigmas;
  bool train_means = false;
  bool train_sigmas = true;

  std::size_t components() const { return means.size(); }

  /// T components centred on default_sphere_means(T) with a shared sigma.
  static SphereGMM regular(int components, double sigma = 0.25);
};

/// Throws std::invalid_argument unless every mean is unit length (1e-9) and every sigma positive.
void validate(const SphereGMM& gmm);

/// Centres spread over the sphere. T = 6: +x, -x, +y, -y, +z, -z. T = 18: those
/// six followed by the edge midpoints (+-1, +-1, 0), (+-1, 0, +-1), (0, +-1, +-1)
/// over sqrt(2), signs enumerated +,+ / +,- / -,+ / -,-. Any other T uses a
/// Fibonacci lattice.
std::vector<Vec3> default_sphere_means(int components);

/// Fuzzy coefficients pi (M x T): softmax over t of -|n - mu_t|^2 / sigma_t^2.
/// Zero normals (degenerate facets) get 1/T.
Tensor<double> gmm_coefficients(std::span<const Vec3> normals, const SphereGMM& gmm);

/// Same softmax without the unit-mean check, for finite differences off the sphere.
Tensor<double> gmm_coefficients_unchecked(std::span<const Vec3> normals, const SphereGMM& gmm);

struct GMMGradient {
  std::vector<double> sigmas;
  std::vector<Vec3> means;
};

/// Pulls dL/dpi back to the mixture parameters. Entries for parameters whose
/// trainable flag is off are left empty.
GMMGradient gmm_coefficients_backward(std::span<const Vec3> normals, const SphereGMM& gmm,
                                      const Tensor<double>& coefficients, const Tensor<double>& grad_coefficients);

}  // namespace meshforge
