#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meshforge/conv.hpp"
#include "meshforge/gmm.hpp"

namespace meshforge {

/// Flat binary store for kernel weights and mixture parameters.
///
/// Layout (little-endian): "MFCK", u32 version, i32 T, i32 C_in, i32 lambda,
/// u32 array count, then per array u32 name length, name bytes, u64 rows,
/// u64 cols and rows*cols f64 values in row-major order.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  struct Array {
    std::string name;
    Tensor<double> values;
  };

  int components = 0;
  int channels = 0;
  int multiplier = 1;
  std::vector<Array> arrays;

  /// Replaces an array of the same name.
  void put(const std::string& name, const Tensor<double>& values);
  /// Throws std::out_of_range for unknown names.
  const Tensor<double>& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// Stores "gmm.means" (T x 3) and "gmm.sigmas" (1 x T).
  void put_gmm(const SphereGMM& gmm);
  SphereGMM get_gmm() const;

  template <typename T>
  void put_kernel(const std::string& name, const DepthwiseKernel<T>& kernel) {
    put(name, kernel.weights.template cast<double>());
  }
  /// The multiplier is taken from the header; channels follow from the width.
  template <typename T>
  DepthwiseKernel<T> get_kernel(const std::string& name) const {
    const Tensor<double>& w = get(name);
    DepthwiseKernel<T> k;
    k.filters = static_cast<int>(w.rows());
    k.multiplier = multiplier;
    k.channels = multiplier > 0 ? static_cast<int>(w.cols()) / multiplier : 0;
    k.weights = w.template cast<T>();
    return k;
  }
};

/// Throws std::runtime_error on I/O failure or a malformed file.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace meshforge
