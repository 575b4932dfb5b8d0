#include "meshforge/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace meshforge {
namespace {

constexpr char kMagic[4] = {'M', 'F', 'C', 'K'};

template <typename V>
void put_raw(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename V>
V get_raw(std::istream& in) {
  V v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("checkpoint truncated");
  return v;
}

}  // namespace

void Checkpoint::put(const std::string& name, const Tensor<double>& values) {
  for (auto& a : arrays)
    if (a.name == name) {
      a.values = values;
      return;
    }
  arrays.push_back({name, values});
}

const Tensor<double>& Checkpoint::get(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a.values;
  throw std::out_of_range("checkpoint has no array named " + name);
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return true;
  return false;
}

void Checkpoint::put_gmm(const SphereGMM& gmm) {
  const auto t = static_cast<Eigen::Index>(gmm.components());
  Tensor<double> means(t, 3), sigmas(1, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    means.row(i) = gmm.means[static_cast<std::size_t>(i)].transpose();
    sigmas(0, i) = gmm.sigmas[static_cast<std::size_t>(i)];
  }
  put("gmm.means", means);
  put("gmm.sigmas", sigmas);
  components = static_cast<int>(t);
}

SphereGMM Checkpoint::get_gmm() const {
  const Tensor<double>& means = get("gmm.means");
  const Tensor<double>& sigmas = get("gmm.sigmas");
  if (means.cols() != 3 || sigmas.size() != means.rows()) throw std::runtime_error("checkpoint mixture arrays disagree");
  SphereGMM g;
  for (Eigen::Index i = 0; i < means.rows(); ++i) {
    g.means.emplace_back(means(i, 0), means(i, 1), means(i, 2));
    g.sigmas.push_back(sigmas(i));
  }
  return g;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put_raw<std::uint32_t>(out, Checkpoint::kVersion);
  put_raw<std::int32_t>(out, ck.components);
  put_raw<std::int32_t>(out, ck.channels);
  put_raw<std::int32_t>(out, ck.multiplier);
  put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ck.arrays.size()));
  for (const auto& a : ck.arrays) {
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put_raw<std::uint64_t>(out, static_cast<std::uint64_t>(a.values.rows()));
    put_raw<std::uint64_t>(out, static_cast<std::uint64_t>(a.values.cols()));
    out.write(reinterpret_cast<const char*>(a.values.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(a.values.size())));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a meshforge checkpoint");
  const auto version = get_raw<std::uint32_t>(in);
  if (version != Checkpoint::kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.components = get_raw<std::int32_t>(in);
  ck.channels = get_raw<std::int32_t>(in);
  ck.multiplier = get_raw<std::int32_t>(in);
  const auto count = get_raw<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get_raw<std::uint32_t>(in);
    if (len > 4096) throw std::runtime_error("checkpoint array name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw std::runtime_error("checkpoint truncated");
    const auto rows = get_raw<std::uint64_t>(in);
    const auto cols = get_raw<std::uint64_t>(in);
    if (rows > (1u << 30) || cols > (1u << 30) || rows * cols > (1ull << 31))
      throw std::runtime_error("checkpoint array " + name + " is implausibly large");
    Tensor<double> values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols)))
      throw std::runtime_error("checkpoint truncated");
    ck.arrays.push_back({std::move(name), std::move(values)});
  }
  return ck;
}

}  // namespace meshforge
