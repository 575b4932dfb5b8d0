#include "meshforge/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace meshforge {
namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<double> to_double(const std::string& s) {
  // from_chars for double is unavailable in older libstdc++; strtod it is.
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_int(const std::string& s) {
  long long v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

double color_to_feature(double unit_color) { return 2.0 * unit_color - 1.0; }
double feature_to_color(double feature) { return std::clamp((feature + 1.0) * 0.5, 0.0, 1.0); }

TriMesh assemble(std::vector<Vec3> positions, std::vector<std::array<double, 3>> colors, std::vector<Facet> facets) {
  TriMesh mesh;
  const bool colored = !colors.empty();
  const auto n = static_cast<Eigen::Index>(positions.size());
  mesh.features.resize(n, colored ? 6 : 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    mesh.features.block(i, 0, 1, 3) = positions[i].transpose();
    if (colored)
      for (int c = 0; c < 3; ++c) mesh.features(i, 3 + c) = colors[i][c];
  }
  mesh.positions = std::move(positions);
  mesh.facets = std::move(facets);
  validate(mesh, false);
  return mesh;
}

// ---------------------------------------------------------------- PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::size_t offset) : in_(in), offset_(offset) {}

  double read(PlyType t) {
    std::array<char, 8> buf{};
    const std::size_t n = ply_size(t);
    in_.read(buf.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ParseError("unexpected end of binary PLY data", offset_, ParseError::Unit::byte);
    offset_ += n;
    switch (t) {
      case PlyType::i8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case PlyType::u8: return static_cast<double>(static_cast<std::uint8_t>(buf[0]));
      case PlyType::i16: return static_cast<double>(load<std::int16_t>(buf));
      case PlyType::u16: return static_cast<double>(load<std::uint16_t>(buf));
      case PlyType::i32: return static_cast<double>(load<std::int32_t>(buf));
      case PlyType::u32: return static_cast<double>(load<std::uint32_t>(buf));
      case PlyType::f32: return static_cast<double>(load<float>(buf));
      case PlyType::f64: return load<double>(buf);
    }
    return 0.0;
  }
  std::size_t offset() const { return offset_; }

 private:
  template <typename T>
  static T load(const std::array<char, 8>& buf) {
    T v;
    std::memcpy(&v, buf.data(), sizeof(T));
    return v;
  }
  std::istream& in_;
  std::size_t offset_;
};

class AsciiReader {
 public:
  AsciiReader(std::istream& in, std::size_t line) : in_(in), line_(line) {}

  bool next_line() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      tokens_ = split_ws(raw);
      pos_ = 0;
      if (!tokens_.empty()) return true;
    }
    return false;
  }
  double read() {
    if (pos_ >= tokens_.size()) throw ParseError("too few values on PLY data line", line_, ParseError::Unit::line);
    const auto v = to_double(tokens_[pos_]);
    if (!v) throw ParseError("malformed number '" + tokens_[pos_] + "'", line_, ParseError::Unit::line);
    ++pos_;
    return *v;
  }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

double color_scale(PlyType t) {
  switch (t) {
    case PlyType::u8: return 255.0;
    case PlyType::u16: return 65535.0;
    case PlyType::f32:
    case PlyType::f64: return 1.0;
    default: return 255.0;
  }
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t position, Unit unit)
    : std::runtime_error(what + (unit == Unit::line ? " (line " : " (byte ") + std::to_string(position) + ")"),
      position_(position),
      unit_(unit) {}

MeshFileStats mesh_stats(const TriMesh& mesh) {
  MeshFileStats s;
  s.vertex_count = mesh.num_vertices();
  s.facet_count = mesh.num_facets();
  s.has_color = has_color_channels(mesh);
  if (!mesh.positions.empty()) {
    s.bbox_min = s.bbox_max = mesh.positions.front();
    for (const Vec3& p : mesh.positions) {
      s.bbox_min = s.bbox_min.cwiseMin(p);
      s.bbox_max = s.bbox_max.cwiseMax(p);
    }
  }
  return s;
}

bool has_color_channels(const TriMesh& mesh) { return mesh.features.cols() == 6; }

TriMesh read_obj(std::istream& in) {
  std::vector<Vec3> positions;
  std::vector<std::array<double, 3>> colors;
  std::vector<Facet> facets;
  bool any_color = false, any_plain = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const auto tok = split_ws(raw);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() != 4 && tok.size() != 7 && tok.size() != 5)
        throw ParseError("vertex line needs 3 coordinates (optionally followed by r g b)", line,
                         ParseError::Unit::line);
      std::array<double, 6> v{};
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto d = to_double(tok[i]);
        if (!d) throw ParseError("malformed number '" + tok[i] + "'", line, ParseError::Unit::line);
        v[i - 1] = *d;
      }
      positions.emplace_back(v[0], v[1], v[2]);
      // A 4th value is the optional homogeneous w; only a full r g b triple counts as color.
      if (tok.size() == 7) {
        any_color = true;
        colors.push_back({color_to_feature(v[3]), color_to_feature(v[4]), color_to_feature(v[5])});
      } else {
        any_plain = true;
        colors.push_back({0.0, 0.0, 0.0});
      }
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError("facet needs at least 3 vertices", line, ParseError::Unit::line);
      std::vector<int> poly;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string head = tok[i].substr(0, tok[i].find('/'));
        const auto idx = to_int(head);
        if (!idx || *idx == 0)
          throw ParseError("malformed facet index '" + tok[i] + "'", line, ParseError::Unit::line);
        const long long n = static_cast<long long>(positions.size());
        const long long zero_based = *idx > 0 ? *idx - 1 : n + *idx;
        if (zero_based < 0 || zero_based >= n) {
          std::ostringstream msg;
          msg << "facet " << facets.size() << " index " << *idx << " out of range (" << n << " vertices so far)";
          throw ParseError(msg.str(), line, ParseError::Unit::line);
        }
        poly.push_back(static_cast<int>(zero_based));
      }
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) facets.push_back({poly[0], poly[i], poly[i + 1]});
    }
    // vt, vn, o, g, s, usemtl, mtllib are ignored.
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading OBJ");
  if (!any_color || any_plain) colors.clear();
  return assemble(std::move(positions), std::move(colors), std::move(facets));
}

TriMesh read_ply(std::istream& in) {
  std::string raw;
  std::size_t line = 0;
  std::size_t header_bytes = 0;
  auto next_header_line = [&]() -> std::string {
    if (!std::getline(in, raw)) throw ParseError("unexpected end of PLY header", line, ParseError::Unit::line);
    ++line;
    header_bytes += raw.size() + 1;
    return trim(raw);
  };

  if (next_header_line() != "ply") throw ParseError("missing 'ply' magic", line, ParseError::Unit::line);
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string h = next_header_line();
    const auto tok = split_ws(h);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError("malformed format line", line, ParseError::Unit::line);
      if (tok[1] == "ascii")
        binary = false;
      else if (tok[1] == "binary_little_endian")
        binary = true;
      else
        throw ParseError("unsupported PLY format '" + tok[1] + "'", line, ParseError::Unit::line);
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("malformed element line", line, ParseError::Unit::line);
      const auto count = to_int(tok[2]);
      if (!count || *count < 0) throw ParseError("malformed element count", line, ParseError::Unit::line);
      elements.push_back({tok[1], static_cast<std::size_t>(*count), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError("property before any element", line, ParseError::Unit::line);
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = ply_type(tok[2]);
        const auto it = ply_type(tok[3]);
        if (!ct || !it) throw ParseError("unknown PLY list type", line, ParseError::Unit::line);
        p = {tok[4], *it, true, *ct};
      } else if (tok.size() == 3) {
        const auto t = ply_type(tok[1]);
        if (!t) throw ParseError("unknown PLY type '" + tok[1] + "'", line, ParseError::Unit::line);
        p = {tok[2], *t, false, PlyType::u8};
      } else {
        throw ParseError("malformed property line", line, ParseError::Unit::line);
      }
      elements.back().properties.push_back(p);
    } else {
      throw ParseError("unexpected header keyword '" + tok[0] + "'", line, ParseError::Unit::line);
    }
  }
  if (!have_format) throw ParseError("missing format line", line, ParseError::Unit::line);

  std::vector<Vec3> positions;
  std::vector<std::array<double, 3>> colors;
  std::vector<Facet> facets;
  BinaryReader bin(in, header_bytes);
  AsciiReader txt(in, line);

  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    std::array<int, 3> xyz{-1, -1, -1};
    std::array<int, 3> rgb{-1, -1, -1};
    int index_list = -1;
    for (std::size_t k = 0; k < el.properties.size(); ++k) {
      const auto& name = el.properties[k].name;
      if (name == "x") xyz[0] = static_cast<int>(k);
      if (name == "y") xyz[1] = static_cast<int>(k);
      if (name == "z") xyz[2] = static_cast<int>(k);
      if (name == "red" || name == "r") rgb[0] = static_cast<int>(k);
      if (name == "green" || name == "g") rgb[1] = static_cast<int>(k);
      if (name == "blue" || name == "b") rgb[2] = static_cast<int>(k);
      if (el.properties[k].is_list && (name == "vertex_indices" || name == "vertex_index")) index_list = static_cast<int>(k);
    }
    const bool colored = is_vertex && rgb[0] >= 0 && rgb[1] >= 0 && rgb[2] >= 0;
    if (is_vertex && (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0))
      throw ParseError("vertex element lacks x/y/z", line, ParseError::Unit::line);
    if (is_face && index_list < 0)
      throw ParseError("face element lacks a vertex_indices list", line, ParseError::Unit::line);

    std::vector<double> scalars(el.properties.size());
    std::vector<int> poly;
    for (std::size_t item = 0; item < el.count; ++item) {
      if (!binary && !txt.next_line())
        throw ParseError("unexpected end of PLY data", txt.line(), ParseError::Unit::line);
      const std::size_t at = binary ? bin.offset() : txt.line();
      const auto unit = binary ? ParseError::Unit::byte : ParseError::Unit::line;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const PlyProperty& p = el.properties[k];
        if (!p.is_list) {
          scalars[k] = binary ? bin.read(p.type) : txt.read();
          continue;
        }
        const double count_d = binary ? bin.read(p.count_type) : txt.read();
        if (count_d < 0 || count_d != std::floor(count_d)) throw ParseError("malformed list count", at, unit);
        const auto count = static_cast<std::size_t>(count_d);
        const bool keep = is_face && static_cast<int>(k) == index_list;
        if (keep) poly.clear();
        for (std::size_t j = 0; j < count; ++j) {
          const double v = binary ? bin.read(p.type) : txt.read();
          if (keep) {
            if (v < 0 || v >= static_cast<double>(std::numeric_limits<int>::max()) || v != std::floor(v))
              throw ParseError("malformed vertex index", at, unit);
            poly.push_back(static_cast<int>(v));
          }
        }
      }
      if (is_vertex) {
        positions.emplace_back(scalars[xyz[0]], scalars[xyz[1]], scalars[xyz[2]]);
        if (colored) {
          std::array<double, 3> c{};
          for (int j = 0; j < 3; ++j)
            c[j] = color_to_feature(scalars[rgb[j]] / color_scale(el.properties[rgb[j]].type));
          colors.push_back(c);
        }
      } else if (is_face) {
        if (poly.size() < 3) throw ParseError("face with fewer than 3 vertices", at, unit);
        for (int v : poly) {
          if (static_cast<std::size_t>(v) >= positions.size()) {
            std::ostringstream msg;
            msg << "facet " << facets.size() << " index " << v << " out of range (" << positions.size()
                << " vertices)";
            throw ParseError(msg.str(), at, unit);
          }
        }
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) facets.push_back({poly[0], poly[i], poly[i + 1]});
      }
    }
  }
  return assemble(std::move(positions), std::move(colors), std::move(facets));
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  if (format == MeshFormat::automatic) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj")
      format = MeshFormat::obj;
    else if (ext == ".ply")
      format = MeshFormat::ply;
    else
      throw ParseError("cannot infer mesh format from extension '" + ext + "'", 0, ParseError::Unit::line);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return format == MeshFormat::obj ? read_obj(in) : read_ply(in);
}

void write_obj(const TriMesh& mesh, std::ostream& out) {
  validate(mesh, false);
  const bool colored = has_color_channels(mesh);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& p = mesh.positions[i];
    out << "v " << p.x() << ' ' << p.y() << ' ' << p.z();
    if (colored)
      for (int c = 0; c < 3; ++c) out << ' ' << feature_to_color(mesh.features(static_cast<Eigen::Index>(i), 3 + c));
    out << '\n';
  }
  for (const Facet& t : mesh.facets) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply(const TriMesh& mesh, std::ostream& out, PlyEncoding encoding) {
  validate(mesh, false);
  const bool colored = has_color_channels(mesh);
  const bool binary = encoding == PlyEncoding::binary_little_endian;
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << mesh.num_vertices() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.num_facets() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";

  auto color_byte = [&](std::size_t i, int c) {
    const double v = feature_to_color(mesh.features(static_cast<Eigen::Index>(i), 3 + c));
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
  };
  if (binary) {
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      const std::array<float, 3> p{static_cast<float>(mesh.positions[i].x()), static_cast<float>(mesh.positions[i].y()),
                                   static_cast<float>(mesh.positions[i].z())};
      out.write(reinterpret_cast<const char*>(p.data()), sizeof(p));
      if (colored) {
        const std::array<std::uint8_t, 3> c{color_byte(i, 0), color_byte(i, 1), color_byte(i, 2)};
        out.write(reinterpret_cast<const char*>(c.data()), sizeof(c));
      }
    }
    for (const Facet& t : mesh.facets) {
      const std::uint8_t n = 3;
      const std::array<std::int32_t, 3> idx{t[0], t[1], t[2]};
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(idx.data()), sizeof(idx));
    }
  } else {
    out << std::setprecision(std::numeric_limits<float>::max_digits10);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      const Vec3& p = mesh.positions[i];
      out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' ' << static_cast<float>(p.z());
      if (colored)
        for (int c = 0; c < 3; ++c) out << ' ' << static_cast<int>(color_byte(i, c));
      out << '\n';
    }
    for (const Facet& t : mesh.facets) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format, PlyEncoding encoding) {
  if (format == MeshFormat::automatic) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    format = ext == ".obj" ? MeshFormat::obj : MeshFormat::ply;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (format == MeshFormat::obj)
    write_obj(mesh, out);
  else
    write_ply(mesh, out, encoding);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

BatchedMesh concat_batch(std::span<const TriMesh> meshes) {
  BatchedMesh batch;
  if (meshes.empty()) return batch;
  const auto channels = meshes.front().features.cols();
  std::size_t total_v = 0, total_f = 0;
  for (std::size_t b = 0; b < meshes.size(); ++b) {
    if (meshes[b].features.cols() != channels) {
      std::ostringstream msg;
      msg << "mesh " << b << " has " << meshes[b].features.cols() << " feature channels, expected " << channels;
      throw MeshError(msg.str());
    }
    validate(meshes[b], false);
    total_v += meshes[b].num_vertices();
    total_f += meshes[b].num_facets();
  }
  batch.mesh.positions.reserve(total_v);
  batch.mesh.facets.reserve(total_f);
  batch.mesh.features.resize(static_cast<Eigen::Index>(total_v), channels);
  for (const TriMesh& m : meshes) {
    const int offset = batch.vertex_offsets.back();
    batch.mesh.positions.insert(batch.mesh.positions.end(), m.positions.begin(), m.positions.end());
    if (channels > 0) batch.mesh.features.middleRows(offset, static_cast<Eigen::Index>(m.num_vertices())) = m.features;
    for (Facet t : m.facets) {
      for (int& v : t) v += offset;
      batch.mesh.facets.push_back(t);
    }
    batch.vertex_offsets.push_back(offset + static_cast<int>(m.num_vertices()));
    batch.facet_offsets.push_back(batch.facet_offsets.back() + static_cast<int>(m.num_facets()));
  }
  return batch;
}

}  // namespace meshforge
