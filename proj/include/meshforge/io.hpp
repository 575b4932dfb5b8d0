#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "meshforge/mesh.hpp"

namespace meshforge {

enum class MeshFormat { obj, ply, automatic };
enum class PlyEncoding { binary_little_endian, ascii };

/// Syntax error in a mesh file. `position` is a 1-based line number for
/// text sections and a byte offset for binary PLY bodies.
class ParseError : public std::runtime_error {
 public:
  enum class Unit { line, byte };
  ParseError(const std::string& what, std::size_t position, Unit unit);
  std::size_t position() const { return position_; }
  Unit unit() const { return unit_; }

 private:
  std::size_t position_;
  Unit unit_;
};

struct MeshFileStats {
  std::size_t vertex_count = 0;
  std::size_t facet_count = 0;
  bool has_color = false;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
};

MeshFileStats mesh_stats(const TriMesh& mesh);

/// Colors are treated as present when the mesh carries exactly six feature
/// channels (x, y, z, r, g, b).
bool has_color_channels(const TriMesh& mesh);

/// OBJ `v x y z [r g b]` / `f i j k ...` with colors in [0, 1]; polygons are
/// fan-triangulated, negative indices are relative to the current vertex count.
TriMesh read_obj(std::istream& in);
/// ASCII or binary little-endian PLY. uchar colors c map to 2c/255 - 1.
TriMesh read_ply(std::istream& in);

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::automatic);

void write_obj(const TriMesh& mesh, std::ostream& out);
void write_ply(const TriMesh& mesh, std::ostream& out, PlyEncoding encoding = PlyEncoding::binary_little_endian);

/// Throws std::runtime_error on I/O failure.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format = MeshFormat::automatic,
               PlyEncoding encoding = PlyEncoding::binary_little_endian);

/// Concatenates meshes; facet indices are shifted by each mesh's vertex offset.
/// Throws MeshError when channel counts differ.
BatchedMesh concat_batch(std::span<const TriMesh> meshes);

}  // namespace meshforge
