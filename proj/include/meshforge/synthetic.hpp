#pragma once

#include <cstdint>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// Subdivided icosahedron projected to the unit sphere: 10 * 4^s + 2 vertices.
TriMesh icosphere(int subdivisions);

/// nx x ny height-field grid over [0, nx-1] x [0, ny-1], z jittered by
/// +-amplitude. Quads are split along alternating diagonals.
TriMesh perturbed_grid(int nx, int ny, double amplitude, std::uint64_t seed);

/// Closed nu x nv torus (F = 2V) with radial jitter of +-amplitude * r.
TriMesh torus_grid(int nu, int nv, double amplitude, std::uint64_t seed);

/// Torus with roughly `vertices` vertices and aspect close to 2:1; the usual
/// benchmark input.
TriMesh synthetic_mesh(int vertices, std::uint64_t seed);

/// Small random closed mesh for property tests: an icosphere (level 0 or 1)
/// with jittered positions and random features of `channels` columns.
TriMesh random_small_mesh(std::uint64_t seed, int channels, bool refine);

}  // namespace meshforge
