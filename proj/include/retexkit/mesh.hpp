#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "retexkit/image.hpp"
#include "retexkit/vec.hpp"

namespace retexkit {

struct Triangle {
  std::array<int, 3> vertex_indices{};           // zero-based
  std::optional<std::array<int, 3>> uv_indices;  // zero-based, all-or-nothing per face

  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct BoundingSphere {
  Vec3 center;
  double radius = 0.0;
};

// Immutable after construction; safe to share across render workers.
class Mesh {
public:
  // Validates indices, distinctness and finiteness; throws DomainError/ShapeError on violation.
  Mesh(std::vector<Vec3> vertices, std::vector<Vec2> uvs, std::vector<Triangle> triangles,
       std::optional<Image> texture = std::nullopt);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Vec2>& uvs() const noexcept { return uvs_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::optional<Image>& texture() const noexcept { return texture_; }
  const BoundingSphere& bounding_sphere() const noexcept { return sphere_; }

  bool has_uvs() const noexcept;

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.vertices_ == b.vertices_ && a.uvs_ == b.uvs_ && a.triangles_ == b.triangles_ && a.texture_ == b.texture_;
  }

private:
  std::vector<Vec3> vertices_;
  std::vector<Vec2> uvs_;
  std::vector<Triangle> triangles_;
  std::optional<Image> texture_;
  BoundingSphere sphere_;
};

// Centroid of the vertices and the max distance from it. Throws on an empty vertex list.
BoundingSphere compute_bounding_sphere(const std::vector<Vec3>& vertices);
inline BoundingSphere compute_bounding_sphere(const Mesh& mesh) { return compute_bounding_sphere(mesh.vertices()); }

struct ParseStats {
  int unknown_directives = 0;  // lines whose directive is not v/vt/f (vn, o, g, usemtl, ...)
};

// Parses the `v` / `vt` / `f` subset of the Wavefront text format. Faces with more than three
// corners are fan-triangulated around their first corner. Throws IoError naming the line on
// malformed tokens and DomainError for out-of-range indices or a mesh with no triangles.
Mesh parse_mesh(std::istream& in, std::optional<Image> texture = std::nullopt, ParseStats* stats = nullptr);

// Writes the same subset; numbers are printed with round-trip precision.
void write_mesh(std::ostream& out, const Mesh& mesh);

// Loads `path`; the texture is `texture_path` if given, otherwise a sibling `<stem>.png` or
// `<stem>.ppm` when present.
Mesh load_mesh(const std::filesystem::path& path, const std::optional<std::filesystem::path>& texture_path = std::nullopt);

}  // namespace retexkit
