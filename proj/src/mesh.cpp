#include "retexkit/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "retexkit/error.hpp"
#include "retexkit/image_io.hpp"

namespace retexkit {

namespace fs = std::filesystem;

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Vec2> uvs, std::vector<Triangle> triangles,
           std::optional<Image> texture)
    : vertices_(std::move(vertices)),
      uvs_(std::move(uvs)),
      triangles_(std::move(triangles)),
      texture_(std::move(texture)) {
  if (vertices_.empty()) throw DomainError("mesh has no vertices");
  if (triangles_.empty()) throw DomainError("mesh has no triangles");
  for (const Vec3& v : vertices_) {
    if (!is_finite(v)) throw DomainError("mesh vertex is not finite");
  }
  for (const Vec2& t : uvs_) {
    if (!std::isfinite(t.u) || !std::isfinite(t.v)) throw DomainError("texture coordinate is not finite");
  }
  const int nv = static_cast<int>(vertices_.size());
  const int nt = static_cast<int>(uvs_.size());
  for (const Triangle& tri : triangles_) {
    for (int i : tri.vertex_indices) {
      if (i < 0 || i >= nv) throw DomainError("vertex index out of range");
    }
    const auto& vi = tri.vertex_indices;
    if (vi[0] == vi[1] || vi[1] == vi[2] || vi[0] == vi[2]) {
      throw DomainError("triangle repeats a vertex index");
    }
    if (tri.uv_indices) {
      for (int i : *tri.uv_indices) {
        if (i < 0 || i >= nt) throw DomainError("texture coordinate index out of range");
      }
    }
  }
  if (has_uvs() && !texture_) throw DomainError("mesh has texture coordinates but no texture image");
  if (texture_ && texture_->channels() != 3) throw ShapeError("texture must be RGB");
  sphere_ = compute_bounding_sphere(vertices_);
}

bool Mesh::has_uvs() const noexcept {
  return std::any_of(triangles_.begin(), triangles_.end(), [](const Triangle& t) { return t.uv_indices.has_value(); });
}

BoundingSphere compute_bounding_sphere(const std::vector<Vec3>& vertices) {
  if (vertices.empty()) throw DomainError("bounding sphere of an empty vertex list");
  Vec3 center;
  for (const Vec3& v : vertices) center += v;
  center *= 1.0 / static_cast<double>(vertices.size());
  double radius = 0.0;
  for (const Vec3& v : vertices) radius = std::max(radius, norm(v - center));
  return {center, radius};
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw IoError("mesh line " + std::to_string(line_no) + ": " + msg);
}

double parse_real(std::string_view tok, int line_no) {
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    fail(line_no, "malformed number '" + std::string(tok) + "'");
  }
  return value;
}

// One-based (or negative, relative) index to zero-based.
int parse_index(std::string_view tok, int line_no, int count) {
  long value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || value == 0) {
    fail(line_no, "malformed index '" + std::string(tok) + "'");
  }
  const long zero_based = value > 0 ? value - 1 : count + value;
  if (zero_based < 0 || zero_based >= count) {
    throw DomainError("mesh line " + std::to_string(line_no) + ": index " + std::string(tok) + " out of range");
  }
  return static_cast<int>(zero_based);
}

struct Corner {
  int vertex;
  int uv;  // -1 when absent
};

}  // namespace

Mesh parse_mesh(std::istream& in, std::optional<Image> texture, ParseStats* stats) {
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
  std::vector<Triangle> triangles;
  ParseStats local;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string_view op = tokens[0];

    if (op == "v") {
      // Optional fourth (w) or color components are tolerated and ignored.
      if (tokens.size() < 4) fail(line_no, "vertex needs 3 coordinates");
      vertices.push_back({parse_real(tokens[1], line_no), parse_real(tokens[2], line_no), parse_real(tokens[3], line_no)});
    } else if (op == "vt") {
      if (tokens.size() < 3) fail(line_no, "texture coordinate needs 2 components");
      uvs.push_back({parse_real(tokens[1], line_no), parse_real(tokens[2], line_no)});
    } else if (op == "f") {
      if (tokens.size() < 4) fail(line_no, "face needs at least 3 corners");
      std::vector<Corner> corners;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const std::string_view tok = tokens[k];
        const auto slash = tok.find('/');
        Corner c{parse_index(tok.substr(0, slash), line_no, static_cast<int>(vertices.size())), -1};
        if (slash != std::string_view::npos) {
          std::string_view rest = tok.substr(slash + 1);
          const auto slash2 = rest.find('/');
          const std::string_view uv_tok = rest.substr(0, slash2);  // normal index after 2nd slash ignored
          if (!uv_tok.empty()) c.uv = parse_index(uv_tok, line_no, static_cast<int>(uvs.size()));
        }
        corners.push_back(c);
      }
      const bool any_uv = std::any_of(corners.begin(), corners.end(), [](const Corner& c) { return c.uv >= 0; });
      const bool all_uv = std::all_of(corners.begin(), corners.end(), [](const Corner& c) { return c.uv >= 0; });
      if (any_uv && !all_uv) fail(line_no, "face mixes corners with and without texture coordinates");
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        Triangle tri;
        tri.vertex_indices = {corners[0].vertex, corners[k].vertex, corners[k + 1].vertex};
        if (all_uv) tri.uv_indices = std::array<int, 3>{corners[0].uv, corners[k].uv, corners[k + 1].uv};
        const auto& vi = tri.vertex_indices;
        if (vi[0] == vi[1] || vi[1] == vi[2] || vi[0] == vi[2]) fail(line_no, "face repeats a vertex");
        triangles.push_back(tri);
      }
    } else {
      ++local.unknown_directives;
    }
  }
  if (stats) *stats = local;
  if (triangles.empty()) throw DomainError("mesh has zero triangles");
  return Mesh(std::move(vertices), std::move(uvs), std::move(triangles), std::move(texture));
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  std::ostringstream buf;
  buf.precision(17);
  for (const Vec3& v : mesh.vertices()) buf << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const Vec2& t : mesh.uvs()) buf << "vt " << t.u << ' ' << t.v << '\n';
  for (const Triangle& tri : mesh.triangles()) {
    buf << 'f';
    for (int k = 0; k < 3; ++k) {
      buf << ' ' << tri.vertex_indices[static_cast<std::size_t>(k)] + 1;
      if (tri.uv_indices) buf << '/' << (*tri.uv_indices)[static_cast<std::size_t>(k)] + 1;
    }
    buf << '\n';
  }
  out << buf.str();
}

Mesh load_mesh(const fs::path& path, const std::optional<fs::path>& texture_path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh: " + path.string());
  std::optional<Image> texture;
  if (texture_path) {
    texture = read_image(*texture_path);
  } else {
    for (const char* ext : {".png", ".ppm"}) {
      fs::path candidate = path;
      candidate.replace_extension(ext);
      if (fs::exists(candidate)) {
        texture = read_image(candidate);
        break;
      }
    }
  }
  return parse_mesh(in, std::move(texture));
}

}  // namespace retexkit
