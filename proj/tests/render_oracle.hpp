#pragma once

// Independent reference computations for the rasterizer: a gluLookAt / gluPerspective style
// matrix pipeline for projection and Moller-Trumbore ray casting for visibility and shading.

#include <array>
#include <cmath>
#include <optional>

#include "retexkit/render.hpp"

namespace retexkit::oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 look_at_matrix(const CameraPose& pose) {
  const Vec3 f = normalized(pose.look_at - pose.eye);
  const Vec3 s = normalized(cross(f, pose.up));
  const Vec3 u = cross(s, f);
  Mat4 m{};
  m[0] = {s.x, s.y, s.z, -dot(s, pose.eye)};
  m[1] = {u.x, u.y, u.z, -dot(u, pose.eye)};
  m[2] = {-f.x, -f.y, -f.z, dot(f, pose.eye)};
  m[3] = {0, 0, 0, 1};
  return m;
}

inline Mat4 perspective_matrix(const CameraPose& pose, double near, double far) {
  const double fovy = 2.0 * std::atan(0.5 * pose.image_height / pose.focal);
  const double aspect = static_cast<double>(pose.image_width) / pose.image_height;
  const double fy = 1.0 / std::tan(0.5 * fovy);
  Mat4 m{};
  m[0][0] = fy / aspect;
  m[1][1] = fy;
  m[2][2] = (far + near) / (near - far);
  m[2][3] = 2.0 * far * near / (near - far);
  m[3][2] = -1.0;
  return m;
}

inline std::array<double, 4> mul(const Mat4& m, const std::array<double, 4>& v) {
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) r[static_cast<std::size_t>(i)] += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
  }
  return r;
}

// World point -> continuous pixel coordinates through clip space and NDC.
inline std::array<double, 2> project(const CameraPose& pose, const Vec3& p) {
  const auto view = mul(look_at_matrix(pose), {p.x, p.y, p.z, 1.0});
  const auto clip = mul(perspective_matrix(pose, 1e-3, 1e3), view);
  const double ndc_x = clip[0] / clip[3];
  const double ndc_y = clip[1] / clip[3];
  return {(ndc_x + 1.0) * 0.5 * pose.image_width, (1.0 - ndc_y) * 0.5 * pose.image_height};
}

// World-space ray through the center of pixel (px, py).
inline Vec3 pixel_ray(const CameraPose& pose, int px, int py) {
  const Mat4 m = look_at_matrix(pose);
  const double ndc_x = (px + 0.5) / pose.image_width * 2.0 - 1.0;
  const double ndc_y = 1.0 - (py + 0.5) / pose.image_height * 2.0;
  const double tan_y = 0.5 * pose.image_height / pose.focal;
  const double tan_x = tan_y * pose.image_width / pose.image_height;
  const std::array<double, 3> v{ndc_x * tan_x, ndc_y * tan_y, -1.0};
  // Rotation part of the view matrix is orthonormal: inverse = transpose.
  Vec3 d;
  d.x = m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2];
  d.y = m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2];
  d.z = m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2];
  return normalized(d);
}

struct Hit {
  double t;
  double b1;
  double b2;
  double margin;  // min barycentric, how far inside the triangle the hit is
};

inline std::optional<Hit> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = cross(dir, e2);
  const double det = dot(e1, p);
  if (std::abs(det) < 1e-15) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double b1 = dot(s, p) * inv;
  const Vec3 q = cross(s, e1);
  const double b2 = dot(dir, q) * inv;
  const double t = dot(e2, q) * inv;
  const double margin = std::min({b1, b2, 1.0 - b1 - b2});
  if (t <= 0.0) return std::nullopt;
  return Hit{t, b1, b2, margin};
}

// Expected untextured value at a hit: albedo * intensity * max(0, n.l), n toward the eye.
inline double lambert_at(const Vec3& eye, const Vec3& point, const Vec3& a, const Vec3& b, const Vec3& c, double albedo,
                         double intensity) {
  Vec3 n = normalized(cross(b - a, c - a));
  const Vec3 l = normalized(eye - point);
  if (dot(n, l) < 0) n = -n;
  return std::clamp(albedo * intensity * std::max(0.0, dot(n, l)), 0.0, 1.0);
}

}  // namespace retexkit::oracle
