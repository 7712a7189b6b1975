#include "retexkit/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "retexkit/error.hpp"
#include "retexkit/parallel.hpp"
#include "retexkit/rng.hpp"

namespace retexkit {

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::orbital: return "orbital";
    case TrajectoryKind::arc: return "arc";
    case TrajectoryKind::zoom_in: return "zoom_in";
    case TrajectoryKind::zoom_out: return "zoom_out";
  }
  return "orbital";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "orbital") return TrajectoryKind::orbital;
  if (name == "arc") return TrajectoryKind::arc;
  if (name == "zoom_in") return TrajectoryKind::zoom_in;
  if (name == "zoom_out") return TrajectoryKind::zoom_out;
  throw ConfigError("unknown trajectory kind '" + name + "'");
}

namespace {

constexpr double kMinDistance = 1.5;  // in bounding radii
constexpr double kMaxElevation = std::numbers::pi / 2.0 - 1e-3;

Vec3 direction(double azimuth, double elevation) {
  return {std::cos(elevation) * std::sin(azimuth), std::sin(elevation), std::cos(elevation) * std::cos(azimuth)};
}

}  // namespace

std::vector<CameraPose> generate_trajectory(const Trajectory& traj, const BoundingSphere& sphere,
                                            const CameraIntrinsics& intrinsics) {
  if (traj.num_frames < 1) throw ConfigError("trajectory needs at least one frame");
  if (!(sphere.radius > 0.0)) throw DomainError("bounding sphere radius must be positive");
  if (!(traj.base_distance > 0.0)) throw ConfigError("base_distance must be positive");
  if (intrinsics.width <= 0 || intrinsics.height <= 0) throw ConfigError("image size must be positive");
  const bool zoom = traj.kind == TrajectoryKind::zoom_in || traj.kind == TrajectoryKind::zoom_out;
  if (zoom) {
    if (!(traj.zoom_ratio > 0.0)) throw ConfigError("zoom_ratio must be positive");
    if (traj.kind == TrajectoryKind::zoom_in && traj.zoom_ratio > 1.0) throw ConfigError("zoom_in needs zoom_ratio <= 1");
    if (traj.kind == TrajectoryKind::zoom_out && traj.zoom_ratio < 1.0) throw ConfigError("zoom_out needs zoom_ratio >= 1");
  }
  if (std::abs(traj.elevation) > kMaxElevation) throw ConfigError("elevation too close to vertical");

  const int n = traj.num_frames;
  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    double azimuth = traj.start_azimuth;
    double elevation = traj.elevation;
    double distance = traj.base_distance;
    switch (traj.kind) {
      case TrajectoryKind::orbital:
        azimuth += traj.angular_span * i / n;
        break;
      case TrajectoryKind::arc:
        azimuth += traj.angular_span * i / n;
        elevation = -traj.elevation + 2.0 * traj.elevation * s;
        break;
      case TrajectoryKind::zoom_in:
      case TrajectoryKind::zoom_out:
        distance = traj.base_distance * (1.0 + (traj.zoom_ratio - 1.0) * s);
        break;
    }
    if (distance < kMinDistance) {
      throw ConfigError("camera would enter the bounding sphere (distance " + std::to_string(distance) + " radii)");
    }
    CameraPose pose;
    pose.look_at = sphere.center;
    pose.eye = sphere.center + direction(azimuth, elevation) * (distance * sphere.radius);
    pose.up = {0.0, 1.0, 0.0};
    pose.focal = intrinsics.resolved_focal();
    pose.image_width = intrinsics.width;
    pose.image_height = intrinsics.height;
    poses.push_back(pose);
  }
  return poses;
}

RigidTransform object_transform_at(const ObjectPose& pose, const BoundingSphere& sphere, int frame, int num_frames) {
  const double s = num_frames > 1 ? static_cast<double>(frame) / (num_frames - 1) : 0.0;
  RigidTransform xf;
  xf.pivot = sphere.center;
  xf.axis = normalized(pose.axis);
  if (norm(xf.axis) == 0.0) xf.axis = {0.0, 1.0, 0.0};
  xf.angle = pose.start_angle + pose.sweep * s;
  xf.translation = pose.translation;
  return xf;
}

namespace {

struct CameraBasis {
  Vec3 right;
  Vec3 up;
  Vec3 forward;
};

CameraBasis make_basis(const CameraPose& pose) {
  const Vec3 f = pose.look_at - pose.eye;
  if (!(norm(f) > 0.0)) throw DomainError("degenerate camera: eye equals look_at");
  const Vec3 forward = normalized(f);
  const Vec3 r = cross(forward, pose.up);
  if (norm(r) < 1e-9 * std::max(1.0, norm(pose.up))) throw DomainError("degenerate camera: up is parallel to view");
  const Vec3 right = normalized(r);
  return {right, cross(right, forward), forward};
}

// Clip-space vertex: camera coordinates plus texture coordinate.
struct ClipVertex {
  Vec3 cam;
  double u = 0.0;
  double v = 0.0;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.cam + (b.cam - a.cam) * t, a.u + (b.u - a.u) * t, a.v + (b.v - a.v) * t};
}

// Sutherland-Hodgman against z >= near.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri, double near) {
  std::vector<ClipVertex> out;
  out.reserve(4);
  for (std::size_t i = 0; i < 3; ++i) {
    const ClipVertex& a = tri[i];
    const ClipVertex& b = tri[(i + 1) % 3];
    const bool a_in = a.cam.z >= near;
    const bool b_in = b.cam.z >= near;
    if (a_in) out.push_back(a);
    if (a_in != b_in) out.push_back(lerp(a, b, (near - a.cam.z) / (b.cam.z - a.cam.z)));
  }
  return out;
}

Rgb sample_bilinear(const Image& tex, double u, double v) {
  const double x = std::clamp(u, 0.0, 1.0) * tex.width() - 0.5;
  const double y = (1.0 - std::clamp(v, 0.0, 1.0)) * tex.height() - 0.5;
  const double xc = std::clamp(x, 0.0, static_cast<double>(tex.width() - 1));
  const double yc = std::clamp(y, 0.0, static_cast<double>(tex.height() - 1));
  const int x0 = static_cast<int>(std::floor(xc));
  const int y0 = static_cast<int>(std::floor(yc));
  const int x1 = std::min(x0 + 1, tex.width() - 1);
  const int y1 = std::min(y0 + 1, tex.height() - 1);
  const double fx = xc - x0;
  const double fy = yc - y0;
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double a = tex.at(x0, y0, c);
    const double b = tex.at(x1, y0, c);
    const double d = tex.at(x0, y1, c);
    const double e = tex.at(x1, y1, c);
    const double top = a + (b - a) * fx;
    const double bottom = d + (e - d) * fx;
    out[static_cast<std::size_t>(c)] = static_cast<float>(top + (bottom - top) * fy);
  }
  return out;
}

}  // namespace

std::optional<PixelPoint> project_to_pixel(const CameraPose& pose, const Vec3& world) {
  const CameraBasis basis = make_basis(pose);
  const Vec3 d = world - pose.eye;
  const double z = dot(d, basis.forward);
  if (!(z > 0.0)) return std::nullopt;
  return PixelPoint{0.5 * pose.image_width + pose.focal * dot(d, basis.right) / z,
                    0.5 * pose.image_height - pose.focal * dot(d, basis.up) / z, z};
}

namespace {

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

FrameRender render_frame(const Mesh& mesh, const CameraPose& pose, const RenderConfig& cfg,
                         const RigidTransform& object_xf) {
  if (pose.image_width <= 0 || pose.image_height <= 0) throw ConfigError("image size must be positive");
  if (!(pose.focal > 0.0)) throw ConfigError("focal length must be positive");
  const CameraBasis basis = make_basis(pose);
  const int width = pose.image_width;
  const int height = pose.image_height;
  const double cx = 0.5 * width;
  const double cy = 0.5 * height;
  const double focal = pose.focal;
  const double near = 1e-6 * std::max(1.0, mesh.bounding_sphere().radius);

  FrameRender out{Image::filled(width, height, cfg.background_color), Mask(width, height, 0),
                  Image(width, height, 1, std::numeric_limits<float>::infinity())};
  std::vector<double> zbuf(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::infinity());

  std::vector<Vec3> cam_vertices;
  cam_vertices.reserve(mesh.vertices().size());
  for (const Vec3& v : mesh.vertices()) {
    const Vec3 d = object_xf.apply(v) - pose.eye;
    cam_vertices.push_back({dot(d, basis.right), dot(d, basis.up), dot(d, basis.forward)});
  }

  const std::optional<Image>& texture = mesh.texture();
  for (const Triangle& tri : mesh.triangles()) {
    std::array<ClipVertex, 3> corners;
    for (std::size_t k = 0; k < 3; ++k) {
      corners[k].cam = cam_vertices[static_cast<std::size_t>(tri.vertex_indices[k])];
      if (tri.uv_indices) {
        const Vec2& t = mesh.uvs()[static_cast<std::size_t>((*tri.uv_indices)[k])];
        corners[k].u = t.u;
        corners[k].v = t.v;
      }
    }
    const Vec3 face_normal = normalized(cross(corners[1].cam - corners[0].cam, corners[2].cam - corners[0].cam));
    if (norm(face_normal) == 0.0) continue;  // zero-area face
    const bool use_texture = cfg.material_mode == MaterialMode::textured && tri.uv_indices && texture;

    const std::vector<ClipVertex> poly = clip_near(corners, near);
    if (poly.size() < 3) continue;

    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const std::array<const ClipVertex*, 3> t{&poly[0], &poly[k], &poly[k + 1]};
      std::array<double, 3> sx{};
      std::array<double, 3> sy{};
      std::array<double, 3> inv_z{};
      for (std::size_t j = 0; j < 3; ++j) {
        inv_z[j] = 1.0 / t[j]->cam.z;
        sx[j] = cx + focal * t[j]->cam.x * inv_z[j];
        sy[j] = cy - focal * t[j]->cam.y * inv_z[j];
      }
      const double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sx[2] - sx[0]) * (sy[1] - sy[0]);
      if (area == 0.0 || !std::isfinite(area)) continue;

      const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({sx[0], sx[1], sx[2]}) - 0.5)));
      const int x_hi = std::min(width - 1, static_cast<int>(std::ceil(std::max({sx[0], sx[1], sx[2]}) - 0.5)));
      const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({sy[0], sy[1], sy[2]}) - 0.5)));
      const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(std::max({sy[0], sy[1], sy[2]}) - 0.5)));

      for (int py = y_lo; py <= y_hi; ++py) {
        const double qy = py + 0.5;
        for (int px = x_lo; px <= x_hi; ++px) {
          const double qx = px + 0.5;
          // Edge functions; weight j is opposite vertex j.
          const double w0 = (sx[2] - sx[1]) * (qy - sy[1]) - (sy[2] - sy[1]) * (qx - sx[1]);
          const double w1 = (sx[0] - sx[2]) * (qy - sy[2]) - (sy[0] - sy[2]) * (qx - sx[2]);
          const double w2 = (sx[1] - sx[0]) * (qy - sy[0]) - (sy[1] - sy[0]) * (qx - sx[0]);
          const bool inside = area > 0.0 ? (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) : (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
          if (!inside) continue;
          const double l0 = w0 / area;
          const double l1 = w1 / area;
          const double l2 = w2 / area;
          const double iz = l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2];
          if (!(iz > 0.0)) continue;
          const double z = 1.0 / iz;
          const std::size_t idx = static_cast<std::size_t>(py) * width + px;
          if (!(z < zbuf[idx])) continue;
          zbuf[idx] = z;

          // Surface point on the pixel ray, in camera coordinates.
          const Vec3 p{z * (qx - cx) / focal, -z * (qy - cy) / focal, z};
          const Vec3 to_light = normalized(-p);
          const Vec3 n = dot(face_normal, to_light) < 0.0 ? -face_normal : face_normal;
          const double shade = lambert(1.0, cfg.light_intensity, n, to_light);

          Rgb color;
          if (use_texture) {
            const double pc0 = l0 * inv_z[0] * z;
            const double pc1 = l1 * inv_z[1] * z;
            const double pc2 = l2 * inv_z[2] * z;
            const double u = pc0 * t[0]->u + pc1 * t[1]->u + pc2 * t[2]->u;
            const double v = pc0 * t[0]->v + pc1 * t[1]->v + pc2 * t[2]->v;
            const Rgb albedo = sample_bilinear(*texture, u, v);
            color = {clamp01(albedo[0] * shade), clamp01(albedo[1] * shade), clamp01(albedo[2] * shade)};
          } else {
            const float g = clamp01(cfg.gray_albedo * shade);
            color = {g, g, g};
          }
          out.image.set_rgb(px, py, color);
          out.coverage.at(px, py) = 1;
          out.depth.at(px, py, 0) = static_cast<float>(z);
        }
      }
    }
  }
  return out;
}

ObjectPose random_object_pose(std::uint64_t seed, double radius, double max_sweep, double max_translation_fraction) {
  Rng rng(seed);
  ObjectPose pose;
  Vec3 axis;
  do {
    axis = {rng.normal(), rng.normal(), rng.normal()};
  } while (norm(axis) < 1e-9);
  pose.axis = normalized(axis);
  pose.start_angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
  pose.sweep = rng.uniform(-max_sweep, max_sweep);
  // Uniform direction, radius scaled by cbrt for a uniform ball.
  Vec3 dir;
  do {
    dir = {rng.normal(), rng.normal(), rng.normal()};
  } while (norm(dir) < 1e-9);
  const double r = max_translation_fraction * radius * std::cbrt(rng.uniform());
  pose.translation = normalized(dir) * r;
  return pose;
}

PairedClip render_pair(const Mesh& mesh, const Trajectory& traj, const RenderConfig& cfg, std::uint64_t seed,
                       const CameraIntrinsics& intrinsics, int threads) {
  const BoundingSphere& sphere = mesh.bounding_sphere();
  if (!(sphere.radius > 0.0)) throw DomainError("mesh is degenerate (zero bounding radius)");

  PairedClip pair;
  pair.cameras = generate_trajectory(traj, sphere, intrinsics);
  pair.object_pose = cfg.pose ? *cfg.pose : random_object_pose(derive_seed(seed, 0), sphere.radius);

  RenderConfig textured = cfg;
  textured.material_mode = MaterialMode::textured;
  RenderConfig untextured = cfg;
  untextured.material_mode = MaterialMode::untextured_gray;

  const std::size_t n = pair.cameras.size();
  pair.textured.resize(n);
  pair.untextured.resize(n);
  pair.coverage.resize(n);
  std::vector<Mask> untextured_coverage(n);

  // Job i < n is the textured pass of frame i, job n + i the untextured pass.
  parallel_for(2 * n, threads, [&](std::size_t job) {
    const std::size_t frame = job % n;
    const RigidTransform xf = object_transform_at(pair.object_pose, sphere, static_cast<int>(frame), static_cast<int>(n));
    if (job < n) {
      FrameRender r = render_frame(mesh, pair.cameras[frame], textured, xf);
      pair.textured[frame] = std::move(r.image);
      pair.coverage[frame] = std::move(r.coverage);
    } else {
      FrameRender r = render_frame(mesh, pair.cameras[frame], untextured, xf);
      pair.untextured[frame] = std::move(r.image);
      untextured_coverage[frame] = std::move(r.coverage);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (pair.coverage[i] != untextured_coverage[i]) {
      throw DomainError("coverage differs between render passes at frame " + std::to_string(i));
    }
  }
  return pair;
}

}  // namespace retexkit
