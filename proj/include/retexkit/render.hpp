#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retexkit/image.hpp"
#include "retexkit/mesh.hpp"
#include "retexkit/vec.hpp"

namespace retexkit {

// Pinhole camera. The principal point is the image center; pixel (x, y) has its center at
// (x + 0.5, y + 0.5) and image y grows downward.
struct CameraPose {
  Vec3 eye;
  Vec3 look_at;
  Vec3 up{0.0, 1.0, 0.0};
  double focal = 832.0;  // pixels
  int image_width = 480;
  int image_height = 832;
};

struct CameraIntrinsics {
  int width = 480;
  int height = 832;
  double focal = 0.0;  // <= 0 means focal = height

  double resolved_focal() const { return focal > 0.0 ? focal : static_cast<double>(height); }
};

enum class TrajectoryKind { orbital, arc, zoom_in, zoom_out };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

// Distances are multiples of the bounding radius; angles are radians. Azimuth is measured
// about +y from +z, elevation toward +y.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::orbital;
  int num_frames = 33;
  double base_distance = 3.0;
  double angular_span = 1.5707963267948966;
  double elevation = 0.3;
  double zoom_ratio = 1.0;
  double start_azimuth = 0.0;
};

// Camera placement for every frame:
//   orbital  - azimuth sweeps start + span*i/n at fixed elevation, distance base*r
//   arc      - as orbital, elevation sweeps linearly from -elevation to +elevation
//   zoom_*   - fixed direction (start_azimuth, elevation), distance lerps from base*r to
//              zoom_ratio*base*r
// Every pose looks at the sphere center. Throws ConfigError for num_frames < 1, an invalid
// zoom ratio, a near-vertical view (degenerate up vector) or a camera closer than 1.5r.
std::vector<CameraPose> generate_trajectory(const Trajectory& traj, const BoundingSphere& sphere,
                                            const CameraIntrinsics& intrinsics = {});

enum class MaterialMode { textured, untextured_gray };

// Rigid object motion: rotation about `axis` through the bounding-sphere center, swept
// linearly from start_angle to start_angle + sweep over the clip, plus a constant offset.
struct ObjectPose {
  Vec3 axis{0.0, 1.0, 0.0};
  double start_angle = 0.0;
  double sweep = 0.0;
  Vec3 translation;
};

struct RigidTransform {
  Vec3 pivot;
  Vec3 axis{0.0, 1.0, 0.0};
  double angle = 0.0;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return pivot + rotate_about_axis(p - pivot, axis, angle) + translation; }
};

RigidTransform object_transform_at(const ObjectPose& pose, const BoundingSphere& sphere, int frame, int num_frames);

struct RenderConfig {
  MaterialMode material_mode = MaterialMode::textured;
  double gray_albedo = 0.5;
  double light_intensity = 1.0;
  std::optional<ObjectPose> pose;  // unset: render_pair draws one from its seed
  Rgb background_color{0.0f, 0.0f, 0.0f};
};

struct FrameRender {
  Image image;     // RGB
  Mask coverage;   // 1 where depth was written
  Image depth;     // camera-space z, +inf where nothing was drawn
};

struct PixelPoint {
  double x = 0.0;  // continuous pixel coordinates; pixel (i, j) spans [i, i + 1) x [j, j + 1)
  double y = 0.0;
  double depth = 0.0;  // camera-space z
};

// Pinhole projection used by the rasterizer; nullopt for points at or behind the eye plane.
// Throws DomainError for a degenerate camera basis.
std::optional<PixelPoint> project_to_pixel(const CameraPose& pose, const Vec3& world);

// Lambert term with a headlight: albedo * intensity * max(0, n.l).
inline double lambert(double albedo, double intensity, const Vec3& normal, const Vec3& to_light) {
  const double d = dot(normal, to_light);
  return albedo * intensity * (d > 0.0 ? d : 0.0);
}

// Z-buffered rasterization with flat per-face normals oriented toward the camera and a point
// light at the eye without falloff. Textured mode samples the texture bilinearly at
// perspective-correct UVs; faces without UVs fall back to gray_albedo. No culling, shadows,
// ambient term or anti-aliasing. Output is clamped to [0, 1].
FrameRender render_frame(const Mesh& mesh, const CameraPose& pose, const RenderConfig& cfg,
                         const RigidTransform& object_xf = {});

struct PairedClip {
  VideoClip textured;
  VideoClip untextured;
  MaskClip coverage;
  std::vector<CameraPose> cameras;
  ObjectPose object_pose;
};

// Draws a random object pose: uniformly random axis, sweep up to +-max_sweep and a translation
// of at most max_translation_fraction * radius.
ObjectPose random_object_pose(std::uint64_t seed, double radius, double max_sweep = 0.7853981633974483,
                              double max_translation_fraction = 0.25);

// Renders the trajectory twice (textured, then untextured gray) with identical cameras,
// object transforms and light. Frames run on up to `threads` workers; output does not depend
// on the worker count.
PairedClip render_pair(const Mesh& mesh, const Trajectory& traj, const RenderConfig& cfg, std::uint64_t seed,
                       const CameraIntrinsics& intrinsics = {}, int threads = 1);

}  // namespace retexkit
