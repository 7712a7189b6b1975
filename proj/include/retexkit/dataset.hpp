#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "retexkit/mesh.hpp"
#include "retexkit/render.hpp"

namespace retexkit {

// Sampling ranges for the per-pair augmentation tuple (trajectory, light, object pose).
struct AugmentationRanges {
  std::vector<TrajectoryKind> kinds{TrajectoryKind::orbital, TrajectoryKind::arc, TrajectoryKind::zoom_in,
                                    TrajectoryKind::zoom_out};
  double light_min = 0.6;
  double light_max = 1.4;
  double distance_min = 2.2;  // bounding radii
  double distance_max = 3.5;
  double span_min = 0.5235987755982988;  // orbital / arc sweep, radians
  double span_max = 3.141592653589793;
  double elevation_min = -0.35;
  double elevation_max = 0.6;
  double zoom_in_min = 0.6;  // zoom_in ratio; clamped so the camera stays >= 1.5r away
  double zoom_in_max = 0.9;
  double zoom_out_min = 1.1;
  double zoom_out_max = 1.6;
  double max_rotation_sweep = 0.7853981633974483;
  double max_translation_fraction = 0.25;
};

struct NamedMesh {
  std::string name;
  Mesh mesh;
};

struct DatasetOptions {
  int pairs_per_mesh = 8;
  int num_frames = 33;
  CameraIntrinsics intrinsics;
  RenderConfig render;  // material_mode / light / pose are overridden per pair
  AugmentationRanges aug;
  std::uint64_t seed = 0;
  int threads = 1;
  double fps = 16.0;
};

struct DatasetSample {
  int mesh_index = 0;
  std::string mesh_name;
  int pair_index = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  double light_intensity = 1.0;
  ObjectPose object_pose;
  std::string directory;  // relative to the dataset root
};

// Deterministic draw of pair `pair_index` of mesh `mesh_index`; depends only on
// (seed, mesh_index, pair_index) and the ranges.
DatasetSample sample_pair_parameters(const DatasetOptions& opts, int mesh_index, int pair_index, double radius);

nlohmann::json to_json(const DatasetSample& sample);

// Renders pairs_per_mesh PairedClips per mesh into out_dir/<sample dir>/{textured,untextured,mask}
// and writes out_dir/manifest.json listing every sample's parameters. Returns the manifest.
nlohmann::json generate_dataset(const std::vector<NamedMesh>& meshes, const DatasetOptions& opts,
                                const std::filesystem::path& out_dir);

}  // namespace retexkit
