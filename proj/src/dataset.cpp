#include "retexkit/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "retexkit/clip_io.hpp"
#include "retexkit/error.hpp"
#include "retexkit/rng.hpp"

namespace retexkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi)) throw ConfigError(std::string("augmentation range ") + what + " is empty");
}

}  // namespace

DatasetSample sample_pair_parameters(const DatasetOptions& opts, int mesh_index, int pair_index, double radius) {
  const AugmentationRanges& aug = opts.aug;
  if (aug.kinds.empty()) throw ConfigError("no trajectory kinds configured");
  check_range(aug.light_min, aug.light_max, "light");
  check_range(aug.distance_min, aug.distance_max, "distance");
  check_range(aug.span_min, aug.span_max, "span");
  check_range(aug.elevation_min, aug.elevation_max, "elevation");
  check_range(aug.zoom_in_min, aug.zoom_in_max, "zoom_in");
  check_range(aug.zoom_out_min, aug.zoom_out_max, "zoom_out");
  if (!(aug.light_min > 0.0)) throw ConfigError("light intensity must be positive");

  DatasetSample s;
  s.mesh_index = mesh_index;
  s.pair_index = pair_index;
  const std::uint64_t flat = static_cast<std::uint64_t>(mesh_index) * static_cast<std::uint64_t>(opts.pairs_per_mesh) +
                             static_cast<std::uint64_t>(pair_index);
  s.seed = derive_seed(opts.seed, flat);
  Rng rng(s.seed);

  Trajectory& t = s.trajectory;
  t.kind = aug.kinds[static_cast<std::size_t>(rng.below(aug.kinds.size()))];
  t.num_frames = opts.num_frames;
  t.base_distance = rng.uniform(aug.distance_min, aug.distance_max);
  t.angular_span = rng.uniform(aug.span_min, aug.span_max);
  t.elevation = rng.uniform(aug.elevation_min, aug.elevation_max);
  t.start_azimuth = rng.uniform(-3.141592653589793, 3.141592653589793);
  const double zoom_draw = rng.uniform();
  switch (t.kind) {
    case TrajectoryKind::zoom_in: {
      const double lo = std::max(aug.zoom_in_min, 1.5 / t.base_distance);
      const double hi = std::min(1.0, std::max(lo, aug.zoom_in_max));
      t.zoom_ratio = lo + (hi - lo) * zoom_draw;
      break;
    }
    case TrajectoryKind::zoom_out:
      t.zoom_ratio = aug.zoom_out_min + (aug.zoom_out_max - aug.zoom_out_min) * zoom_draw;
      break;
    default:
      t.zoom_ratio = 1.0;
      break;
  }
  if (t.kind == TrajectoryKind::arc) t.elevation = std::abs(t.elevation);
  s.light_intensity = rng.uniform(aug.light_min, aug.light_max);
  s.object_pose = random_object_pose(rng.next_u64(), radius, aug.max_rotation_sweep, aug.max_translation_fraction);
  return s;
}

json to_json(const DatasetSample& s) {
  const Trajectory& t = s.trajectory;
  return {
      {"mesh_index", s.mesh_index},
      {"mesh_name", s.mesh_name},
      {"pair_index", s.pair_index},
      {"seed", s.seed},
      {"directory", s.directory},
      {"trajectory",
       {{"kind", to_string(t.kind)},
        {"num_frames", t.num_frames},
        {"base_distance", t.base_distance},
        {"angular_span", t.angular_span},
        {"elevation", t.elevation},
        {"zoom_ratio", t.zoom_ratio},
        {"start_azimuth", t.start_azimuth}}},
      {"light_intensity", s.light_intensity},
      {"object_pose",
       {{"axis", vec_json(s.object_pose.axis)},
        {"start_angle", s.object_pose.start_angle},
        {"sweep", s.object_pose.sweep},
        {"translation", vec_json(s.object_pose.translation)}}},
  };
}

json generate_dataset(const std::vector<NamedMesh>& meshes, const DatasetOptions& opts, const fs::path& out_dir) {
  if (opts.pairs_per_mesh < 1) throw ConfigError("pairs_per_mesh must be >= 1");
  if (opts.num_frames < 1) throw ConfigError("num_frames must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

  json samples = json::array();
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const NamedMesh& nm = meshes[m];
    for (int p = 0; p < opts.pairs_per_mesh; ++p) {
      DatasetSample s = sample_pair_parameters(opts, static_cast<int>(m), p, nm.mesh.bounding_sphere().radius);
      s.mesh_name = nm.name;
      char dir[64];
      std::snprintf(dir, sizeof(dir), "m%03zu_p%03d", m, p);
      s.directory = dir;

      RenderConfig cfg = opts.render;
      cfg.light_intensity = s.light_intensity;
      cfg.pose = s.object_pose;
      const PairedClip clip = render_pair(nm.mesh, s.trajectory, cfg, s.seed, opts.intrinsics, opts.threads);

      const fs::path base = out_dir / s.directory;
      write_clip(base / "textured", clip.textured, opts.fps);
      write_clip(base / "untextured", clip.untextured, opts.fps);
      write_mask_clip(base / "mask", clip.coverage, opts.fps);
      samples.push_back(to_json(s));
    }
  }

  json manifest = {
      {"version", 1},
      {"seed", opts.seed},
      {"pairs_per_mesh", opts.pairs_per_mesh},
      {"num_frames", opts.num_frames},
      {"width", opts.intrinsics.width},
      {"height", opts.intrinsics.height},
      {"focal", opts.intrinsics.resolved_focal()},
      {"gray_albedo", opts.render.gray_albedo},
      {"meshes", json::array()},
      {"samples", samples},
  };
  for (const NamedMesh& nm : meshes) manifest["meshes"].push_back(nm.name);

  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (out_dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
  return manifest;
}

}  // namespace retexkit
