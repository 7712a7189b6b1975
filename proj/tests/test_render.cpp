#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "render_oracle.hpp"
#include "retexkit/dataset.hpp"
#include "retexkit/error.hpp"
#include "retexkit/render.hpp"
#include "test_support.hpp"

using namespace retexkit;

namespace {

constexpr double kPi = std::numbers::pi;

Mesh triangle_mesh(const Vec3& a, const Vec3& b, const Vec3& c) {
  return Mesh({a, b, c}, {}, {Triangle{{0, 1, 2}, std::nullopt}});
}

CameraPose small_camera(const Vec3& eye, const Vec3& target, int size = 64) {
  CameraPose pose;
  pose.eye = eye;
  pose.look_at = target;
  pose.focal = size;
  pose.image_width = size;
  pose.image_height = size;
  return pose;
}

RenderConfig gray_config(double albedo = 0.5, double intensity = 1.0) {
  RenderConfig cfg;
  cfg.material_mode = MaterialMode::untextured_gray;
  cfg.gray_albedo = albedo;
  cfg.light_intensity = intensity;
  return cfg;
}

}  // namespace

TEST_CASE("trajectory: orbital sweep") {
  Trajectory t;
  t.kind = TrajectoryKind::orbital;
  t.num_frames = 4;
  t.angular_span = 2 * kPi;
  t.elevation = 0.0;
  t.base_distance = 3.0;
  const BoundingSphere sphere{{1, 2, 3}, 2.0};
  const auto poses = generate_trajectory(t, sphere, {64, 64, 0});
  REQUIRE(poses.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const Vec3 d = poses[static_cast<std::size_t>(i)].eye - sphere.center;
    CHECK(norm(d) == doctest::Approx(6.0));
    CHECK(std::atan2(d.x, d.z) == doctest::Approx(std::remainder(i * kPi / 2, 2 * kPi)).epsilon(1e-12));
    CHECK(poses[static_cast<std::size_t>(i)].look_at == sphere.center);
  }
}

TEST_CASE("trajectory: zoom endpoints") {
  Trajectory t;
  t.kind = TrajectoryKind::zoom_in;
  t.num_frames = 2;
  t.base_distance = 3.0;
  t.zoom_ratio = 0.7;
  const BoundingSphere sphere{{0, 0, 0}, 1.5};
  const auto poses = generate_trajectory(t, sphere);
  CHECK(norm(poses[0].eye) == doctest::Approx(1.5 * 3.0));
  CHECK(norm(poses[1].eye) == doctest::Approx(1.5 * 3.0 * 0.7));
  CHECK(norm(normalized(poses[0].eye) - normalized(poses[1].eye)) < 1e-12);
}

TEST_CASE("trajectory: arc sweeps elevation symmetrically") {
  Trajectory t;
  t.kind = TrajectoryKind::arc;
  t.num_frames = 5;
  t.elevation = 0.4;
  const auto poses = generate_trajectory(t, {{0, 0, 0}, 1.0});
  CHECK(std::asin(poses.front().eye.y / norm(poses.front().eye)) == doctest::Approx(-0.4));
  CHECK(std::asin(poses.back().eye.y / norm(poses.back().eye)) == doctest::Approx(0.4));
  CHECK(std::asin(poses[2].eye.y / norm(poses[2].eye)) == doctest::Approx(0.0));
}

TEST_CASE("trajectory: errors") {
  Trajectory t;
  t.num_frames = 0;
  CHECK_THROWS_AS(generate_trajectory(t, {{0, 0, 0}, 1.0}), ConfigError);
  t.num_frames = 3;
  t.base_distance = 1.2;
  CHECK_THROWS_AS(generate_trajectory(t, {{0, 0, 0}, 1.0}), ConfigError);
  t.base_distance = 2.0;
  t.kind = TrajectoryKind::zoom_in;
  t.zoom_ratio = 0.5;  // ends at 1.0 radii
  CHECK_THROWS_AS(generate_trajectory(t, {{0, 0, 0}, 1.0}), ConfigError);
  t.zoom_ratio = 1.2;
  CHECK_THROWS_AS(generate_trajectory(t, {{0, 0, 0}, 1.0}), ConfigError);
  t.kind = TrajectoryKind::orbital;
  CHECK_THROWS_AS(generate_trajectory(t, {{0, 0, 0}, 0.0}), DomainError);
}

TEST_CASE("property: camera stays outside 1.5 radii over random trajectories") {
  Rng rng(1234);
  int produced = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Trajectory t;
    t.kind = static_cast<TrajectoryKind>(rng.below(4));
    t.num_frames = 1 + static_cast<int>(rng.below(12));
    t.base_distance = rng.uniform(1.0, 5.0);
    t.angular_span = rng.uniform(-2 * kPi, 2 * kPi);
    t.elevation = rng.uniform(-1.4, 1.4);
    t.start_azimuth = rng.uniform(-kPi, kPi);
    t.zoom_ratio = t.kind == TrajectoryKind::zoom_in ? rng.uniform(0.2, 1.0) : rng.uniform(1.0, 2.0);
    const BoundingSphere s{{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(0.1, 3.0)};
    try {
      for (const CameraPose& p : generate_trajectory(t, s)) {
        CHECK(norm(p.eye - s.center) >= 1.5 * s.radius * (1 - 1e-12));
        ++produced;
      }
    } catch (const ConfigError&) {
    }
  }
  CHECK(produced > 1000);
}

TEST_CASE("projection matches an independent pinhole pipeline") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 center{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CameraPose pose = small_camera(center + Vec3{rng.uniform(-4, 4), rng.uniform(-2, 2), rng.uniform(3, 6)}, center);
    pose.image_width = 48 + static_cast<int>(rng.below(64));
    pose.focal = rng.uniform(30, 90);
    const Vec3 p = center + Vec3{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const auto got = project_to_pixel(pose, p);
    REQUIRE(got.has_value());
    const auto want = oracle::project(pose, p);
    CHECK(std::abs(got->x - want[0]) < 0.5);
    CHECK(std::abs(got->y - want[1]) < 0.5);
    CHECK(std::abs(got->x - want[0]) < 1e-6);  // the two routes agree far tighter than required
  }
}

TEST_CASE("render: flat-on triangle matches the Lambert formula per pixel") {
  const Mesh mesh = triangle_mesh({-1, -1, 0}, {1, -1, 0}, {0, 1, 0});
  const CameraPose pose = small_camera({0, 0, 1.5}, {0, 0, 0});
  const FrameRender r = render_frame(mesh, pose, gray_config());
  int covered = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!r.coverage.at(x, y)) continue;
      ++covered;
      const Vec3 dir = oracle::pixel_ray(pose, x, y);
      const auto hit = oracle::ray_triangle(pose.eye, dir, mesh.vertices()[0], mesh.vertices()[1], mesh.vertices()[2]);
      REQUIRE(hit.has_value());
      const double expect = oracle::lambert_at(pose.eye, pose.eye + dir * hit->t, mesh.vertices()[0], mesh.vertices()[1],
                                               mesh.vertices()[2], 0.5, 1.0);
      CHECK(std::abs(r.image.at(x, y, 0) - expect) < 1e-3);
      CHECK(r.image.at(x, y, 0) <= 0.5f);
    }
  }
  CHECK(covered > 500);
  // Near the optical axis the surface faces the light: value close to 0.5.
  CHECK(r.image.at(32, 32, 0) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("render: edge-on triangle contributes no light") {
  // The eye lies in the triangle's plane, so n.l = 0 everywhere on it.
  const Mesh mesh = triangle_mesh({-1, 0, -1}, {1, 0, -1}, {0, 0, 1});
  const CameraPose pose = small_camera({0, 0, 4}, {0, 0, 0});
  RenderConfig cfg = gray_config();
  cfg.background_color = {0.25f, 0.25f, 0.25f};
  const FrameRender r = render_frame(mesh, pose, cfg);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (r.coverage.at(x, y)) CHECK(r.image.at(x, y, 0) < 1e-6f);
    }
  }
  CHECK(lambert(0.5, 1.0, {0, 1, 0}, {1, 0, 0}) == 0.0);
  CHECK(lambert(0.5, 1.0, {0, 1, 0}, {0, -1, 0}) == 0.0);
}

TEST_CASE("render: empty pixels get the background exactly") {
  const Mesh mesh = triangle_mesh({-0.1, -0.1, 0}, {0.1, -0.1, 0}, {0, 0.1, 0});
  RenderConfig cfg = gray_config();
  cfg.background_color = {0.2f, 0.4f, 0.6f};
  const FrameRender r = render_frame(mesh, small_camera({0, 0, 3}, {0, 0, 0}), cfg);
  CHECK(r.coverage.at(0, 0) == 0);
  CHECK(r.image.rgb(0, 0) == Rgb{0.2f, 0.4f, 0.6f});
  CHECK(std::isinf(r.depth.at(0, 0, 0)));
  CHECK(r.coverage.count() > 0);
}

TEST_CASE("render: nearer triangle wins (brute-force ray cast)") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Vec3> v;
    for (int k = 0; k < 6; ++k) v.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Mesh mesh(v, {}, {Triangle{{0, 1, 2}, std::nullopt}, Triangle{{3, 4, 5}, std::nullopt}});
    const CameraPose pose = small_camera({rng.uniform(-1, 1), rng.uniform(-1, 1), 4.0}, {0, 0, 0}, 48);
    const FrameRender r = render_frame(mesh, pose, gray_config());
    const Vec3 fwd = normalized(pose.look_at - pose.eye);
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        const Vec3 dir = oracle::pixel_ray(pose, x, y);
        std::optional<double> best;
        double best_margin = 1.0;
        for (int t = 0; t < 2; ++t) {
          const auto hit = oracle::ray_triangle(pose.eye, dir, v[3 * t], v[3 * t + 1], v[3 * t + 2]);
          if (hit && hit->margin >= 0) {
            const double z = hit->t * dot(dir, fwd);
            if (!best || z < *best) best = z;
          }
          if (hit) best_margin = std::min(best_margin, std::abs(hit->margin));
        }
        if (best_margin < 1e-6) continue;  // sample sits on an edge; either answer is valid
        CHECK(static_cast<bool>(r.coverage.at(x, y)) == best.has_value());
        if (best && r.coverage.at(x, y)) CHECK(r.depth.at(x, y, 0) == doctest::Approx(*best).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("render: textured sampling and clamping") {
  Image tex(2, 2, 3);
  tex.set_rgb(0, 0, {1, 0, 0});
  tex.set_rgb(1, 0, {1, 0, 0});
  tex.set_rgb(0, 1, {1, 0, 0});
  tex.set_rgb(1, 1, {1, 0, 0});
  Mesh mesh({{-1, -1, 0}, {1, -1, 0}, {0, 1, 0}}, {{0, 0}, {1, 0}, {0.5, 1}},
            {Triangle{{0, 1, 2}, std::array<int, 3>{0, 1, 2}}}, tex);
  RenderConfig cfg;
  cfg.light_intensity = 3.0;  // saturates
  const FrameRender r = render_frame(mesh, small_camera({0, 0, 2}, {0, 0, 0}), cfg);
  CHECK(r.image.at(32, 32, 0) == 1.0f);
  CHECK(r.image.at(32, 32, 1) == 0.0f);
  for (float v : r.image.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("render: degenerate camera") {
  const Mesh mesh = triangle_mesh({-1, -1, 0}, {1, -1, 0}, {0, 1, 0});
  CHECK_THROWS_AS(render_frame(mesh, small_camera({0, 0, 0}, {0, 0, 0}), gray_config()), DomainError);
  CHECK_THROWS_AS(render_frame(mesh, small_camera({0, 3, 0}, {0, 0, 0}), gray_config()), DomainError);
}

TEST_CASE("render: geometry crossing the eye plane is clipped, not wrapped") {
  // A large floor passing under and behind the camera.
  const Mesh mesh = triangle_mesh({-50, -1, -50}, {50, -1, -50}, {0, -1, 50});
  const FrameRender r = render_frame(mesh, small_camera({0, 0, 3}, {0, -0.2, 0}), gray_config());
  // Lower half of the image sees the floor, the top rows see nothing.
  CHECK(r.coverage.at(32, 60) == 1);
  CHECK(r.coverage.at(32, 2) == 0);
  for (float v : r.image.data()) CHECK(std::isfinite(v));
}

TEST_CASE("render_pair: silhouettes agree and uniform gray texture matches the gray pass") {
  Image gray_tex(4, 4, 3, 0.5f);
  const Mesh mesh = testing::textured_box(1.0, 0.7, 1.3, gray_tex);
  Trajectory t;
  t.num_frames = 5;
  t.kind = TrajectoryKind::arc;
  RenderConfig cfg;
  cfg.gray_albedo = 0.5;
  const PairedClip pair = render_pair(mesh, t, cfg, 42, {48, 48, 0});
  REQUIRE(pair.textured.size() == 5);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(pair.textured[f] == pair.untextured[f]);
    CHECK(pair.coverage[f].count() > 0);
  }
}

TEST_CASE("render_pair: deterministic and independent of thread count") {
  const Mesh mesh = testing::random_blob(3, true);
  Trajectory t;
  t.num_frames = 6;
  const RenderConfig cfg;
  const PairedClip a = render_pair(mesh, t, cfg, 9, {40, 32, 0}, 1);
  const PairedClip b = render_pair(mesh, t, cfg, 9, {40, 32, 0}, 4);
  CHECK(a.textured == b.textured);
  CHECK(a.untextured == b.untextured);
  CHECK(a.coverage == b.coverage);
  const PairedClip c = render_pair(mesh, t, cfg, 10, {40, 32, 0}, 1);
  CHECK_FALSE(a.textured == c.textured);  // different seed, different object pose
}

TEST_CASE("render_pair: Lambert bound on the untextured pass") {
  const Mesh mesh = testing::random_blob(11, true);
  Trajectory t;
  t.num_frames = 4;
  t.kind = TrajectoryKind::zoom_out;
  t.zoom_ratio = 1.4;
  RenderConfig cfg;
  cfg.gray_albedo = 0.4;
  cfg.light_intensity = 1.2;
  const PairedClip pair = render_pair(mesh, t, cfg, 1, {32, 32, 0});
  for (std::size_t f = 0; f < pair.untextured.size(); ++f) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (!pair.coverage[f].at(x, y)) continue;
        CHECK(pair.untextured[f].at(x, y, 0) <= static_cast<float>(0.4 * 1.2) + 1e-6f);
      }
    }
  }
}

TEST_CASE("generate_dataset: counting, determinism, ranges") {
  const auto dir = testing::temp_dir("dataset");
  std::vector<NamedMesh> meshes{{"a", testing::random_blob(1, true)}, {"b", testing::random_blob(2, false)}};
  DatasetOptions opts;
  opts.pairs_per_mesh = 8;
  opts.num_frames = 2;
  opts.intrinsics = {16, 16, 0};
  opts.seed = 5;
  opts.aug.light_min = 0.7;
  opts.aug.light_max = 0.9;
  const auto m1 = generate_dataset(meshes, opts, dir / "one");
  const auto m2 = generate_dataset(meshes, opts, dir / "two");
  CHECK(m1.at("samples").size() == 16);
  CHECK(m1 == m2);
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "one")) count += entry.is_directory() ? 1 : 0;
  CHECK(count == 16);
  for (const auto& s : m1.at("samples")) {
    const double light = s.at("light_intensity").get<double>();
    CHECK(light >= 0.7);
    CHECK(light <= 0.9);
    CHECK(std::filesystem::exists(dir / "one" / s.at("directory").get<std::string>() / "mask" / "clip.json"));
  }
  opts.pairs_per_mesh = 0;
  CHECK_THROWS_AS(generate_dataset(meshes, opts, dir / "three"), ConfigError);
}

TEST_CASE("generate_dataset: unwritable output") {
  const auto dir = testing::temp_dir("dataset_bad");
  { std::ofstream(dir / "file") << "x"; }
  std::vector<NamedMesh> meshes{{"a", testing::random_blob(1, false)}};
  DatasetOptions opts;
  opts.pairs_per_mesh = 1;
  opts.num_frames = 1;
  opts.intrinsics = {8, 8, 0};
  CHECK_THROWS_AS(generate_dataset(meshes, opts, dir / "file" / "sub"), IoError);
}
