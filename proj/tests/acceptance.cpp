// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "cli_pipeline.hpp"
#include "json.hpp"
#include "render_oracle.hpp"
#include "retexkit/conditioning.hpp"
#include "retexkit/dataset.hpp"
#include "retexkit/error.hpp"
#include "retexkit/flowmatch.hpp"
#include "retexkit/jigsaw.hpp"
#include "retexkit/metrics.hpp"
#include "retexkit/render.hpp"

using namespace retexkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

// 1. Textured and untextured coverage bit-identical; 20 meshes at 64x64x9, < 60 s on one thread.
Outcome render_alignment() {
  const auto start = Clock::now();
  int mismatched_frames = 0, empty_clips = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh mesh = testing::random_blob(1000 + static_cast<std::uint64_t>(trial), true);
    DatasetOptions opts;
    opts.num_frames = 9;
    opts.intrinsics = {64, 64, 0};
    opts.seed = 2024;
    const DatasetSample s = sample_pair_parameters(opts, trial, 0, mesh.bounding_sphere().radius);
    RenderConfig cfg;
    cfg.light_intensity = s.light_intensity;
    cfg.pose = s.object_pose;
    const PairedClip pair = render_pair(mesh, s.trajectory, cfg, s.seed, opts.intrinsics, 1);
    // Re-render both passes frame by frame and compare silhouettes directly.
    bool any = false;
    for (int f = 0; f < 9; ++f) {
      const RigidTransform xf = object_transform_at(*cfg.pose, mesh.bounding_sphere(), f, 9);
      RenderConfig tex = cfg, gray = cfg;
      tex.material_mode = MaterialMode::textured;
      gray.material_mode = MaterialMode::untextured_gray;
      const FrameRender a = render_frame(mesh, pair.cameras[static_cast<std::size_t>(f)], tex, xf);
      const FrameRender b = render_frame(mesh, pair.cameras[static_cast<std::size_t>(f)], gray, xf);
      if (!(a.coverage == b.coverage) || !(a.coverage == pair.coverage[static_cast<std::size_t>(f)])) {
        ++mismatched_frames;
      }
      any = any || a.coverage.count() > 0;
    }
    empty_clips += any ? 0 : 1;
  }
  const double t = seconds_since(start);
  return {mismatched_frames == 0 && empty_clips == 0 && t < 60.0,
          fmt("mismatched frames %.0f/180, empty clips %.0f, %.2f s (limit 60 s)", mismatched_frames, empty_clips, t)};
}

// 2. Single-triangle untextured shading vs albedo*I*max(0, n.l), 100 random poses, tol 1e-3.
Outcome lambert_oracle() {
  Rng rng(77);
  double worst = 0.0;
  long checked = 0;
  int uncovered_scenes = 0, missing_hits = 0;
  for (int pose_i = 0; pose_i < 100; ++pose_i) {
    const Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Mesh mesh({a, b, c}, {}, {Triangle{{0, 1, 2}, std::nullopt}});
    const double az = rng.uniform(-3.14159, 3.14159), el = rng.uniform(-1.2, 1.2), dist = rng.uniform(2.5, 5.0);
    CameraPose pose;
    pose.eye = Vec3{dist * std::cos(el) * std::sin(az), dist * std::sin(el), dist * std::cos(el) * std::cos(az)};
    pose.look_at = (a + b + c) * (1.0 / 3.0);
    pose.image_width = 64;
    pose.image_height = 64;
    pose.focal = rng.uniform(40, 90);
    RenderConfig cfg;
    cfg.material_mode = MaterialMode::untextured_gray;
    cfg.gray_albedo = rng.uniform(0.1, 1.0);
    cfg.light_intensity = rng.uniform(0.3, 2.0);
    const FrameRender r = render_frame(mesh, pose, cfg);
    if (r.coverage.count() == 0) ++uncovered_scenes;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (!r.coverage.at(x, y)) continue;
        const Vec3 dir = oracle::pixel_ray(pose, x, y);
        const auto hit = oracle::ray_triangle(pose.eye, dir, a, b, c);
        if (!hit || hit->margin < -1e-6) {
          ++missing_hits;
          continue;
        }
        const double want = oracle::lambert_at(pose.eye, pose.eye + dir * hit->t, a, b, c, cfg.gray_albedo,
                                               cfg.light_intensity);
        for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(r.image.at(x, y, ch) - want));
        ++checked;
      }
    }
  }
  return {worst < 1e-3 && missing_hits == 0 && checked > 10000,
          fmt("max |err| %.3g (tol 1e-3) over %.0f pixels, %.0f covered pixels without an oracle hit, %.0f empty scenes",
              worst, static_cast<double>(checked), missing_hits, uncovered_scenes)};
}

// 3. Jigsaw conservation, filter soundness at 10%, and the 100% degenerate setting on 50 pairs.
Outcome jigsaw_conservation() {
  Rng rng(31);
  int conservation_fail = 0, filter_fail = 0, degenerate_fail = 0, sparse = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 32 + static_cast<int>(rng.below(97)), h = 32 + static_cast<int>(rng.below(97));
    const Image ref = testing::random_image(rng, w, h);
    Mask mask(w, h);
    const double cx = rng.uniform(0.3, 0.7) * w, cy = rng.uniform(0.3, 0.7) * h;
    const double rx = rng.uniform(0.2, 0.5) * w, ry = rng.uniform(0.2, 0.5) * h;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        mask.at(x, y) = dx * dx + dy * dy <= 1.0 ? 1 : 0;
      }
    JigsawConfig cfg;
    cfg.patch_fraction = rng.uniform(0.05, 0.25);
    cfg.background_threshold = 0.10;
    cfg.canvas_width = w;
    cfg.seed = rng.next_u64();

    // (c) 100% setting.
    JigsawConfig full = cfg;
    full.patch_fraction = 1.0;
    const Rect box = foreground_bbox(mask);
    const Image want = crop(ref, box);
    const Image got = jigsaw(ref, mask, full);
    const Image expect = resize_bilinear(want, w, std::max(1, static_cast<int>(std::lround(box.height * double(w) / box.width))));
    if (!(got == expect)) ++degenerate_fail;

    PatchSet ps;
    try {
      ps = extract_patches(ref, mask, cfg);
    } catch (const DomainError&) {
      ++sparse;
      continue;
    }
    const int side = ps.patch_side;
    // (b) exhaustive filter check over the grid anchored at the box corner.
    std::set<std::pair<int, int>> kept;
    for (const GridCoord& g : ps.source_grid_coords) kept.insert({g.row, g.col});
    std::vector<std::array<float, 3>> kept_pixels;
    for (int r = 0; box.y + r * side < box.y + box.height; ++r) {
      for (int c = 0; box.x + c * side < box.x + box.width; ++c) {
        const int x0 = box.x + c * side, y0 = box.y + r * side;
        if (x0 + side > w || y0 + side > h) {
          if (kept.count({r, c})) ++filter_fail;
          continue;
        }
        int bg = 0;
        for (int y = y0; y < y0 + side; ++y)
          for (int x = x0; x < x0 + side; ++x) bg += mask.at(x, y) ? 0 : 1;
        const double frac = static_cast<double>(bg) / (side * side);
        const bool is_kept = kept.count({r, c}) > 0;
        if (is_kept != (frac <= 0.10)) ++filter_fail;
        if (is_kept)
          for (int y = y0; y < y0 + side; ++y)
            for (int x = x0; x < x0 + side; ++x) kept_pixels.push_back({ref.at(x, y, 0), ref.at(x, y, 1), ref.at(x, y, 2)});
      }
    }
    // (a) multiset of the non-cycled cells of the pre-resize grid.
    const PatchSet perm = permute_patches(ps, cfg);
    const Image grid = pack_grid(perm, cfg.canvas_width);
    const int k = grid.width() / side;
    std::vector<std::array<float, 3>> grid_pixels;
    for (std::size_t i = 0; i < perm.patches.size(); ++i) {
      const int ox = static_cast<int>(i) % k * side, oy = static_cast<int>(i) / k * side;
      for (int y = oy; y < oy + side; ++y)
        for (int x = ox; x < ox + side; ++x) grid_pixels.push_back({grid.at(x, y, 0), grid.at(x, y, 1), grid.at(x, y, 2)});
    }
    std::sort(kept_pixels.begin(), kept_pixels.end());
    std::sort(grid_pixels.begin(), grid_pixels.end());
    if (kept_pixels != grid_pixels) ++conservation_fail;
  }
  return {conservation_fail == 0 && filter_fail == 0 && degenerate_fail == 0 && sparse < 10,
          fmt("conservation failures %.0f, filter misclassifications %.0f, 100%% mismatches %.0f, sparse refs %.0f (of 50)",
              conservation_fail, filter_fail, degenerate_fail, sparse)};
}

// 4. Flow-matching invariants.
Outcome flowmatch_suite() {
  flowmatch::SuiteOptions opts;
  opts.seed = 4;
  opts.trials = 50;
  opts.steps = {1, 3, 50};
  bool ok = true;
  std::string worst;
  for (const auto& r : flowmatch::run_invariant_suite(opts)) {
    ok = ok && r.passed;
    if (!r.passed) worst += r.name + "; ";
  }
  // Direct spot checks, independent of the harness.
  Rng rng(5);
  flowmatch::LatentTensor z0({4, 4}), eps({4, 4});
  for (double& v : z0.data()) v = rng.normal();
  for (double& v : eps.data()) v = rng.normal();
  ok = ok && flowmatch::interpolate({z0, eps, 0.0}) == z0 && flowmatch::interpolate({z0, eps, 1.0}) == eps;
  ok = ok && flowmatch::cfg_combine(z0, eps, 1.0) == eps;
  double round_trip = 0.0;
  for (int steps : {1, 3, 50}) {
    const auto v = flowmatch::target_velocity(z0, eps);
    const auto out = flowmatch::euler_sample([&](const flowmatch::LatentTensor&, double) { return v; }, eps, steps);
    for (std::size_t i = 0; i < out.size(); ++i) round_trip = std::max(round_trip, std::abs(out[i] - z0[i]));
  }
  ok = ok && round_trip < 1e-12;
  return {ok, worst.empty() ? fmt("all invariants hold; direct round-trip max err %.2g (tol 1e-12)", round_trip)
                            : "failed: " + worst};
}

// 5. Metrics protocol.
Outcome metrics_protocol() {
  MetricsConfig cfg;  // dilation 16, 8-bit scale
  Rng rng(55);
  int exclusion_fail = 0, psnr_fail = 0;
  double ssim_identity_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    VideoClip src, edited;
    MaskClip mask;
    for (int f = 0; f < 2; ++f) {
      src.push_back(testing::random_image(rng, 72, 72));
      edited.push_back(src.back());
      for (int k = 0; k < 100; ++k)
        edited.back().at(static_cast<int>(rng.below(72)), static_cast<int>(rng.below(72)), 1) =
            static_cast<float>(rng.uniform(0, 1));
      Mask m(72, 72);
      const int x0 = 24 + static_cast<int>(rng.below(12)), y0 = 24 + static_cast<int>(rng.below(12));
      for (int y = y0; y < y0 + 8; ++y)
        for (int x = x0; x < x0 + 8; ++x) m.at(x, y) = 1;
      mask.push_back(m);
    }
    const Image reference = testing::random_image(rng, 16, 16);
    const MetricsReport base = evaluate(src, edited, mask, reference, nullptr, cfg);
    VideoClip corrupted = edited;
    for (std::size_t f = 0; f < 2; ++f) {
      const Mask dil = dilate_mask(mask[f], cfg.dilation_radius);
      for (int y = 0; y < 72; ++y)
        for (int x = 0; x < 72; ++x)
          if (dil.at(x, y))
            for (int ch = 0; ch < 3; ++ch) corrupted[f].at(x, y, ch) = static_cast<float>(rng.uniform(0, 1));
    }
    const MetricsReport after = evaluate(src, corrupted, mask, reference, nullptr, cfg);
    if (after.background.mse != base.background.mse || after.background.ssim != base.background.ssim ||
        after.background.psnr != base.background.psnr) {
      ++exclusion_fail;
    }
    for (const MetricsReport* r : {&base, &after}) {
      const nlohmann::json j = to_json(*r);
      const double mse = j["background"]["mse"].get<double>(), psnr = j["background"]["psnr"].get<double>();
      const double want = mse == 0.0 ? 99.0 : 10.0 * std::log10(255.0 * 255.0 / mse);
      if (std::abs(psnr - want) > 1e-9 || !validate_report_json(j).empty()) ++psnr_fail;
    }
    const MetricsReport same = evaluate(src, src, mask, reference, nullptr, cfg);
    ssim_identity_err = std::max(ssim_identity_err, std::abs(same.background.ssim - 1.0));
  }

  const Image flat(48, 48, 3, 0.42f);
  const double constant = ewarp({flat, flat, flat, flat}, cfg.ewarp);

  int ordered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    VideoClip still, shift, noise;
    Rng nrng(seed * 7919 + 1);
    for (int f = 0; f < 3; ++f) {
      Rng a(seed), b(seed);
      still.push_back(testing::smooth_texture(a, 48, 48));
      shift.push_back(testing::smooth_texture(b, 48, 48, 1.0 * f, 0.5 * f));
      Image n(48, 48, 3);
      for (float& v : n.data()) v = static_cast<float>(nrng.uniform(0.0, 1.0));
      noise.push_back(n);
    }
    const double es = ewarp(still, cfg.ewarp), em = ewarp(shift, cfg.ewarp), en = ewarp(noise, cfg.ewarp);
    ordered += (es < em && em < en) ? 1 : 0;
  }
  const bool ok = exclusion_fail == 0 && psnr_fail == 0 && ssim_identity_err < 1e-12 && constant == 0.0 && ordered >= 95;
  return {ok, fmt("exclusion failures %.0f, PSNR-MSE failures %.0f, |SSIM(x,x)-1| %.1g, constant-clip EWarp %.3g",
                  exclusion_fail, psnr_fail, ssim_identity_err, constant) +
                  ", ordered " + std::to_string(ordered) + "/100 (need 95)"};
}

// 6. Dropout rate of assembled samples at p = 0.1 over 10,000 samples.
Outcome dropout_rate() {
  Rng rng(66);
  const VideoClip src{testing::random_image(rng, 4, 4)};
  Mask m(4, 4);
  m.at(1, 1) = 1;
  const MaskClip mask{m};
  const VideoClip unt{testing::random_image(rng, 4, 4)};
  const Image ref = testing::random_image(rng, 8, 8);
  Mask ref_mask(8, 8);
  for (auto& v : ref_mask.data()) v = 1;
  int dropped = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    JigsawConfig jc;
    jc.patch_fraction = 0.5;
    jc.seed = derive_seed(9, 2 * i);
    const ConditioningSample s = assemble_sample(src, mask, unt, ref, ref_mask, jc, {0.1, derive_seed(9, 2 * i + 1)});
    dropped += s.dropped ? 1 : 0;
  }
  const double rate = dropped / 10000.0;
  return {rate >= 0.09 && rate <= 0.11, fmt("empirical rate %.4f (need [0.09, 0.11])", rate)};
}

// 7. render-pairs -> jigsaw -> assemble -> evaluate on 64x64x9, < 120 s, schema-valid report.
Outcome end_to_end() {
  const auto start = Clock::now();
  const auto dir = testing::temp_dir("acceptance_e2e");
  const testing::PipelineResult r = testing::run_pipeline(dir, 64, 9);
  const double t = seconds_since(start);
  std::vector<std::string> problems{"no report"};
  if (std::filesystem::exists(r.report)) {
    std::ifstream in(r.report);
    problems = validate_report_json(nlohmann::json::parse(in));
  }
  const bool ok = r.render == 0 && r.jigsaw == 0 && r.assemble == 0 && r.evaluate == 0 && problems.empty() && t < 120.0;
  return {ok, fmt("exit codes %.0f/%.0f/%.0f/%.0f", r.render, r.jigsaw, r.assemble, r.evaluate) +
                  fmt(", %.2f s (limit 120 s), schema problems: ", t) + std::to_string(problems.size())};
}

}  // namespace

int main() {
  report(1, "render-pair silhouette alignment", render_alignment);
  report(2, "Lambert shading oracle", lambert_oracle);
  report(3, "jigsaw conservation and background filter", jigsaw_conservation);
  report(4, "flow-matching invariants", flowmatch_suite);
  report(5, "background/temporal metrics protocol", metrics_protocol);
  report(6, "condition dropout rate", dropout_rate);
  report(7, "end-to-end CLI pipeline", end_to_end);
  std::printf("%d of 7 criteria passed\n", 7 - failures);
  return failures == 0 ? 0 : 1;
}
