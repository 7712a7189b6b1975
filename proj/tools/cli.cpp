#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retexkit/clip_io.hpp"
#include "retexkit/conditioning.hpp"
#include "retexkit/dataset.hpp"
#include "retexkit/error.hpp"
#include "retexkit/flowmatch.hpp"
#include "retexkit/image_io.hpp"
#include "retexkit/jigsaw.hpp"
#include "retexkit/mesh.hpp"
#include "retexkit/metrics.hpp"
#include "retexkit/parallel.hpp"
#include "retexkit/rng.hpp"

#ifndef RETEXKIT_VERSION
#define RETEXKIT_VERSION "0.0.0"
#endif

namespace retexkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = static_cast<int>(ErrorKind::shape);

using Clock = std::chrono::steady_clock;

// One line of the append-only pipeline manifest.
struct StageRecord {
  std::string command;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void append_manifest(const fs::path& path, const StageRecord& rec, double wall_seconds) {
  for (const std::string& out : rec.outputs) {
    if (!fs::exists(out)) throw IoError("declared output missing after run: " + out);
  }
  json line = {
      {"version", "1"},
      {"command", rec.command},
      {"config", rec.config},
      {"inputs", rec.inputs},
      {"outputs", rec.outputs},
      {"seed", rec.has_seed ? json(rec.seed) : json(nullptr)},
      {"toolkit_version", RETEXKIT_VERSION},
      {"wall_time_s", wall_seconds},
  };
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to manifest " + path.string());
  out << line.dump() << "\n";
}

std::pair<int, int> parse_size(const std::string& text) {
  int w = 0;
  int h = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !in.eof()) {
    throw ConfigError("size must look like WxH, got '" + text + "'");
  }
  return {w, h};
}

PixelScale parse_pixel_scale(double v) {
  if (v == 255.0) return PixelScale::eight_bit_0_255;
  if (v == 1.0) return PixelScale::unit_0_1;
  throw ConfigError("--pixel-scale must be 255 or 1");
}

std::string unique_mesh_name(const fs::path& path, std::size_t index) {
  return std::to_string(index) + "_" + path.stem().string();
}

// ---- render-pairs ----

struct RenderArgs {
  std::vector<std::string> meshes;
  std::string out;
  int pairs_per_mesh = 8;
  int frames = 33;
  std::string size = "480x832";
  double focal = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
  double fps = 16.0;
  double gray_albedo = 0.5;
  double light_min = 0.6;
  double light_max = 1.4;
  std::vector<std::string> kinds;
  std::string manifest;
};

int cmd_render_pairs(const RenderArgs& a) {
  const auto start = Clock::now();
  const auto [width, height] = parse_size(a.size);
  if (!(a.gray_albedo > 0.0 && a.gray_albedo <= 1.0)) throw ConfigError("--gray-albedo must be in (0, 1]");

  DatasetOptions opts;
  opts.pairs_per_mesh = a.pairs_per_mesh;
  opts.num_frames = a.frames;
  opts.intrinsics = {width, height, a.focal};
  opts.render.gray_albedo = a.gray_albedo;
  opts.aug.light_min = a.light_min;
  opts.aug.light_max = a.light_max;
  if (!a.kinds.empty()) {
    opts.aug.kinds.clear();
    for (const std::string& k : a.kinds) opts.aug.kinds.push_back(trajectory_kind_from_string(k));
  }
  opts.seed = a.seed;
  opts.threads = resolve_threads(a.threads);
  opts.fps = a.fps;

  std::vector<NamedMesh> meshes;
  for (std::size_t i = 0; i < a.meshes.size(); ++i) {
    const fs::path p = a.meshes[i];
    if (!fs::exists(p)) throw IoError("mesh file not found: " + p.string());
    meshes.push_back({unique_mesh_name(p, i), load_mesh(p)});
  }

  const fs::path out_dir = a.out;
  const json manifest = generate_dataset(meshes, opts, out_dir);

  StageRecord rec;
  rec.command = "render-pairs";
  rec.config = {{"pairs_per_mesh", a.pairs_per_mesh}, {"frames", a.frames},     {"size", a.size},
                {"focal", opts.intrinsics.resolved_focal()}, {"fps", a.fps}, {"gray_albedo", a.gray_albedo},
                {"light_range", {a.light_min, a.light_max}}, {"threads", opts.threads}};
  rec.inputs = a.meshes;
  rec.outputs.push_back((out_dir / "manifest.json").string());
  for (const auto& s : manifest.at("samples")) rec.outputs.push_back((out_dir / s.at("directory").get<std::string>()).string());
  rec.seed = a.seed;
  rec.has_seed = true;
  append_manifest(a.manifest.empty() ? out_dir / "pipeline.jsonl" : fs::path(a.manifest), rec,
                  std::chrono::duration<double>(Clock::now() - start).count());
  std::cout << "rendered " << manifest.at("samples").size() << " paired clips into " << out_dir.string() << "\n";
  return kExitOk;
}

// ---- jigsaw ----

struct JigsawArgs {
  std::string reference;
  std::string mask;
  std::string out;
  std::string config;
  double patch_fraction = 0.10;
  double threshold = 0.10;
  int canvas_width = 0;
  double flip_h = 0.5;
  double flip_v = 0.5;
  std::uint64_t seed = 0;
  std::string manifest;
};

JigsawConfig load_jigsaw_config(const std::string& path) {
  JigsawConfig cfg;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open jigsaw config " + path);
  try {
    const json j = json::parse(in);
    cfg.patch_fraction = j.value("patch_fraction", cfg.patch_fraction);
    cfg.background_threshold = j.value("background_threshold", cfg.background_threshold);
    cfg.canvas_width = j.value("canvas_width", cfg.canvas_width);
    cfg.flip_horizontal_prob = j.value("flip_horizontal_prob", cfg.flip_horizontal_prob);
    cfg.flip_vertical_prob = j.value("flip_vertical_prob", cfg.flip_vertical_prob);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw IoError("malformed jigsaw config " + path + ": " + e.what());
  }
  return cfg;
}

int cmd_jigsaw(const JigsawArgs& a, const CLI::App& app) {
  const auto start = Clock::now();
  JigsawConfig cfg = a.config.empty() ? JigsawConfig{} : load_jigsaw_config(a.config);
  // Explicit flags win over the config file.
  if (a.config.empty() || app.count("--patch-fraction")) cfg.patch_fraction = a.patch_fraction;
  if (a.config.empty() || app.count("--threshold")) cfg.background_threshold = a.threshold;
  if (a.config.empty() || app.count("--canvas-width")) cfg.canvas_width = a.canvas_width;
  if (a.config.empty() || app.count("--flip-h")) cfg.flip_horizontal_prob = a.flip_h;
  if (a.config.empty() || app.count("--flip-v")) cfg.flip_vertical_prob = a.flip_v;
  if (a.config.empty() || app.count("--seed")) cfg.seed = a.seed;

  const Image reference = read_image(a.reference);
  const Mask mask = read_mask(a.mask);
  if (cfg.canvas_width <= 0) cfg.canvas_width = reference.width();
  const Image mosaic = jigsaw(reference, mask, cfg);
  const fs::path out = a.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_png(out, mosaic);

  StageRecord rec;
  rec.command = "jigsaw";
  rec.config = to_json(cfg);
  rec.inputs = {a.reference, a.mask};
  rec.outputs = {out.string()};
  rec.seed = cfg.seed;
  rec.has_seed = true;
  const fs::path manifest = a.manifest.empty() ? out.parent_path() / "pipeline.jsonl" : fs::path(a.manifest);
  append_manifest(manifest, rec, std::chrono::duration<double>(Clock::now() - start).count());
  std::cout << "mosaic " << mosaic.width() << "x" << mosaic.height() << " written to " << out.string() << "\n";
  return kExitOk;
}

// ---- assemble ----

struct AssembleArgs {
  std::string source;
  std::string mask;
  std::string untextured;
  std::string reference;
  std::string ref_mask;
  std::string out;
  double drop_prob = 0.1;
  std::uint64_t seed = 0;
  int canvas_width = 0;
  double patch_fraction = 0.10;
  double threshold = 0.10;
  double fill = 0.5;
  int mask_dilation = 0;
  std::string manifest;
};

int cmd_assemble(const AssembleArgs& a) {
  const auto start = Clock::now();
  const VideoClip source = read_clip(a.source);
  const MaskClip mask = read_mask_clip(a.mask);
  const VideoClip untextured = read_clip(a.untextured);
  const Image reference = read_image(a.reference);
  const Mask ref_mask = read_mask(a.ref_mask);

  JigsawConfig jcfg;
  jcfg.patch_fraction = a.patch_fraction;
  jcfg.background_threshold = a.threshold;
  jcfg.canvas_width = a.canvas_width > 0 ? a.canvas_width : source.front().width();
  jcfg.seed = derive_seed(a.seed, 1);
  DropoutConfig dcfg{a.drop_prob, derive_seed(a.seed, 2)};
  AssembleOptions opts;
  opts.fill = {static_cast<float>(a.fill), static_cast<float>(a.fill), static_cast<float>(a.fill)};
  opts.mask_dilation = a.mask_dilation;

  const ConditioningSample sample = assemble_sample(source, mask, untextured, reference, ref_mask, jcfg, dcfg, opts);
  const fs::path out = a.out;
  const json extra = {
      {"seed", a.seed},
      {"jigsaw", to_json(jcfg)},
      {"dropout", {{"drop_probability", dcfg.drop_probability}, {"seed", dcfg.seed}}},
      {"fill", a.fill},
      {"mask_dilation", a.mask_dilation},
      {"sources",
       {{"source", a.source}, {"mask", a.mask}, {"untextured", a.untextured}, {"reference", a.reference},
        {"reference_mask", a.ref_mask}}},
  };
  serialize_sample(sample, out, extra);
  write_png(out / "reference.png", sample.reference);

  StageRecord rec;
  rec.command = "assemble";
  rec.config = extra;
  rec.inputs = {a.source, a.mask, a.untextured, a.reference, a.ref_mask};
  rec.outputs = {(out / "conditioning.rtk").string(), (out / "reference.rtk").string(), (out / "sample.json").string(),
                 (out / "reference.png").string()};
  rec.seed = a.seed;
  rec.has_seed = true;
  append_manifest(a.manifest.empty() ? out / "pipeline.jsonl" : fs::path(a.manifest), rec,
                  std::chrono::duration<double>(Clock::now() - start).count());
  std::cout << "sample written to " << out.string() << (sample.dropped ? " (condition dropped)" : "") << "\n";
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string source;
  std::string edited;
  std::string mask;
  std::string reference;
  std::vector<std::string> embeddings;
  int dilation = 16;
  double pixel_scale = 255.0;
  std::string out;
  std::string export_crops;
  double flow_alpha = FlowParams{}.alpha;
  int flow_iterations = FlowParams{}.iterations;
  std::string manifest;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto start = Clock::now();
  MetricsConfig cfg;
  cfg.dilation_radius = a.dilation;
  cfg.pixel_scale = parse_pixel_scale(a.pixel_scale);
  cfg.ewarp.alpha = a.flow_alpha;
  cfg.ewarp.iterations = a.flow_iterations;

  const VideoClip source = read_clip(a.source);
  const VideoClip edited = read_clip(a.edited);
  const MaskClip mask = read_mask_clip(a.mask);
  const Image reference = read_image(a.reference);

  std::optional<EmbeddingSet> embeddings;
  for (const std::string& path : a.embeddings) {
    if (!embeddings) embeddings.emplace();
    for (auto& [k, v] : load_embeddings(path)) (*embeddings)[k] = std::move(v);
  }

  const MetricsReport report = evaluate(source, edited, mask, reference, embeddings ? &*embeddings : nullptr, cfg);
  const json j = to_json(report);
  const fs::path out = a.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write report " + out.string());
    f << j.dump(2) << "\n";
  }

  StageRecord rec;
  rec.command = "evaluate";
  rec.config = {{"dilation", a.dilation}, {"pixel_scale", a.pixel_scale}, {"flow_alpha", a.flow_alpha},
                {"flow_iterations", a.flow_iterations}};
  rec.inputs = {a.source, a.edited, a.mask, a.reference};
  rec.inputs.insert(rec.inputs.end(), a.embeddings.begin(), a.embeddings.end());
  rec.outputs = {out.string()};
  if (!a.export_crops.empty()) {
    write_clip(a.export_crops, foreground_crop(edited, mask, reference.width(), reference.height()));
    rec.outputs.push_back(a.export_crops);
  }
  append_manifest(a.manifest.empty() ? out.parent_path() / "pipeline.jsonl" : fs::path(a.manifest), rec,
                  std::chrono::duration<double>(Clock::now() - start).count());
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ---- fmcheck ----

struct FmcheckArgs {
  std::uint64_t seed = 0;
  int trials = 20;
  std::vector<int> steps{1, flowmatch::kDistilledSteps, flowmatch::kBaseSteps};
  bool inject_fault = false;
  std::string manifest;
};

int cmd_fmcheck(const FmcheckArgs& a) {
  const auto start = Clock::now();
  for (int s : a.steps) {
    if (s < 1) throw ConfigError("--steps values must be >= 1");
  }
  flowmatch::SuiteOptions opts;
  opts.seed = a.seed;
  opts.trials = a.trials;
  opts.steps = a.steps;
  opts.inject_faulty_velocity = a.inject_fault;
  const auto results = flowmatch::run_invariant_suite(opts);

  bool all = true;
  std::printf("%-52s %-6s %-12s %s\n", "check", "result", "measured", "tolerance");
  for (const auto& r : results) {
    all = all && r.passed;
    std::printf("%-52s %-6s %-12.3e %.1e\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.measured, r.tolerance);
  }
  if (!a.manifest.empty()) {
    StageRecord rec;
    rec.command = "fmcheck";
    rec.config = {{"trials", a.trials}, {"steps", a.steps}, {"inject_fault", a.inject_fault}, {"all_passed", all}};
    rec.seed = a.seed;
    rec.has_seed = true;
    append_manifest(a.manifest, rec, std::chrono::duration<double>(Clock::now() - start).count());
  }
  return all ? kExitOk : static_cast<int>(ErrorKind::domain);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"retexkit: paired rendering, jigsaw references, conditioning samples and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RETEXKIT_VERSION);

  RenderArgs render;
  auto* rp = app.add_subcommand("render-pairs", "render paired textured / untextured clips of meshes");
  rp->add_option("--mesh", render.meshes, "mesh file (repeatable); textures load from <stem>.png|.ppm")->required();
  rp->add_option("--out", render.out, "output dataset directory")->required();
  rp->add_option("--pairs-per-mesh", render.pairs_per_mesh, "paired clips per mesh")->capture_default_str();
  rp->add_option("--frames", render.frames, "frames per clip")->capture_default_str();
  rp->add_option("--size", render.size, "frame size WxH")->capture_default_str();
  rp->add_option("--focal", render.focal, "focal length in pixels (0: image height)")->capture_default_str();
  rp->add_option("--seed", render.seed, "global seed")->capture_default_str();
  rp->add_option("--threads", render.threads, "worker threads (0: RETEXKIT_THREADS or 1)")->capture_default_str();
  rp->add_option("--fps", render.fps, "frame rate recorded in clip.json")->capture_default_str();
  rp->add_option("--gray-albedo", render.gray_albedo, "albedo of the untextured pass")->capture_default_str();
  rp->add_option("--light-min", render.light_min, "minimum headlight intensity")->capture_default_str();
  rp->add_option("--light-max", render.light_max, "maximum headlight intensity")->capture_default_str();
  rp->add_option("--kinds", render.kinds, "trajectory kinds to sample (orbital, arc, zoom_in, zoom_out)");
  rp->add_option("--manifest", render.manifest, "pipeline manifest (default <out>/pipeline.jsonl)");

  JigsawArgs jig;
  auto* jg = app.add_subcommand("jigsaw", "build a jigsaw-permuted reference mosaic");
  jg->add_option("--reference", jig.reference, "reference image")->required();
  jg->add_option("--mask", jig.mask, "reference foreground mask")->required();
  jg->add_option("--out", jig.out, "output mosaic PNG")->required();
  jg->add_option("--config", jig.config, "JSON jigsaw config; explicit flags override it");
  jg->add_option("--patch-fraction", jig.patch_fraction, "patch side / reference side")->capture_default_str();
  jg->add_option("--threshold", jig.threshold, "max background fraction per patch")->capture_default_str();
  jg->add_option("--canvas-width", jig.canvas_width, "mosaic width (0: reference width)")->capture_default_str();
  jg->add_option("--flip-h", jig.flip_h, "horizontal flip probability")->capture_default_str();
  jg->add_option("--flip-v", jig.flip_v, "vertical flip probability")->capture_default_str();
  jg->add_option("--seed", jig.seed, "permutation seed")->capture_default_str();
  jg->add_option("--manifest", jig.manifest, "pipeline manifest (default next to --out)");

  AssembleArgs asm_args;
  auto* as = app.add_subcommand("assemble", "assemble a conditioning sample tensor");
  as->add_option("--source", asm_args.source, "source clip directory")->required();
  as->add_option("--mask", asm_args.mask, "object mask clip directory")->required();
  as->add_option("--untextured", asm_args.untextured, "untextured clip directory")->required();
  as->add_option("--reference", asm_args.reference, "reference image")->required();
  as->add_option("--ref-mask", asm_args.ref_mask, "reference foreground mask")->required();
  as->add_option("--out", asm_args.out, "output sample directory")->required();
  as->add_option("--drop-prob", asm_args.drop_prob, "condition dropout probability")->capture_default_str();
  as->add_option("--seed", asm_args.seed, "sample seed")->capture_default_str();
  as->add_option("--canvas-width", asm_args.canvas_width, "reference canvas width (0: source width)")->capture_default_str();
  as->add_option("--patch-fraction", asm_args.patch_fraction, "jigsaw patch fraction")->capture_default_str();
  as->add_option("--threshold", asm_args.threshold, "jigsaw background threshold")->capture_default_str();
  as->add_option("--fill", asm_args.fill, "gray level of the blanked foreground")->capture_default_str();
  as->add_option("--mask-dilation", asm_args.mask_dilation, "dilation of the stored mask, pixels")->capture_default_str();
  as->add_option("--manifest", asm_args.manifest, "pipeline manifest (default <out>/pipeline.jsonl)");

  EvaluateArgs ev;
  auto* evc = app.add_subcommand("evaluate", "score an edited clip against its source and reference");
  evc->add_option("--source", ev.source, "source clip directory")->required();
  evc->add_option("--edited", ev.edited, "edited clip directory")->required();
  evc->add_option("--mask", ev.mask, "object mask clip directory")->required();
  evc->add_option("--reference", ev.reference, "reference image")->required();
  evc->add_option("--embeddings", ev.embeddings, "embedding file, JSON or RTK1 (repeatable)");
  evc->add_option("--dilation", ev.dilation, "mask dilation radius, pixels")->capture_default_str();
  evc->add_option("--pixel-scale", ev.pixel_scale, "255 or 1")->capture_default_str();
  evc->add_option("--out", ev.out, "report JSON path")->required();
  evc->add_option("--export-crops", ev.export_crops, "write foreground crops of the edited clip here");
  evc->add_option("--flow-alpha", ev.flow_alpha, "Horn-Schunck smoothness weight")->capture_default_str();
  evc->add_option("--flow-iterations", ev.flow_iterations, "Horn-Schunck iterations per level")->capture_default_str();
  evc->add_option("--manifest", ev.manifest, "pipeline manifest (default next to --out)");

  FmcheckArgs fm;
  auto* fmc = app.add_subcommand("fmcheck", "run the flow-matching invariant suite");
  fmc->add_option("--seed", fm.seed, "seed for random tensors")->capture_default_str();
  fmc->add_option("--trials", fm.trials, "random trials per check")->capture_default_str();
  fmc->add_option("--steps", fm.steps, "Euler step counts to verify")->capture_default_str();
  fmc->add_flag("--inject-fault", fm.inject_fault, "use a deliberately wrong velocity field (test mode)");
  fmc->add_option("--manifest", fm.manifest, "append a record to this pipeline manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (rp->parsed()) return cmd_render_pairs(render);
    if (jg->parsed()) return cmd_jigsaw(jig, *jg);
    if (as->parsed()) return cmd_assemble(asm_args);
    if (evc->parsed()) return cmd_evaluate(ev);
    if (fmc->parsed()) return cmd_fmcheck(fm);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  }
  return kExitConfig;
}

}  // namespace retexkit::cli
