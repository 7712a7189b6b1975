#include "retexkit/conditioning.hpp"

#include <fstream>

#include "retexkit/clip_io.hpp"
#include "retexkit/error.hpp"
#include "retexkit/morphology.hpp"
#include "retexkit/rng.hpp"

namespace retexkit {

namespace fs = std::filesystem;
using nlohmann::json;

VideoClip make_background(const VideoClip& source, const MaskClip& mask, const Rgb& fill) {
  check_same_dims(source, mask, "make_background");
  VideoClip out = source;
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (out[f].channels() != 3) throw ShapeError("make_background expects RGB frames");
    for (int y = 0; y < out[f].height(); ++y) {
      for (int x = 0; x < out[f].width(); ++x) {
        if (mask[f].at(x, y)) out[f].set_rgb(x, y, fill);
      }
    }
  }
  return out;
}

bool dropout_fires(const DropoutConfig& cfg) {
  if (!(cfg.drop_probability >= 0.0 && cfg.drop_probability <= 1.0)) {
    throw ConfigError("drop probability must be in [0, 1]");
  }
  Rng rng(cfg.seed);
  return rng.bernoulli(cfg.drop_probability);
}

ConditioningSample assemble_sample(const VideoClip& source, const MaskClip& mask, const VideoClip& untextured,
                                   const Image& reference, const Mask& reference_mask, const JigsawConfig& jigsaw_cfg,
                                   const DropoutConfig& drop_cfg, const AssembleOptions& opts) {
  check_same_dims(source, mask, "source/mask");
  check_same_dims(source, untextured, "source/untextured");
  if (opts.mask_dilation < 0) throw ConfigError("mask dilation must be >= 0");

  ConditioningSample s;
  s.reference = jigsaw(reference, reference_mask, jigsaw_cfg);
  s.background_clip = make_background(source, mask, opts.fill);
  s.untextured_clip = untextured;
  s.mask_clip.reserve(mask.size());
  for (const Mask& m : mask) s.mask_clip.push_back(dilate_mask(m, opts.mask_dilation));

  s.dropped = dropout_fires(drop_cfg);
  if (s.dropped) {
    s.reference = Image(s.reference.width(), s.reference.height(), 3, 1.0f);
    for (Mask& m : s.mask_clip) std::fill(m.data().begin(), m.data().end(), 0);
  }
  return s;
}

Tensor4 pack_conditioning(const ConditioningSample& s) {
  check_same_dims(s.background_clip, s.untextured_clip, "background/untextured");
  check_same_dims(s.background_clip, s.mask_clip, "background/mask");
  Tensor4 t;
  t.num_frames = static_cast<std::uint32_t>(s.background_clip.size());
  t.height = static_cast<std::uint32_t>(s.background_clip[0].height());
  t.width = static_cast<std::uint32_t>(s.background_clip[0].width());
  t.channels = SampleLayout::channels_per_frame;
  t.data.resize(t.element_count());
  for (std::size_t f = 0; f < t.num_frames; ++f) {
    const Image& bg = s.background_clip[f];
    const Image& un = s.untextured_clip[f];
    const Mask& m = s.mask_clip[f];
    for (std::size_t y = 0; y < t.height; ++y) {
      for (std::size_t x = 0; x < t.width; ++x) {
        const int xi = static_cast<int>(x);
        const int yi = static_cast<int>(y);
        for (int c = 0; c < 3; ++c) {
          t.at(f, y, x, SampleLayout::background_offset + c) = bg.at(xi, yi, c);
          t.at(f, y, x, SampleLayout::untextured_offset + c) = un.at(xi, yi, c);
        }
        t.at(f, y, x, SampleLayout::mask_offset) = m.at(xi, yi) ? 1.0f : 0.0f;
      }
    }
  }
  return t;
}

void unpack_conditioning(const Tensor4& t, ConditioningSample& s) {
  if (t.channels != SampleLayout::channels_per_frame) throw ShapeError("conditioning tensor must have 7 channels");
  if (t.num_frames == 0 || t.height == 0 || t.width == 0) throw ShapeError("conditioning tensor is empty");
  const int w = static_cast<int>(t.width);
  const int h = static_cast<int>(t.height);
  s.background_clip.assign(t.num_frames, Image(w, h, 3));
  s.untextured_clip.assign(t.num_frames, Image(w, h, 3));
  s.mask_clip.assign(t.num_frames, Mask(w, h));
  for (std::size_t f = 0; f < t.num_frames; ++f) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto ux = static_cast<std::size_t>(x);
        const auto uy = static_cast<std::size_t>(y);
        for (int c = 0; c < 3; ++c) {
          s.background_clip[f].at(x, y, c) = t.at(f, uy, ux, SampleLayout::background_offset + c);
          s.untextured_clip[f].at(x, y, c) = t.at(f, uy, ux, SampleLayout::untextured_offset + c);
        }
        const float m = t.at(f, uy, ux, SampleLayout::mask_offset);
        if (m != 0.0f && m != 1.0f) throw IoError("corrupt conditioning tensor: mask channel is not binary");
        s.mask_clip[f].at(x, y) = m == 1.0f ? 1 : 0;
      }
    }
  }
}

Tensor4 image_to_tensor(const Image& image) {
  Tensor4 t;
  t.num_frames = 1;
  t.height = static_cast<std::uint32_t>(image.height());
  t.width = static_cast<std::uint32_t>(image.width());
  t.channels = static_cast<std::uint32_t>(image.channels());
  t.data = image.data();
  return t;
}

Image tensor_to_image(const Tensor4& t) {
  if (t.num_frames != 1 || t.width == 0 || t.height == 0 || t.channels == 0) {
    throw ShapeError("image tensor must hold exactly one non-empty frame");
  }
  Image img(static_cast<int>(t.width), static_cast<int>(t.height), static_cast<int>(t.channels));
  img.data() = t.data;
  return img;
}

json to_json(const JigsawConfig& cfg) {
  return {{"patch_fraction", cfg.patch_fraction},
          {"background_threshold", cfg.background_threshold},
          {"canvas_width", cfg.canvas_width},
          {"flip_horizontal_prob", cfg.flip_horizontal_prob},
          {"flip_vertical_prob", cfg.flip_vertical_prob},
          {"seed", cfg.seed}};
}

json serialize_sample(const ConditioningSample& sample, const fs::path& dir, const json& extra) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
  const Tensor4 cond = pack_conditioning(sample);
  write_tensor(dir / "conditioning.rtk", cond);
  write_tensor(dir / "reference.rtk", image_to_tensor(sample.reference));

  json manifest = {
      {"conditioning", "conditioning.rtk"},
      {"reference", "reference.rtk"},
      {"num_frames", cond.num_frames},
      {"height", cond.height},
      {"width", cond.width},
      {"reference_width", sample.reference.width()},
      {"reference_height", sample.reference.height()},
      {"dropped", sample.dropped},
      {"layout",
       {{"channels_per_frame", SampleLayout::channels_per_frame},
        {"channel_order", {"background_r", "background_g", "background_b", "untextured_r", "untextured_g",
                           "untextured_b", "mask"}},
        {"reference_prepended", SampleLayout::reference_prepended}}},
  };
  manifest.update(extra);
  std::ofstream out(dir / "sample.json");
  if (!out) throw IoError("cannot write " + (dir / "sample.json").string());
  out << manifest.dump(2) << "\n";
  return manifest;
}

ConditioningSample deserialize_sample(const fs::path& dir) {
  std::ifstream in(dir / "sample.json");
  if (!in) throw IoError("missing sample.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed sample.json: ") + e.what());
  }
  const Tensor4 cond = read_tensor(dir / manifest.value("conditioning", std::string("conditioning.rtk")));
  const Tensor4 ref = read_tensor(dir / manifest.value("reference", std::string("reference.rtk")));
  try {
    if (cond.num_frames != manifest.at("num_frames").get<std::uint32_t>() ||
        cond.height != manifest.at("height").get<std::uint32_t>() ||
        cond.width != manifest.at("width").get<std::uint32_t>() ||
        cond.channels != manifest.at("layout").at("channels_per_frame").get<std::uint32_t>() ||
        ref.width != manifest.at("reference_width").get<std::uint32_t>() ||
        ref.height != manifest.at("reference_height").get<std::uint32_t>()) {
      throw ShapeError("tensor dimensions disagree with sample.json");
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed sample.json: ") + e.what());
  }
  ConditioningSample s;
  unpack_conditioning(cond, s);
  s.reference = tensor_to_image(ref);
  s.dropped = manifest.value("dropped", false);
  return s;
}

}  // namespace retexkit
