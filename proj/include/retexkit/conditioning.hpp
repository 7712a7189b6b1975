#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "retexkit/image.hpp"
#include "retexkit/jigsaw.hpp"
#include "retexkit/tensor_file.hpp"

namespace retexkit {

// Per-frame channel packing of the conditioning tensor: background RGB, untextured RGB, mask.
// The reference image travels separately and is placed before the first frame.
struct SampleLayout {
  static constexpr int channels_per_frame = 7;
  static constexpr int background_offset = 0;
  static constexpr int untextured_offset = 3;
  static constexpr int mask_offset = 6;
  static constexpr bool reference_prepended = true;
};

struct DropoutConfig {
  double drop_probability = 0.1;
  std::uint64_t seed = 0;
};

struct AssembleOptions {
  Rgb fill{0.5f, 0.5f, 0.5f};  // blanked-foreground color of the background clip
  int mask_dilation = 0;       // applied to the stored mask channel only
};

struct ConditioningSample {
  Image reference;  // jigsawed, canvas_width wide; all-white when dropped
  MaskClip mask_clip;
  VideoClip background_clip;
  VideoClip untextured_clip;
  bool dropped = false;

  friend bool operator==(const ConditioningSample&, const ConditioningSample&) = default;
};

// Pixels where mask == 1 become `fill`; all others are copied verbatim.
VideoClip make_background(const VideoClip& source, const MaskClip& mask, const Rgb& fill = {0.5f, 0.5f, 0.5f});

// The seeded Bernoulli(drop_probability) draw used by assemble_sample.
bool dropout_fires(const DropoutConfig& cfg);

// Runs jigsaw on the reference, blanks the source foreground, then applies condition dropout:
// a dropped sample gets an all-white reference (same size as the mosaic) and an all-zero mask.
ConditioningSample assemble_sample(const VideoClip& source, const MaskClip& mask, const VideoClip& untextured,
                                   const Image& reference, const Mask& reference_mask, const JigsawConfig& jigsaw_cfg,
                                   const DropoutConfig& drop_cfg, const AssembleOptions& opts = {});

// Channel-interleaved (num_frames, height, width, 7) tensor and its inverse.
Tensor4 pack_conditioning(const ConditioningSample& sample);
void unpack_conditioning(const Tensor4& t, ConditioningSample& sample);

Tensor4 image_to_tensor(const Image& image);
Image tensor_to_image(const Tensor4& t);

// Writes <dir>/conditioning.rtk, <dir>/reference.rtk and <dir>/sample.json. `extra` is merged
// into the manifest (seeds, jigsaw config, source paths).
nlohmann::json serialize_sample(const ConditioningSample& sample, const std::filesystem::path& dir,
                                const nlohmann::json& extra = nlohmann::json::object());

// Throws IoError for corrupt tensor files and ShapeError when tensor headers disagree with
// the manifest.
ConditioningSample deserialize_sample(const std::filesystem::path& dir);

nlohmann::json to_json(const JigsawConfig& cfg);

}  // namespace retexkit
