#pragma once

#include <filesystem>
#include <string>

#include "retexkit/image.hpp"

namespace retexkit {

// On-disk clip: a directory of f0001.png, f0002.png, ... plus clip.json.
struct ClipInfo {
  int width = 0;
  int height = 0;
  int num_frames = 0;
  double fps = 16.0;
};

std::string frame_filename(int index);  // zero-based index -> "f0001.png"

ClipInfo read_clip_info(const std::filesystem::path& dir);

void write_clip(const std::filesystem::path& dir, const VideoClip& clip, double fps = 16.0);
VideoClip read_clip(const std::filesystem::path& dir);

void write_mask_clip(const std::filesystem::path& dir, const MaskClip& clip, double fps = 16.0);
MaskClip read_mask_clip(const std::filesystem::path& dir);

// Throws ShapeError unless every frame of every clip has the same dimensions and frame count.
void check_same_dims(const VideoClip& a, const VideoClip& b, const char* what);
void check_same_dims(const VideoClip& a, const MaskClip& b, const char* what);

}  // namespace retexkit
