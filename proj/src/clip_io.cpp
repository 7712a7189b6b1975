#include "retexkit/clip_io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "retexkit/error.hpp"
#include "retexkit/image_io.hpp"

namespace retexkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%04d.png", index + 1);
  return buf;
}

namespace {

void write_info(const fs::path& dir, const ClipInfo& info) {
  std::ofstream out(dir / "clip.json");
  if (!out) throw IoError("cannot write " + (dir / "clip.json").string());
  const json j = {{"width", info.width}, {"height", info.height}, {"num_frames", info.num_frames}, {"fps", info.fps}};
  out << j.dump(2) << "\n";
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void check_frame(const fs::path& file, const ClipInfo& info, int w, int h) {
  if (w != info.width || h != info.height) {
    throw IoError("frame " + file.string() + " does not match clip.json dimensions");
  }
}

}  // namespace

ClipInfo read_clip_info(const fs::path& dir) {
  const fs::path file = dir / "clip.json";
  std::ifstream in(file);
  if (!in) throw IoError("missing clip.json in " + dir.string());
  ClipInfo info;
  try {
    const json j = json::parse(in);
    info.width = j.at("width").get<int>();
    info.height = j.at("height").get<int>();
    info.num_frames = j.at("num_frames").get<int>();
    info.fps = j.value("fps", 16.0);
  } catch (const json::exception& e) {
    throw IoError("malformed " + file.string() + ": " + e.what());
  }
  if (info.width <= 0 || info.height <= 0 || info.num_frames <= 0) {
    throw IoError("invalid dimensions in " + file.string());
  }
  return info;
}

void write_clip(const fs::path& dir, const VideoClip& clip, double fps) {
  if (clip.empty()) throw ShapeError("cannot write an empty clip");
  prepare_dir(dir);
  for (std::size_t i = 0; i < clip.size(); ++i) {
    write_png(dir / frame_filename(static_cast<int>(i)), clip[i]);
  }
  write_info(dir, {clip[0].width(), clip[0].height(), static_cast<int>(clip.size()), fps});
}

VideoClip read_clip(const fs::path& dir) {
  const ClipInfo info = read_clip_info(dir);
  VideoClip clip;
  clip.reserve(static_cast<std::size_t>(info.num_frames));
  for (int i = 0; i < info.num_frames; ++i) {
    const fs::path file = dir / frame_filename(i);
    Image frame = read_image(file);
    check_frame(file, info, frame.width(), frame.height());
    clip.push_back(std::move(frame));
  }
  return clip;
}

void write_mask_clip(const fs::path& dir, const MaskClip& clip, double fps) {
  if (clip.empty()) throw ShapeError("cannot write an empty mask clip");
  prepare_dir(dir);
  for (std::size_t i = 0; i < clip.size(); ++i) {
    write_mask(dir / frame_filename(static_cast<int>(i)), clip[i]);
  }
  write_info(dir, {clip[0].width(), clip[0].height(), static_cast<int>(clip.size()), fps});
}

MaskClip read_mask_clip(const fs::path& dir) {
  const ClipInfo info = read_clip_info(dir);
  MaskClip clip;
  clip.reserve(static_cast<std::size_t>(info.num_frames));
  for (int i = 0; i < info.num_frames; ++i) {
    const fs::path file = dir / frame_filename(i);
    Mask frame = read_mask(file);
    check_frame(file, info, frame.width(), frame.height());
    clip.push_back(std::move(frame));
  }
  return clip;
}

namespace {

template <typename A, typename B>
void check_dims_impl(const A& a, const B& b, const char* what) {
  if (a.empty() || a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": frame counts differ or clip is empty");
  }
  const int w = a[0].width();
  const int h = a[0].height();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].width() != w || a[i].height() != h || b[i].width() != w || b[i].height() != h) {
      throw ShapeError(std::string(what) + ": frame dimensions differ at frame " + std::to_string(i));
    }
  }
}

}  // namespace

void check_same_dims(const VideoClip& a, const VideoClip& b, const char* what) { check_dims_impl(a, b, what); }
void check_same_dims(const VideoClip& a, const MaskClip& b, const char* what) { check_dims_impl(a, b, what); }

}  // namespace retexkit
