#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

namespace retexkit {

// RTK1 tensor: magic "RTK1", little-endian u32 {num_frames, height, width, channels}, then
// float32 payload in frame-major, row-major, channel-last order.
struct Tensor4 {
  std::uint32_t num_frames = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;

  std::size_t element_count() const {
    return static_cast<std::size_t>(num_frames) * height * width * channels;
  }
  float& at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) {
    return data[((f * height + y) * width + x) * channels + c];
  }
  float at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) const {
    return data[((f * height + y) * width + x) * channels + c];
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;
};

void write_tensor(std::ostream& out, const Tensor4& t);
void write_tensor(const std::filesystem::path& path, const Tensor4& t);

// Throws IoError on bad magic, a truncated header, or a payload whose size disagrees with the
// header (short or trailing bytes).
Tensor4 read_tensor(std::istream& in);
Tensor4 read_tensor(const std::filesystem::path& path);

}  // namespace retexkit
