#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace retexkit {

using Rgb = std::array<float, 3>;

// Row-major, channel-last float image with values nominally in [0, 1].
class Image {
public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  static Image filled(int width, int height, const Rgb& color);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  Rgb rgb(int x, int y) const;
  void set_rgb(int x, int y, const Rgb& color);

  std::vector<float>& data() noexcept { return data_; }
  const std::vector<float>& data() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Binary mask: a pixel is foreground iff its value is 1.
class Mask {
public:
  Mask() = default;
  Mask(int width, int height, std::uint8_t fill = 0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::vector<std::uint8_t>& data() noexcept { return data_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Tight bounding box of the foreground; nullopt-like empty Rect (width 0) when none.
Rect foreground_bbox(const Mask& mask);

Image crop(const Image& image, const Rect& rect);

// Bilinear resize with half-pixel-center alignment and edge clamping.
// Resizing to the same dimensions returns an exact copy.
Image resize_bilinear(const Image& image, int width, int height);

// BT.601 luma of an RGB image (single channel). Single-channel input is copied.
Image to_gray(const Image& image);

using VideoClip = std::vector<Image>;
using MaskClip = std::vector<Mask>;

}  // namespace retexkit
