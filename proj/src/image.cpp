#include "retexkit/image.hpp"

#include <algorithm>
#include <cmath>

#include "retexkit/error.hpp"

namespace retexkit {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw ShapeError("image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image Image::filled(int width, int height, const Rgb& color) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.set_rgb(x, y, color);
  }
  return img;
}

Rgb Image::rgb(int x, int y) const {
  const std::size_t i = index(x, y, 0);
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set_rgb(int x, int y, const Rgb& color) {
  const std::size_t i = index(x, y, 0);
  data_[i] = color[0];
  data_[i + 1] = color[1];
  data_[i + 2] = color[2];
}

Mask::Mask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ShapeError("mask dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](std::uint8_t v) { return v != 0; }));
}

Rect foreground_bbox(const Mask& mask) {
  int x0 = mask.width();
  int y0 = mask.height();
  int x1 = -1;
  int y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Image crop(const Image& image, const Rect& rect) {
  if (rect.width <= 0 || rect.height <= 0 || rect.x < 0 || rect.y < 0 || rect.x + rect.width > image.width() ||
      rect.y + rect.height > image.height()) {
    throw ShapeError("crop rectangle outside image");
  }
  Image out(rect.width, rect.height, image.channels());
  for (int y = 0; y < rect.height; ++y) {
    for (int x = 0; x < rect.width; ++x) {
      for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(rect.x + x, rect.y + y, c);
    }
  }
  return out;
}

namespace {

struct Tap {
  int lo;
  int hi;
  float frac;
};

std::vector<Tap> make_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(s - lo)};
  }
  return taps;
}

}  // namespace

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.empty()) throw ShapeError("cannot resize an empty image");
  if (width == image.width() && height == image.height()) return image;
  Image out(width, height, image.channels());
  const auto xt = make_taps(image.width(), width);
  const auto yt = make_taps(image.height(), height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xt[static_cast<std::size_t>(x)];
      for (int c = 0; c < image.channels(); ++c) {
        const float a = image.at(tx.lo, ty.lo, c);
        const float b = image.at(tx.hi, ty.lo, c);
        const float d = image.at(tx.lo, ty.hi, c);
        const float e = image.at(tx.hi, ty.hi, c);
        const float top = a + (b - a) * tx.frac;
        const float bottom = d + (e - d) * tx.frac;
        out.at(x, y, c) = top + (bottom - top) * ty.frac;
      }
    }
  }
  return out;
}

Image to_gray(const Image& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3) throw ShapeError("to_gray expects 1 or 3 channels");
  Image out(image.width(), image.height(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.at(x, y, 0) = 0.299f * image.at(x, y, 0) + 0.587f * image.at(x, y, 1) + 0.114f * image.at(x, y, 2);
    }
  }
  return out;
}

}  // namespace retexkit
