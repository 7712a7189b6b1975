#include "retexkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "retexkit/error.hpp"

namespace retexkit {

namespace fs = std::filesystem;

std::uint8_t to_byte(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Raw 8-bit decode: returns interleaved bytes with `channels` in {1, 3}.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

RawImage read_png_raw(const fs::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open image: " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("not a PNG file: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }

  RawImage raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = static_cast<int>(png_get_channels(png, info));
  raw.bytes.resize(static_cast<std::size_t>(raw.width) * raw.height * raw.channels);
  rows.resize(static_cast<std::size_t>(raw.height));
  for (int y = 0; y < raw.height; ++y) {
    rows[static_cast<std::size_t>(y)] = raw.bytes.data() + static_cast<std::size_t>(y) * raw.width * raw.channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (raw.channels != 1 && raw.channels != 3) {
    throw IoError("unsupported PNG channel layout in " + path.string());
  }
  return raw;
}

void skip_ppm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

RawImage read_ppm_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError("only binary PPM (P6) is supported: " + path.string());
  int w = 0;
  int h = 0;
  int maxval = 0;
  skip_ppm_space(in);
  in >> w;
  skip_ppm_space(in);
  in >> h;
  skip_ppm_space(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval != 255) throw IoError("bad PPM header: " + path.string());
  in.get();
  RawImage raw{w, h, 3, {}};
  raw.bytes.resize(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.bytes.data()), static_cast<std::streamsize>(raw.bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.bytes.size())) {
    throw IoError("truncated PPM payload: " + path.string());
  }
  return raw;
}

RawImage read_raw(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") return read_ppm_raw(path);
  return read_png_raw(path);
}

void write_png_raw(const fs::path& path, int width, int height, int channels, const std::vector<std::uint8_t>& bytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write image: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_image(const fs::path& path) {
  const RawImage raw = read_raw(path);
  Image img(raw.width, raw.height, 3);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      for (int c = 0; c < 3; ++c) {
        const std::uint8_t b = raw.bytes[i + (raw.channels == 3 ? c : 0)];
        img.at(x, y, c) = static_cast<float>(b) / 255.0f;
      }
    }
  }
  return img;
}

void write_png(const fs::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PNG output needs 1 or 3 channels");
  }
  std::vector<std::uint8_t> bytes(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bytes.begin(), to_byte);
  write_png_raw(path, image.width(), image.height(), image.channels(), bytes);
}

Mask read_mask(const fs::path& path) {
  const RawImage raw = read_raw(path);
  Mask mask(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      int value = raw.bytes[i];
      if (raw.channels == 3) {
        value = static_cast<int>(std::lround(0.299 * raw.bytes[i] + 0.587 * raw.bytes[i + 1] + 0.114 * raw.bytes[i + 2]));
      }
      mask.at(x, y) = value > 127 ? 1 : 0;
    }
  }
  return mask;
}

void write_mask(const fs::path& path, const Mask& mask) {
  std::vector<std::uint8_t> bytes(mask.data().size());
  std::transform(mask.data().begin(), mask.data().end(), bytes.begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  write_png_raw(path, mask.width(), mask.height(), 1, bytes);
}

}  // namespace retexkit
