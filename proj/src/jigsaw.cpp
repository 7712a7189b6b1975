#include "retexkit/jigsaw.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "retexkit/error.hpp"
#include "retexkit/rng.hpp"

namespace retexkit {

int patch_side_for(const JigsawConfig& cfg, int ref_width, int ref_height) {
  if (!(cfg.patch_fraction > 0.0 && cfg.patch_fraction <= 1.0)) {
    throw ConfigError("patch_fraction must be in (0, 1]");
  }
  const long side = std::lround(cfg.patch_fraction * std::min(ref_width, ref_height));
  return static_cast<int>(std::max(1L, side));
}

double background_fraction(const Mask& mask, int x, int y, int side) {
  std::size_t background = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) background += mask.at(x + i, y + j) == 0 ? 1 : 0;
  }
  return static_cast<double>(background) / (static_cast<double>(side) * side);
}

namespace {

void check_config(const JigsawConfig& cfg) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(cfg.flip_horizontal_prob) || !prob(cfg.flip_vertical_prob)) {
    throw ConfigError("flip probabilities must be in [0, 1]");
  }
  if (!(cfg.background_threshold >= 0.0 && cfg.background_threshold <= 1.0)) {
    throw ConfigError("background_threshold must be in [0, 1]");
  }
}

int resolve_canvas(const JigsawConfig& cfg, int fallback) { return cfg.canvas_width > 0 ? cfg.canvas_width : fallback; }

Image flip(const Image& src, bool horizontal, bool vertical) {
  if (!horizontal && !vertical) return src;
  Image out(src.width(), src.height(), src.channels());
  for (int y = 0; y < src.height(); ++y) {
    const int sy = vertical ? src.height() - 1 - y : y;
    for (int x = 0; x < src.width(); ++x) {
      const int sx = horizontal ? src.width() - 1 - x : x;
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

Image resize_to_width(const Image& img, int width) {
  const double scale = static_cast<double>(width) / img.width();
  const int height = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  return resize_bilinear(img, width, height);
}

}  // namespace

PatchSet extract_patches(const Image& reference, const Mask& mask, const JigsawConfig& cfg) {
  if (reference.width() != mask.width() || reference.height() != mask.height()) {
    throw ShapeError("reference and mask dimensions differ");
  }
  check_config(cfg);
  const Rect box = foreground_bbox(mask);
  if (box.width == 0) throw DomainError("reference mask has no foreground");

  PatchSet ps;
  ps.patch_side = patch_side_for(cfg, reference.width(), reference.height());
  const int side = ps.patch_side;
  const int rows = (box.height + side - 1) / side;
  const int cols = (box.width + side - 1) / side;
  for (int r = 0; r < rows; ++r) {
    const int y = box.y + r * side;
    if (y + side > reference.height()) continue;
    for (int c = 0; c < cols; ++c) {
      const int x = box.x + c * side;
      if (x + side > reference.width()) continue;
      if (background_fraction(mask, x, y, side) > cfg.background_threshold) continue;
      ps.patches.push_back(crop(reference, {x, y, side, side}));
      ps.source_grid_coords.push_back({r, c});
    }
  }
  if (ps.patches.empty()) throw DomainError("reference too sparse: no patch passes the background filter");
  ps.flipped_horizontal.assign(ps.patches.size(), false);
  ps.flipped_vertical.assign(ps.patches.size(), false);
  return ps;
}

PatchSet permute_patches(const PatchSet& ps, const JigsawConfig& cfg) {
  check_config(cfg);
  if (ps.patches.empty()) throw DomainError("cannot permute an empty patch set");
  const std::size_t n = ps.patches.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  Rng rng(cfg.seed);
  // Fisher-Yates.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }

  PatchSet out;
  out.patch_side = ps.patch_side;
  out.patches.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    const bool h = rng.bernoulli(cfg.flip_horizontal_prob);
    const bool v = rng.bernoulli(cfg.flip_vertical_prob);
    out.patches.push_back(flip(ps.patches[src], h, v));
    if (src < ps.source_grid_coords.size()) out.source_grid_coords.push_back(ps.source_grid_coords[src]);
    out.flipped_horizontal.push_back(h);
    out.flipped_vertical.push_back(v);
  }
  return out;
}

Image pack_grid(const PatchSet& ps, int canvas_width) {
  if (ps.patches.empty()) throw DomainError("cannot pack an empty patch set");
  if (canvas_width <= 0) throw ConfigError("canvas width must be positive");
  const int side = ps.patch_side;
  const int n = static_cast<int>(ps.patches.size());
  const int cols = std::max(1, canvas_width / side);
  const int rows = (n + cols - 1) / cols;
  const int channels = ps.patches.front().channels();
  Image grid(cols * side, rows * side, channels);
  for (int cell = 0; cell < rows * cols; ++cell) {
    const Image& patch = ps.patches[static_cast<std::size_t>(cell % n)];
    if (patch.width() != side || patch.height() != side || patch.channels() != channels) {
      throw ShapeError("patch dimensions are inconsistent");
    }
    const int ox = (cell % cols) * side;
    const int oy = (cell / cols) * side;
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        for (int c = 0; c < channels; ++c) grid.at(ox + x, oy + y, c) = patch.at(x, y, c);
      }
    }
  }
  return grid;
}

Image pack_mosaic(const PatchSet& ps, const JigsawConfig& cfg) {
  if (ps.patches.empty()) throw DomainError("cannot pack an empty patch set");
  if (cfg.canvas_width <= 0) throw ConfigError("canvas width must be positive");
  return resize_to_width(pack_grid(ps, cfg.canvas_width), cfg.canvas_width);
}

Image jigsaw(const Image& reference, const Mask& mask, const JigsawConfig& cfg) {
  if (reference.width() != mask.width() || reference.height() != mask.height()) {
    throw ShapeError("reference and mask dimensions differ");
  }
  const int canvas = resolve_canvas(cfg, reference.width());
  if (cfg.patch_fraction == 1.0) {
    const Rect box = foreground_bbox(mask);
    if (box.width == 0) throw DomainError("reference mask has no foreground");
    return resize_to_width(crop(reference, box), canvas);
  }
  JigsawConfig resolved = cfg;
  resolved.canvas_width = canvas;
  return pack_mosaic(permute_patches(extract_patches(reference, mask, resolved), resolved), resolved);
}

}  // namespace retexkit
