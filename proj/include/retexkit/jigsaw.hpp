#pragma once

#include <cstdint>
#include <vector>

#include "retexkit/image.hpp"

namespace retexkit {

struct JigsawConfig {
  double patch_fraction = 0.10;        // patch side / min(reference width, height)
  double background_threshold = 0.10;  // max background fraction of a kept patch
  int canvas_width = 0;                // <= 0: reference width
  double flip_horizontal_prob = 0.5;
  double flip_vertical_prob = 0.5;
  std::uint64_t seed = 0;
};

struct GridCoord {
  int row = 0;
  int col = 0;

  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

struct PatchSet {
  std::vector<Image> patches;
  int patch_side = 0;
  std::vector<GridCoord> source_grid_coords;  // grid cell each patch was cut from
  std::vector<bool> flipped_horizontal;       // filled by permute_patches
  std::vector<bool> flipped_vertical;
};

// round(patch_fraction * min(width, height)), at least 1. Throws ConfigError outside (0, 1].
int patch_side_for(const JigsawConfig& cfg, int ref_width, int ref_height);

// Fraction of mask==0 pixels inside the side x side window at (x, y).
double background_fraction(const Mask& mask, int x, int y, int side);

// Non-overlapping grid anchored at the foreground bounding-box corner, covering the box in
// raster order; cells running past the image border are skipped. A cell is kept iff its
// background fraction is <= background_threshold. Throws DomainError when the mask has no
// foreground or no cell survives ("reference too sparse").
PatchSet extract_patches(const Image& reference, const Mask& mask, const JigsawConfig& cfg);

// Seeded uniform shuffle followed by independent horizontal / vertical mirror draws.
PatchSet permute_patches(const PatchSet& ps, const JigsawConfig& cfg);

// Row-major grid with K = max(1, floor(canvas / side)) columns and ceil(N / K) rows; trailing
// cells of the last row cycle from the first patch. Returned before any resize.
Image pack_grid(const PatchSet& ps, int canvas_width);

// pack_grid resized bilinearly to exactly canvas_width, height scaled by the same factor.
Image pack_mosaic(const PatchSet& ps, const JigsawConfig& cfg);

// extract -> permute -> pack. patch_fraction == 1 skips permutation: the reference is cropped
// to its foreground bounding box and resized to the canvas width.
Image jigsaw(const Image& reference, const Mask& mask, const JigsawConfig& cfg);

}  // namespace retexkit
