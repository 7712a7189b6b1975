#pragma once

#include <vector>

#include "retexkit/image.hpp"

namespace retexkit {

struct FlowParams {
  double alpha = 0.05;           // smoothness weight, intensities in [0, 1]
  int iterations = 150;          // Jacobi iterations per pyramid level
  int levels = 3;                // coarse-to-fine pyramid levels (1 = single scale)
  double presmooth_sigma = 1.0;  // Gaussian pre-smoothing before differentiation; 0 disables
  double consistency_threshold = 1.0;  // forward-backward tolerance, pixels
};

// Dense displacement field: pixel p of the first frame moves to p + (u, v) in the second.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;
  Mask valid;  // 1 where forward-backward consistent and the target lies inside the frame

  double u_at(int x, int y) const { return u[static_cast<std::size_t>(y) * width + x]; }
  double v_at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }

  static FlowField zero(int width, int height);
};

// Horn-Schunck flow from `from` to `to` (single-channel or RGB, converted to luma), without
// occlusion masking; `valid` is all ones.
FlowField horn_schunck(const Image& from, const Image& to, const FlowParams& params);

// Horn-Schunck flow plus forward-backward validity: valid(p) = 1 iff p + F(p) is inside the
// frame and |F(p) + B(p + F(p))| <= consistency_threshold, B being the reverse flow.
FlowField estimate_flow(const Image& from, const Image& to, const FlowParams& params = {});

// out(p) = image(p + flow(p)), bilinear with edge clamping.
Image warp_image(const Image& image, const FlowField& flow);

// Mean squared error (unit scale, all channels) between `target` and `source` warped by
// `flow` (which maps target pixels into source), over flow.valid pixels. Throws DomainError
// when no pixel is valid.
double warp_error(const Image& source, const Image& target, const FlowField& flow);

// Temporal warping error of a clip in units of 1e-3: for each consecutive pair, frame t is
// warped toward t + 1 with the estimated flow and compared on consistent pixels; the
// per-pair errors are averaged. Needs at least two frames.
double ewarp(const VideoClip& clip, const FlowParams& params = {});

inline constexpr double kEwarpUnit = 1e-3;

}  // namespace retexkit
