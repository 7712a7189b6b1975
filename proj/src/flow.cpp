#include "retexkit/flow.hpp"

#include <algorithm>
#include <cmath>

#include "retexkit/error.hpp"

namespace retexkit {

namespace {

// Single-channel double raster used internally by the solver.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> d;

  Plane() = default;
  Plane(int width, int height, double fill = 0.0) : w(width), h(height), d(static_cast<std::size_t>(width) * height, fill) {}

  double& at(int x, int y) { return d[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return d[static_cast<std::size_t>(y) * w + x]; }
  double clamped(int x, int y) const { return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); }

  double bilinear(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) + (at(x1, y0) - at(x0, y0)) * fx;
    const double bottom = at(x0, y1) + (at(x1, y1) - at(x0, y1)) * fx;
    return top + (bottom - top) * fy;
  }
};

Plane luma_plane(const Image& img) {
  const Image gray = to_gray(img);
  Plane p(gray.width(), gray.height());
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) p.at(x, y) = gray.at(x, y, 0);
  }
  return p;
}

Plane gaussian_blur(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& v : k) v /= sum;
  Plane tmp(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * in.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  }
  Plane out(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane downsample(const Plane& in) {
  Plane out((in.w + 1) / 2, (in.h + 1) / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.at(x, y) = 0.25 * (in.clamped(2 * x, 2 * y) + in.clamped(2 * x + 1, 2 * y) + in.clamped(2 * x, 2 * y + 1) +
                             in.clamped(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

// Resamples a flow component to (w, h), scaling displacements by the size ratio.
Plane upsample_flow(const Plane& in, int w, int h) {
  Plane out(w, h);
  const double sx = static_cast<double>(in.w) / w;
  const double sy = static_cast<double>(in.h) / h;
  const double scale = static_cast<double>(w) / in.w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = scale * in.bilinear((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
  }
  return out;
}

// Neighborhood average of the classic Horn-Schunck Laplacian stencil.
double hs_average(const Plane& p, int x, int y) {
  return (p.clamped(x - 1, y) + p.clamped(x + 1, y) + p.clamped(x, y - 1) + p.clamped(x, y + 1)) / 6.0 +
         (p.clamped(x - 1, y - 1) + p.clamped(x + 1, y - 1) + p.clamped(x - 1, y + 1) + p.clamped(x + 1, y + 1)) / 12.0;
}

// One pyramid level: linearize around (u0, v0) by warping `to`, then Jacobi iterations on the
// total flow.
void refine_level(const Plane& from, const Plane& to, Plane& u, Plane& v, const FlowParams& params) {
  const int w = from.w;
  const int h = from.h;
  Plane warped(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) warped.at(x, y) = to.bilinear(x + u.at(x, y), y + v.at(x, y));
  }
  Plane ix(w, h);
  Plane iy(w, h);
  Plane it(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx1 = 0.5 * (from.clamped(x + 1, y) - from.clamped(x - 1, y));
      const double dx2 = 0.5 * (warped.clamped(x + 1, y) - warped.clamped(x - 1, y));
      const double dy1 = 0.5 * (from.clamped(x, y + 1) - from.clamped(x, y - 1));
      const double dy2 = 0.5 * (warped.clamped(x, y + 1) - warped.clamped(x, y - 1));
      ix.at(x, y) = 0.5 * (dx1 + dx2);
      iy.at(x, y) = 0.5 * (dy1 + dy2);
      // Residual with the current flow folded in, so the update solves for total flow.
      it.at(x, y) = warped.at(x, y) - from.at(x, y) - ix.at(x, y) * u.at(x, y) - iy.at(x, y) * v.at(x, y);
    }
  }
  const double alpha2 = params.alpha * params.alpha;
  Plane nu(w, h);
  Plane nv(w, h);
  for (int iter = 0; iter < params.iterations; ++iter) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double ub = hs_average(u, x, y);
        const double vb = hs_average(v, x, y);
        const double gx = ix.at(x, y);
        const double gy = iy.at(x, y);
        const double r = (gx * ub + gy * vb + it.at(x, y)) / (alpha2 + gx * gx + gy * gy);
        nu.at(x, y) = ub - gx * r;
        nv.at(x, y) = vb - gy * r;
      }
    }
    std::swap(u, nu);
    std::swap(v, nv);
  }
}

FlowField to_field(const Plane& u, const Plane& v) {
  FlowField f;
  f.width = u.w;
  f.height = u.h;
  f.u = u.d;
  f.v = v.d;
  f.valid = Mask(u.w, u.h, 1);
  return f;
}

}  // namespace

FlowField FlowField::zero(int width, int height) {
  FlowField f;
  f.width = width;
  f.height = height;
  f.u.assign(static_cast<std::size_t>(width) * height, 0.0);
  f.v.assign(static_cast<std::size_t>(width) * height, 0.0);
  f.valid = Mask(width, height, 1);
  return f;
}

FlowField horn_schunck(const Image& from, const Image& to, const FlowParams& params) {
  if (from.width() != to.width() || from.height() != to.height()) throw ShapeError("flow frames differ in size");
  if (params.iterations < 0 || params.levels < 1 || !(params.alpha > 0.0)) throw ConfigError("invalid flow parameters");

  std::vector<Plane> pyr_from{gaussian_blur(luma_plane(from), params.presmooth_sigma)};
  std::vector<Plane> pyr_to{gaussian_blur(luma_plane(to), params.presmooth_sigma)};
  for (int l = 1; l < params.levels; ++l) {
    if (pyr_from.back().w < 8 || pyr_from.back().h < 8) break;
    pyr_from.push_back(downsample(pyr_from.back()));
    pyr_to.push_back(downsample(pyr_to.back()));
  }

  Plane u(pyr_from.back().w, pyr_from.back().h);
  Plane v(pyr_from.back().w, pyr_from.back().h);
  for (std::size_t l = pyr_from.size(); l-- > 0;) {
    const Plane& a = pyr_from[l];
    if (u.w != a.w || u.h != a.h) {
      u = upsample_flow(u, a.w, a.h);
      v = upsample_flow(v, a.w, a.h);
    }
    refine_level(a, pyr_to[l], u, v, params);
  }
  return to_field(u, v);
}

FlowField estimate_flow(const Image& from, const Image& to, const FlowParams& params) {
  FlowField fwd = horn_schunck(from, to, params);
  const FlowField bwd = horn_schunck(to, from, params);
  Plane bu(bwd.width, bwd.height);
  Plane bv(bwd.width, bwd.height);
  bu.d = bwd.u;
  bv.d = bwd.v;
  const double thr2 = params.consistency_threshold * params.consistency_threshold;
  for (int y = 0; y < fwd.height; ++y) {
    for (int x = 0; x < fwd.width; ++x) {
      const double fu = fwd.u_at(x, y);
      const double fv = fwd.v_at(x, y);
      const double tx = x + fu;
      const double ty = y + fv;
      bool ok = tx >= 0.0 && ty >= 0.0 && tx <= fwd.width - 1.0 && ty <= fwd.height - 1.0;
      if (ok) {
        const double du = fu + bu.bilinear(tx, ty);
        const double dv = fv + bv.bilinear(tx, ty);
        ok = du * du + dv * dv <= thr2;
      }
      fwd.valid.at(x, y) = ok ? 1 : 0;
    }
  }
  return fwd;
}

Image warp_image(const Image& image, const FlowField& flow) {
  if (image.width() != flow.width || image.height() != flow.height) throw ShapeError("flow and image differ in size");
  Image out(image.width(), image.height(), image.channels());
  std::vector<Plane> planes(static_cast<std::size_t>(image.channels()), Plane(image.width(), image.height()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) planes[static_cast<std::size_t>(c)].at(x, y) = image.at(x, y, c);
    }
  }
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double sx = x + flow.u_at(x, y);
      const double sy = y + flow.v_at(x, y);
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = static_cast<float>(planes[static_cast<std::size_t>(c)].bilinear(sx, sy));
      }
    }
  }
  return out;
}

double warp_error(const Image& source, const Image& target, const FlowField& flow) {
  if (source.width() != target.width() || source.height() != target.height() ||
      source.channels() != target.channels()) {
    throw ShapeError("warp_error frames differ in shape");
  }
  const Image warped = warp_image(source, flow);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!flow.valid.at(x, y)) continue;
      for (int c = 0; c < target.channels(); ++c) {
        const double d = static_cast<double>(warped.at(x, y, c)) - target.at(x, y, c);
        sum += d * d;
      }
      count += static_cast<std::size_t>(target.channels());
    }
  }
  if (count == 0) throw DomainError("warp error undefined: no consistent pixels");
  return sum / static_cast<double>(count);
}

double ewarp(const VideoClip& clip, const FlowParams& params) {
  if (clip.size() < 2) throw DomainError("ewarp needs at least two frames");
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < clip.size(); ++t) {
    // Flow from frame t+1 into frame t: sampling frame t along it aligns t with t+1.
    const FlowField flow = estimate_flow(clip[t + 1], clip[t], params);
    total += warp_error(clip[t], clip[t + 1], flow);
  }
  return total / static_cast<double>(clip.size() - 1) / kEwarpUnit;
}

}  // namespace retexkit
