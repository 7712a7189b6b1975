#include "retexkit/morphology.hpp"

#include <algorithm>

#include "retexkit/error.hpp"

namespace retexkit {

namespace {

// 1-D running max over [i - r, i + r] along rows (horizontal) or columns.
Mask max_filter(const Mask& in, int radius, bool horizontal) {
  Mask out(in.width(), in.height());
  const int lines = horizontal ? in.height() : in.width();
  const int len = horizontal ? in.width() : in.height();
  std::vector<int> prefix(static_cast<std::size_t>(len) + 1);
  for (int l = 0; l < lines; ++l) {
    auto get = [&](int i) { return horizontal ? in.at(i, l) : in.at(l, i); };
    prefix[0] = 0;
    for (int i = 0; i < len; ++i) prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + (get(i) ? 1 : 0);
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - radius);
      const int hi = std::min(len - 1, i + radius);
      const bool any = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)] > 0;
      if (horizontal) {
        out.at(i, l) = any ? 1 : 0;
      } else {
        out.at(l, i) = any ? 1 : 0;
      }
    }
  }
  return out;
}

}  // namespace

Mask dilate_mask(const Mask& mask, int radius) {
  if (radius < 0) throw ConfigError("dilation radius must be >= 0");
  if (radius == 0 || mask.empty()) return mask;
  return max_filter(max_filter(mask, radius, true), radius, false);
}

}  // namespace retexkit
