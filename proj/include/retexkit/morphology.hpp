#pragma once

#include "retexkit/image.hpp"

namespace retexkit {

// Chebyshev (square structuring element) dilation: output(p) = 1 iff some input pixel within
// L-infinity distance <= radius is 1. Radius 0 is the identity.
Mask dilate_mask(const Mask& mask, int radius);

}  // namespace retexkit
