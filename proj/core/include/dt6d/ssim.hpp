#pragma once

#include "dt6d/image.hpp"

namespace dt6d {

/// Structural similarity over 8x8 sliding windows (stride 1), uniform
/// weighting, C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1. Inputs are
/// converted to luma internally. Returns the mean window score in [-1, 1].
double ssim(const RgbdFrame& a, const RgbdFrame& b);

}  // namespace dt6d
