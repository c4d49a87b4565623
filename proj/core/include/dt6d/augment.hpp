#pragma once

#include <array>

#include "dt6d/image.hpp"
#include "dt6d/rand.hpp"

namespace dt6d {

/// Augmentation schedule. Noise sigma is expressed in 8-bit-equivalent
/// units: RGB on a 0-255 scale, depth in millimeters.
struct AugmentConfig {
  double p_noise = 0.95;
  double sigma_lo = 0.0;
  double sigma_hi = 2.0;
  double p_blur = 0.40;
  double p_occluder = 0.60;
  double hue_lum_range = 0.05;

  void validate() const;
};

std::array<float, 3> rgb_to_hsv(float r, float g, float b);
std::array<float, 3> hsv_to_rgb(float h, float s, float v);

/// Hue rotation (wrapping) and value shift (clamped), applied only to
/// pixels with depth data so composited backgrounds keep their colors.
void perturb_color(RgbdFrame& frame, double h_hue, double h_lum);

/// i.i.d. N(0,sigma) on all four channels in 8-bit-equivalent scale, then
/// clamped back to the valid range. Depth no-data pixels stay no-data.
void add_gaussian_noise(RgbdFrame& frame, double sigma, RandomStream& rng);

/// 3x3 box filter on all four channels with replicated borders.
void mean_blur3(RgbdFrame& frame);

}  // namespace dt6d
