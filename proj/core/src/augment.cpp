#include "dt6d/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dt6d/math.hpp"

namespace dt6d {

void AugmentConfig::validate() const {
  if (p_noise < 0 || p_noise > 1 || p_blur < 0 || p_blur > 1 || p_occluder < 0 || p_occluder > 1)
    throw std::invalid_argument("augment: probabilities must be in [0,1]");
  if (sigma_lo < 0 || sigma_hi < sigma_lo || hue_lum_range < 0)
    throw std::invalid_argument("augment: ranges must be non-negative");
}

std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
  const float max = std::max({r, g, b});
  const float min = std::min({r, g, b});
  const float delta = max - min;
  float h = 0;
  if (delta > 0) {
    if (max == r) h = std::fmod((g - b) / delta, 6.0f);
    else if (max == g) h = (b - r) / delta + 2.0f;
    else h = (r - g) / delta + 4.0f;
    h /= 6.0f;
    if (h < 0) h += 1.0f;
  }
  const float s = max > 0 ? delta / max : 0.0f;
  return {h, s, max};
}

std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
  h = h - std::floor(h);  // wrap to [0,1)
  const float hh = h * 6.0f;
  const int sector = std::min(5, static_cast<int>(hh));
  const float f = hh - sector;
  const float p = v * (1 - s);
  const float q = v * (1 - s * f);
  const float t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

void perturb_color(RgbdFrame& frame, double h_hue, double h_lum) {
  const size_t n = frame.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    if (frame.depth[i] <= 0.0f) continue;
    auto hsv = rgb_to_hsv(frame.rgb[i * 3], frame.rgb[i * 3 + 1], frame.rgb[i * 3 + 2]);
    hsv[0] = static_cast<float>(hsv[0] + h_hue);
    hsv[2] = static_cast<float>(clamp01(hsv[2] + h_lum));
    const auto rgb = hsv_to_rgb(hsv[0], hsv[1], hsv[2]);
    frame.rgb[i * 3] = rgb[0];
    frame.rgb[i * 3 + 1] = rgb[1];
    frame.rgb[i * 3 + 2] = rgb[2];
  }
}

void add_gaussian_noise(RgbdFrame& frame, double sigma, RandomStream& rng) {
  if (sigma < 0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0) return;
  const size_t n = frame.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v8 = frame.rgb[i * 3 + c] * 255.0 + sigma * rng.normal();
      frame.rgb[i * 3 + c] = static_cast<float>(clamp01(v8 / 255.0));
    }
    // Depth noise in millimeters; pixels without data stay without data.
    if (frame.depth[i] > 0.0f) {
      const double mm = frame.depth[i] * 1000.0 + sigma * rng.normal();
      frame.depth[i] = static_cast<float>(std::max(0.0, mm / 1000.0));
    }
  }
}

void mean_blur3(RgbdFrame& frame) {
  const int w = frame.width, h = frame.height;
  RgbdFrame src = frame;
  auto clampx = [w](int x) { return x < 0 ? 0 : (x >= w ? w - 1 : x); };
  auto clampy = [h](int y) { return y < 0 ? 0 : (y >= h ? h - 1 : y); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[4] = {0, 0, 0, 0};
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = clampy(y + dy);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = clampx(x + dx);
          const float* px = src.rgb_at(sx, sy);
          acc[0] += px[0];
          acc[1] += px[1];
          acc[2] += px[2];
          acc[3] += src.depth_at(sx, sy);
        }
      }
      float* out = frame.rgb_at(x, y);
      out[0] = static_cast<float>(acc[0] / 9.0);
      out[1] = static_cast<float>(acc[1] / 9.0);
      out[2] = static_cast<float>(acc[2] / 9.0);
      frame.depth_at(x, y) = static_cast<float>(acc[3] / 9.0);
    }
  }
}

}  // namespace dt6d
