#include "dt6d/ssim.hpp"

#include <stdexcept>
#include <vector>

namespace dt6d {

namespace {

std::vector<double> to_luma(const RgbdFrame& f) {
  std::vector<double> out(f.pixel_count());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = 0.299 * f.rgb[i * 3] + 0.587 * f.rgb[i * 3 + 1] + 0.114 * f.rgb[i * 3 + 2];
  return out;
}

}  // namespace

double ssim(const RgbdFrame& a, const RgbdFrame& b) {
  if (!a.same_size(b)) throw std::invalid_argument("ssim: size mismatch");
  constexpr int kWin = 8;
  constexpr double kC1 = 0.01 * 0.01;  // (0.01 L)^2, L = 1
  constexpr double kC2 = 0.03 * 0.03;
  if (a.width < kWin || a.height < kWin) throw std::invalid_argument("ssim: image smaller than window");

  const std::vector<double> x = to_luma(a);
  const std::vector<double> y = to_luma(b);
  const int w = a.width, h = a.height;

  double total = 0;
  size_t windows = 0;
  for (int wy = 0; wy + kWin <= h; ++wy) {
    for (int wx = 0; wx + kWin <= w; ++wx) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int dy = 0; dy < kWin; ++dy) {
        const size_t row = static_cast<size_t>(wy + dy) * w + wx;
        for (int dx = 0; dx < kWin; ++dx) {
          const double xv = x[row + dx], yv = y[row + dx];
          sx += xv;
          sy += yv;
          sxx += xv * xv;
          syy += yv * yv;
          sxy += xv * yv;
        }
      }
      constexpr double kN = kWin * kWin;
      const double mx = sx / kN, my = sy / kN;
      const double vx = sxx / kN - mx * mx;
      const double vy = syy / kN - my * my;
      const double cov = sxy / kN - mx * my;
      total += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

}  // namespace dt6d
