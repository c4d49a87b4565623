#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dt6d {

/// RGBD image: RGB in [0,1], depth in meters with 0 meaning no data.
struct RgbdFrame {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;    // width*height*3, row-major, RGB interleaved
  std::vector<float> depth;  // width*height, meters

  RgbdFrame() = default;
  RgbdFrame(int w, int h)
      : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0.0f),
        depth(static_cast<size_t>(w) * h, 0.0f) {}

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }

  float* rgb_at(int x, int y) { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
  const float* rgb_at(int x, int y) const { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
  float& depth_at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
  float depth_at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }

  bool same_size(const RgbdFrame& o) const { return width == o.width && height == o.height; }
};

/// 8-bit RGB PNG.
void write_color_png(const RgbdFrame& frame, const std::string& path);

/// 16-bit single-channel PNG, depth stored in 0.1 mm units (saturates at
/// 6.5535 m).
void write_depth_png(const RgbdFrame& frame, const std::string& path);

/// Reads a color/depth PNG pair back into a frame. Color accepts 8-bit
/// RGB/RGBA/gray; depth must be 16-bit grayscale.
RgbdFrame read_rgbd_pngs(const std::string& color_path, const std::string& depth_path);

}  // namespace dt6d
