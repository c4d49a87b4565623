#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dt6d/image.hpp"
#include "dt6d/render.hpp"

namespace dt6d {

/// Fixed-size network input: side x side x 4 (R, G, B, centered depth),
/// row-major, channels interleaved. Produced only by the normalization
/// pipeline below.
struct NormalizedInput {
  int side = 0;
  std::vector<float> data;

  NormalizedInput() = default;
  explicit NormalizedInput(int s) : side(s), data(static_cast<size_t>(s) * s * 4, 0.0f) {}

  float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * side + x) * 4 + c]; }
  float at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * side + x) * 4 + c]; }
};

struct ChannelStats {
  std::array<double, 4> mean{0, 0, 0, 0};
  std::array<double, 4> stddev{1, 1, 1, 1};
};

/// Streaming accumulator for per-channel statistics of pre-standardized
/// inputs. Throws if fewer than kMinSamples inputs were added or a channel
/// has zero variance.
class StatsAccumulator {
public:
  static constexpr size_t kMinSamples = 100;

  void add(const NormalizedInput& input);
  ChannelStats finalize() const;
  size_t sample_count() const { return samples_; }

private:
  std::array<double, 4> sum_{0, 0, 0, 0};
  std::array<double, 4> sum_sq_{0, 0, 0, 0};
  size_t pixels_ = 0;
  size_t samples_ = 0;
};

/// Crop the square box (bilinear, zero-padded outside the frame), resize to
/// side x side, and shift the whole depth channel by -z_center so no-data
/// pixels land at the -z_center sentinel. Throws TrackingLost when the box
/// is degenerate (side < 4 px).
NormalizedInput crop_resize_shift(const RgbdFrame& frame, const PixelBox& box, int side,
                                  double z_center);

void standardize(NormalizedInput& input, const ChannelStats& stats);

/// crop_resize_shift followed by standardize.
NormalizedInput normalize_input(const RgbdFrame& frame, const PixelBox& box, int side,
                                const ChannelStats& stats, double z_center);

}  // namespace dt6d
