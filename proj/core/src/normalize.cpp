#include "dt6d/normalize.hpp"

#include <cmath>
#include <stdexcept>

#include "dt6d/errors.hpp"
#include "dt6d/math.hpp"

namespace dt6d {

void StatsAccumulator::add(const NormalizedInput& input) {
  const size_t n = static_cast<size_t>(input.side) * input.side;
  for (size_t i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c) {
      const double v = input.data[i * 4 + c];
      sum_[c] += v;
      sum_sq_[c] += v * v;
    }
  pixels_ += n;
  ++samples_;
}

ChannelStats StatsAccumulator::finalize() const {
  if (samples_ < kMinSamples)
    throw std::invalid_argument("channel stats: need at least " + std::to_string(kMinSamples) +
                                " samples, got " + std::to_string(samples_));
  ChannelStats stats;
  for (int c = 0; c < 4; ++c) {
    const double mean = sum_[c] / static_cast<double>(pixels_);
    const double var = sum_sq_[c] / static_cast<double>(pixels_) - mean * mean;
    if (var <= 1e-12)
      throw std::invalid_argument("channel stats: zero variance in channel " + std::to_string(c));
    stats.mean[c] = mean;
    stats.stddev[c] = std::sqrt(var);
  }
  return stats;
}

namespace {

/// Bilinear sample at continuous pixel coordinates; integer pixel p covers
/// [p, p+1) with its sample at p+0.5. Out-of-frame taps contribute zero.
void sample_bilinear(const RgbdFrame& frame, double sx, double sy, float out[4]) {
  const double fx = sx - 0.5, fy = sy - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0, ay = fy - y0;
  const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  double acc[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    if (xs[i] < 0 || xs[i] >= frame.width || ys[i] < 0 || ys[i] >= frame.height) continue;
    const float* px = frame.rgb_at(xs[i], ys[i]);
    acc[0] += w[i] * px[0];
    acc[1] += w[i] * px[1];
    acc[2] += w[i] * px[2];
    acc[3] += w[i] * frame.depth_at(xs[i], ys[i]);
  }
  for (int c = 0; c < 4; ++c) out[c] = static_cast<float>(acc[c]);
}

}  // namespace

NormalizedInput crop_resize_shift(const RgbdFrame& frame, const PixelBox& box, int side,
                                  double z_center) {
  if (box.side < 4.0) throw TrackingLost("normalize: crop box degenerate (side < 4 px)");
  if (side < 1) throw std::invalid_argument("normalize: output side must be positive");

  NormalizedInput out(side);
  const double x_start = box.center_u - box.side / 2.0;
  const double y_start = box.center_v - box.side / 2.0;
  const double step = box.side / static_cast<double>(side);
  float tap[4];
  for (int y = 0; y < side; ++y) {
    const double sy = y_start + (y + 0.5) * step;
    for (int x = 0; x < side; ++x) {
      const double sx = x_start + (x + 0.5) * step;
      sample_bilinear(frame, sx, sy, tap);
      out.at(y, x, 0) = tap[0];
      out.at(y, x, 1) = tap[1];
      out.at(y, x, 2) = tap[2];
      out.at(y, x, 3) = static_cast<float>(tap[3] - z_center);
    }
  }
  return out;
}

void standardize(NormalizedInput& input, const ChannelStats& stats) {
  const size_t n = static_cast<size_t>(input.side) * input.side;
  for (size_t i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c)
      input.data[i * 4 + c] =
          static_cast<float>((input.data[i * 4 + c] - stats.mean[c]) / stats.stddev[c]);
}

NormalizedInput normalize_input(const RgbdFrame& frame, const PixelBox& box, int side,
                                const ChannelStats& stats, double z_center) {
  NormalizedInput out = crop_resize_shift(frame, box, side, z_center);
  standardize(out, stats);
  return out;
}

}  // namespace dt6d
