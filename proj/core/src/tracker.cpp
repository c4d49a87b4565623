#include "dt6d/tracker.hpp"

#include <chrono>
#include <stdexcept>

#include "dt6d/errors.hpp"

namespace dt6d {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Tracker::Tracker(const TriMesh* mesh, nn::NetworkParams<float> params, ChannelStats stats,
                 CameraIntrinsics intrinsics, RigidPose initial_pose, double t_max_mm,
                 double r_max_deg, double bbox_margin, int workers)
    : mesh_(mesh),
      params_(std::move(params)),
      stats_(stats),
      intrinsics_(intrinsics),
      pose_(initial_pose),
      t_max_mm_(t_max_mm),
      r_max_deg_(r_max_deg),
      bbox_margin_(bbox_margin),
      workers_(workers) {
  if (!mesh_) throw std::invalid_argument("tracker: mesh required");
  intrinsics_.validate();
  if (!pose_.is_valid(1e-6)) throw std::invalid_argument("tracker: initial pose invalid");
}

void Tracker::step(const RgbdFrame& observed) {
  if (!observed.same_size(RgbdFrame(intrinsics_.width, intrinsics_.height)))
    throw std::invalid_argument("tracker: observed frame resolution mismatch");

  // Any TrackingLost below leaves the estimate untouched; the caller
  // decides whether to reset.
  const PixelBox bbox = projected_bbox(*mesh_, pose_, intrinsics_, bbox_margin_);

  auto t0 = std::chrono::steady_clock::now();
  const RgbdFrame predicted =
      render_rgbd(*mesh_, pose_, intrinsics_, Lighting::predicted_default());
  phase_times_.render_ms = ms_since(t0);
  ++diag_.render_count;

  const double z_center = pose_.translation.z;
  t0 = std::chrono::steady_clock::now();
  const NormalizedInput x_pred =
      normalize_input(predicted, bbox, params_.cfg.input_side, stats_, z_center);
  const NormalizedInput x_obs =
      normalize_input(observed, bbox, params_.cfg.input_side, stats_, z_center);
  phase_times_.normalize_ms = ms_since(t0);

  const int side = params_.cfg.input_side;
  nn::Tensor<float> tx_pred(1, side, side, 4), tx_obs(1, side, side, 4);
  tx_pred.v = x_pred.data;
  tx_obs.v = x_obs.data;

  t0 = std::chrono::steady_clock::now();
  RandomStream rng(0);  // eval mode draws nothing
  nn::network_forward(params_, tx_pred, tx_obs, nn::RunMode::kEval, rng, cache_, workers_);
  phase_times_.forward_ms = ms_since(t0);
  ++diag_.forward_count;

  Label6 y;
  for (int i = 0; i < 6; ++i) y.y[i] = cache_.output.v[i];
  const PoseDelta delta = decode_label(y, t_max_mm_, r_max_deg_);

  pose_ = apply_delta(pose_, delta);
  ++counter_;
  diag_.last_bbox = bbox;
  diag_.last_raw_output = y;
}

void Tracker::iterate(const RgbdFrame& observed, int n) {
  if (n < 1) throw std::invalid_argument("tracker: iterate needs n >= 1");
  for (int i = 0; i < n; ++i) step(observed);
}

void Tracker::reset(const RigidPose& pose) {
  if (!pose.is_valid(1e-6)) throw std::invalid_argument("tracker: reset pose invalid");
  pose_ = pose;
  diag_.last_bbox = PixelBox{};
  diag_.last_raw_output = Label6{};
}

}  // namespace dt6d
