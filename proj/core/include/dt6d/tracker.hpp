#pragma once

#include <cstdint>

#include "dt6d/mesh.hpp"
#include "dt6d/nn/network.hpp"
#include "dt6d/normalize.hpp"
#include "dt6d/pose.hpp"
#include "dt6d/render.hpp"

namespace dt6d {

/// Render-feedback tracker: each step renders the object at the current
/// estimate, regresses the corrective delta against the observed frame, and
/// composes it onto the pose.
class Tracker {
public:
  struct Diagnostics {
    PixelBox last_bbox;
    Label6 last_raw_output;
    uint64_t render_count = 0;
    uint64_t forward_count = 0;
  };

  Tracker(const TriMesh* mesh, nn::NetworkParams<float> params, ChannelStats stats,
          CameraIntrinsics intrinsics, RigidPose initial_pose,
          double t_max_mm = kDefaultDeltaTransMm, double r_max_deg = kDefaultDeltaRotDeg,
          double bbox_margin = 0.15, int workers = 1);

  /// One render + one forward pass + one pose update. Throws TrackingLost
  /// (state unchanged) when the estimate leaves the viewing volume.
  void step(const RgbdFrame& observed);

  /// n successive steps against the same observed frame.
  void iterate(const RgbdFrame& observed, int n);

  /// Replace the pose estimate and clear step diagnostics.
  void reset(const RigidPose& pose);

  const RigidPose& pose() const { return pose_; }
  uint64_t frame_counter() const { return counter_; }
  const Diagnostics& diagnostics() const { return diag_; }
  const nn::NetworkParams<float>& params() const { return params_; }
  const ChannelStats& stats() const { return stats_; }
  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const TriMesh& mesh() const { return *mesh_; }
  double object_diameter_m() const { return 2.0 * mesh_->radius; }

  /// Per-phase wall times of the most recent step, in milliseconds.
  struct PhaseTimes {
    double render_ms = 0;
    double normalize_ms = 0;
    double forward_ms = 0;
  };
  const PhaseTimes& last_phase_times() const { return phase_times_; }

private:
  const TriMesh* mesh_;
  nn::NetworkParams<float> params_;
  ChannelStats stats_;
  CameraIntrinsics intrinsics_;
  RigidPose pose_;
  double t_max_mm_, r_max_deg_, bbox_margin_;
  int workers_;
  uint64_t counter_ = 0;
  Diagnostics diag_;
  PhaseTimes phase_times_;
  nn::ForwardCache<float> cache_;
};

}  // namespace dt6d
