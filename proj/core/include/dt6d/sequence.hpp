#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dt6d/image.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/pose.hpp"

namespace dt6d {

enum class SequenceKind { kHandheld, kTurntable };
enum class OccluderOrientation { kVertical, kHorizontal };

struct SequenceFrame {
  RigidPose gt_pose;
  RgbdFrame observed;
};

struct SyntheticSequence {
  SequenceKind kind = SequenceKind::kHandheld;
  double occlusion = 0;
  OccluderOrientation orientation = OccluderOrientation::kVertical;
  uint64_t seed = 0;
  CameraIntrinsics intrinsics;
  std::vector<SequenceFrame> frames;
};

struct SynthConfig {
  SequenceKind kind = SequenceKind::kHandheld;
  double occlusion = 0;  // target occluded fraction on frame 0, in [0, 0.6]
  OccluderOrientation orientation = OccluderOrientation::kVertical;
  int n_frames = 100;
  uint64_t seed = 1;
  CameraIntrinsics intrinsics;
  double t_max_mm = kDefaultDeltaTransMm;  // handheld walk uses half of these
  double r_max_deg = kDefaultDeltaRotDeg;
  double noise_sigma = 1.0;          // 8-bit-equivalent sensor noise
  double turntable_rate_deg = 2.0;   // per frame, about the vertical axis
  double turntable_z_m = 0.7;
  double radius_lo_m = 0.45;         // handheld walk depth bounds
  double radius_hi_m = 1.2;
};

/// Handheld: smooth pose walk with per-frame deltas at most half the
/// training range, static background. Turntable: constant-rate rotation
/// behind a static occluder tuned by bisection so the occluded silhouette
/// fraction on frame 0 matches cfg.occlusion within 1%. Both pipelines use
/// observed-style lighting (sampled once per sequence) plus sensor noise.
SyntheticSequence synth_sequence(const TriMesh& mesh, const SynthConfig& cfg);

/// Directory layout: color_NNNNN.png + depth_NNNNN.png per frame,
/// poses.csv with ground truth, meta.ini with kind/intrinsics/seed.
void save_sequence(const SyntheticSequence& seq, const std::string& dir);
SyntheticSequence load_sequence(const std::string& dir);

/// Fraction of the object's silhouette pixels hidden by the occluder
/// render (the measurement oracle behind the turntable calibration).
double measure_occluded_fraction(const RgbdFrame& object_only, const RgbdFrame& occluder_only);

}  // namespace dt6d
