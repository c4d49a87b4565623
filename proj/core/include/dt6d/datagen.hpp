#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dt6d/augment.hpp"
#include "dt6d/dataset.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/normalize.hpp"
#include "dt6d/pose.hpp"
#include "dt6d/render.hpp"

namespace dt6d {

/// Everything a single sample draw needs. Stats default to identity, which
/// yields pre-standardized inputs (the statistics pass uses exactly that).
struct GenParams {
  const TriMesh* mesh = nullptr;
  const TriMesh* occluder = nullptr;
  const std::vector<RgbdFrame>* backgrounds = nullptr;
  CameraIntrinsics intrinsics;
  int input_side = 150;
  double radius_lo_m = 0.4;
  double radius_hi_m = 1.5;
  double t_max_mm = kDefaultDeltaTransMm;
  double r_max_deg = kDefaultDeltaRotDeg;
  double bbox_margin = 0.15;
  AugmentConfig augment;
  ChannelStats stats;

  void validate() const;
};

struct SampleFlags {
  bool occluder = false;
  bool blur = false;
  bool noise = false;
  double sigma = 0;
};

/// Optional extras for tests and previews.
struct SampleDebug {
  RigidPose pose_obs, pose_pred;
  PoseDelta delta;
  PixelBox bbox;
  RgbdFrame frame_pred, frame_obs;  // camera-resolution frames
  SampleFlags flags;
};

/// Deterministic sample draw for (seed, index): sample p_obs and the delta,
/// render the predicted frame alone under fixed lighting and the observed
/// frame under random lighting over a random background, apply the
/// augmentation schedule to the observed frame only, then normalize both
/// through the predicted-pose crop. Rendering/normalization failures are
/// retried once with a fresh pose draw.
SamplePair generate_sample_pair(const GenParams& params, uint64_t seed, uint64_t index,
                                SampleDebug* debug = nullptr);

struct DatagenStats {
  uint64_t occluder_applied = 0;
  uint64_t blur_applied = 0;
  uint64_t noise_applied = 0;
  uint64_t count = 0;
};

struct DatagenResult {
  ChannelStats stats;
  DatagenStats rates;
};

/// Two-pass dataset generation: pass one estimates channel statistics on
/// the first `stats_subset` records, pass two regenerates every record with
/// those statistics applied and streams them to `path` in index order.
/// Byte-identical output for any worker count.
DatagenResult generate_dataset(const GenParams& params, uint64_t seed, uint64_t count,
                               size_t stats_subset, const std::string& path, int workers);

}  // namespace dt6d
