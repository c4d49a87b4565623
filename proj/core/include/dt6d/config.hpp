#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dt6d/augment.hpp"
#include "dt6d/nn/network.hpp"
#include "dt6d/nn/train.hpp"
#include "dt6d/pose.hpp"
#include "dt6d/sequence.hpp"

namespace dt6d {

/// Flat key = value configuration with [sections]. Unknown keys are
/// rejected so typos surface as validation errors.
struct PipelineConfig {
  // [project]
  uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 0;  // 0 = auto; DT6D_THREADS overrides either way
  std::string mesh = "toy";  // builtin name or OBJ path

  // [camera]
  int width = 256;
  int height = 212;
  double fx = 0, fy = 0, cx = -1, cy = -1;  // unset: Kinect-like scaling

  // [datagen]
  uint64_t count = 20000;
  int input_side = 150;
  double radius_lo = 0.4, radius_hi = 1.5;
  double t_max_mm = kDefaultDeltaTransMm;
  double r_max_deg = kDefaultDeltaRotDeg;
  double bbox_margin = 0.15;
  uint64_t stats_subset = 512;
  int bg_pool = 48;
  double bg_ssim_threshold = 0.92;
  std::string bg_dir;  // empty: procedural backgrounds

  AugmentConfig augment;   // [augment]
  nn::NetConfig network;   // [network] (input side copied from datagen)
  nn::TrainConfig train;   // [train]

  // [track]
  std::string model_path;
  std::string sequence_dir;
  int track_iterations = 1;

  // [bench]
  int bench_frames = 60;
  int bench_reset_every = 15;
  std::vector<double> occlusion_levels{0.1, 0.2, 0.3, 0.4};
  int init_trials = 40;
  int init_iterations = 15;
  double bench_noise_sigma = 1.0;
  double turntable_z = 0.7;
  double turntable_rate_deg = 2.0;

  CameraIntrinsics intrinsics() const;
  void validate() const;

  static PipelineConfig load(const std::string& path);
  /// Every field, defaults included, in the file format load() accepts.
  std::string resolved_text() const;
};

/// Raw INI scan (exposed for reuse by sequence metadata and tests).
std::map<std::string, std::string> parse_ini(const std::string& text);

/// Commented template documenting every key.
std::string config_template();

}  // namespace dt6d
