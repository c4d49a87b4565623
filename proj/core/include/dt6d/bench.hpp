#pragma once

#include <string>
#include <vector>

#include "dt6d/sequence.hpp"
#include "dt6d/tracker.hpp"

namespace dt6d {

struct FrameErrorRow {
  int frame = 0;
  double t_err_mm = 0;
  double r_err_deg = 0;
  double center_mm = 0;
  bool reset = false;
};

struct Summary {
  double mean = 0, stddev = 0;
  double p25 = 0, p50 = 0, p75 = 0;
};

struct BenchReport {
  std::vector<FrameErrorRow> rows;
  std::vector<int> reset_frames;
  std::vector<int> lost_frames;
};

/// Mean, standard deviation and linearly interpolated 25/50/75 percentiles.
Summary summarize(const std::vector<double>& values);

Summary summarize_translation(const BenchReport& report);
Summary summarize_rotation(const BenchReport& report);

/// Runs the tracker over a sequence, recording pose errors per frame.
/// reset_every = 0 means never. Lost track (center distance beyond one
/// object diameter, or a TrackingLost step) logs an event and reinitializes
/// from ground truth on the next frame.
BenchReport run_tracking_benchmark(Tracker& tracker, const SyntheticSequence& seq, int reset_every);

struct OcclusionCell {
  double level = 0;
  OccluderOrientation orientation = OccluderOrientation::kVertical;
  BenchReport report;
};

struct OcclusionSweepConfig {
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4};
  bool include_zero_control = true;
  int n_frames = 60;
  int reset_every = 15;
  uint64_t seed = 7;
  SynthConfig sequence;  // kind/orientation/occlusion overwritten per cell
};

/// One turntable sequence per (level, orientation) plus an optional
/// occlusion-free control cell; every cell starts from the ground-truth
/// pose of its first frame.
std::vector<OcclusionCell> occlusion_sweep(const Tracker& prototype, const TriMesh& mesh,
                                           const OcclusionSweepConfig& cfg);

struct InitPerturbationCell {
  bool rotation_mode = false;  // false: translation perturbations
  double magnitude = 0;        // degrees or millimeters
  double mean_t_mm = 0, std_t_mm = 0;
  double mean_r_deg = 0, std_r_deg = 0;
  int trials = 0;
};

struct InitPerturbationConfig {
  double rot_lo_deg = 5, rot_hi_deg = 75, rot_step_deg = 5;
  double trans_lo_mm = 10, trans_hi_mm = 130, trans_step_mm = 10;
  int trials = 40;
  int iterations = 15;
  int sample_frames = 10;
  bool include_zero_control = true;
  uint64_t seed = 11;
};

/// Perturbs ground-truth initializations by exact magnitudes (geodesic
/// rotations about random axes; translations along random directions), runs
/// `iterations` tracker steps on the frame, and reports the final error
/// statistics per increment.
std::vector<InitPerturbationCell> init_perturbation_bench(const Tracker& prototype,
                                                          const SyntheticSequence& seq,
                                                          const InitPerturbationConfig& cfg);

void write_report_csv(const BenchReport& report, const std::string& path);
void write_summary_csv(const std::vector<std::pair<std::string, Summary>>& cells,
                       const std::string& path);
void write_init_csv(const std::vector<InitPerturbationCell>& cells, const std::string& path);

}  // namespace dt6d
