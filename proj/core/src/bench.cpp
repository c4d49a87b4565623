#include "dt6d/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dt6d/errors.hpp"

namespace dt6d {

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  Summary s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto percentile = [&sorted](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  s.p25 = percentile(0.25);
  s.p50 = percentile(0.50);
  s.p75 = percentile(0.75);
  return s;
}

namespace {

std::vector<double> column(const BenchReport& report, double FrameErrorRow::* member) {
  std::vector<double> out;
  out.reserve(report.rows.size());
  for (const auto& row : report.rows) out.push_back(row.*member);
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle_deg) {
  const Vec3 u = axis.normalized();
  const double a = deg_to_rad(angle_deg);
  const double c = std::cos(a), s = std::sin(a), t = 1 - c;
  Mat3 r;
  r.m = {t * u.x * u.x + c,       t * u.x * u.y - s * u.z, t * u.x * u.z + s * u.y,
         t * u.x * u.y + s * u.z, t * u.y * u.y + c,       t * u.y * u.z - s * u.x,
         t * u.x * u.z - s * u.y, t * u.y * u.z + s * u.x, t * u.z * u.z + c};
  return r;
}

}  // namespace

Summary summarize_translation(const BenchReport& report) {
  return summarize(column(report, &FrameErrorRow::t_err_mm));
}

Summary summarize_rotation(const BenchReport& report) {
  return summarize(column(report, &FrameErrorRow::r_err_deg));
}

BenchReport run_tracking_benchmark(Tracker& tracker, const SyntheticSequence& seq, int reset_every) {
  if (seq.frames.empty()) throw std::invalid_argument("benchmark: empty sequence");
  BenchReport report;
  const double lost_threshold_mm = tracker.object_diameter_m() * 1000.0;
  bool pending_reset = false;

  for (size_t f = 0; f < seq.frames.size(); ++f) {
    const SequenceFrame& frame = seq.frames[f];
    const bool scheduled = reset_every > 0 && f % static_cast<size_t>(reset_every) == 0;
    bool was_reset = false;
    if (scheduled || pending_reset || f == 0) {
      tracker.reset(frame.gt_pose);
      report.reset_frames.push_back(static_cast<int>(f));
      pending_reset = false;
      was_reset = true;
    }

    bool lost = false;
    try {
      tracker.step(frame.observed);
    } catch (const TrackingLost&) {
      lost = true;  // estimate unchanged
    }

    const PoseErrors err = pose_error(tracker.pose(), frame.gt_pose);
    report.rows.push_back({static_cast<int>(f), err.translation_mm, err.rotation_deg,
                           err.center_distance_mm, was_reset});
    if (lost || err.center_distance_mm > lost_threshold_mm) {
      report.lost_frames.push_back(static_cast<int>(f));
      pending_reset = true;
    }
  }
  return report;
}

std::vector<OcclusionCell> occlusion_sweep(const Tracker& prototype, const TriMesh& mesh,
                                           const OcclusionSweepConfig& cfg) {
  std::vector<OcclusionCell> cells;
  if (cfg.include_zero_control)
    cells.push_back({0.0, OccluderOrientation::kVertical, {}});
  for (const double level : cfg.levels) {
    cells.push_back({level, OccluderOrientation::kVertical, {}});
    cells.push_back({level, OccluderOrientation::kHorizontal, {}});
  }

  for (size_t c = 0; c < cells.size(); ++c) {
    SynthConfig synth = cfg.sequence;
    synth.kind = SequenceKind::kTurntable;
    synth.intrinsics = prototype.intrinsics();
    synth.occlusion = cells[c].level;
    synth.orientation = cells[c].orientation;
    synth.n_frames = cfg.n_frames;
    synth.seed = cfg.seed + c;
    const SyntheticSequence seq = synth_sequence(mesh, synth);

    Tracker tracker = prototype;
    cells[c].report = run_tracking_benchmark(tracker, seq, cfg.reset_every);
  }
  return cells;
}

std::vector<InitPerturbationCell> init_perturbation_bench(const Tracker& prototype,
                                                          const SyntheticSequence& seq,
                                                          const InitPerturbationConfig& cfg) {
  if (static_cast<int>(seq.frames.size()) < cfg.sample_frames)
    throw std::invalid_argument("init bench: sequence shorter than sample_frames");

  RandomStream pick_rng = RandomStream::substream(cfg.seed, 0, "frames");
  std::vector<size_t> frame_ids;
  for (int i = 0; i < cfg.sample_frames; ++i)
    frame_ids.push_back(pick_rng.uniform_index(seq.frames.size()));

  std::vector<std::pair<bool, double>> grid;  // (rotation_mode, magnitude)
  if (cfg.include_zero_control) {
    grid.emplace_back(true, 0.0);
    grid.emplace_back(false, 0.0);
  }
  for (double m = cfg.rot_lo_deg; m <= cfg.rot_hi_deg + 1e-9; m += cfg.rot_step_deg)
    grid.emplace_back(true, m);
  for (double m = cfg.trans_lo_mm; m <= cfg.trans_hi_mm + 1e-9; m += cfg.trans_step_mm)
    grid.emplace_back(false, m);

  std::vector<InitPerturbationCell> cells;
  for (size_t g = 0; g < grid.size(); ++g) {
    const auto [rotation_mode, magnitude] = grid[g];
    std::vector<double> final_t, final_r;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      RandomStream rng = RandomStream::substream(cfg.seed, g * 1000 + trial, "perturb");
      const SequenceFrame& frame = seq.frames[frame_ids[trial % frame_ids.size()]];

      RigidPose init = frame.gt_pose;
      if (rotation_mode) {
        init.rotation = axis_angle(rng.unit_sphere(), magnitude) * init.rotation;
      } else {
        init.translation += rng.unit_sphere() * (magnitude / 1000.0);
      }

      Tracker tracker = prototype;
      tracker.reset(init);
      try {
        tracker.iterate(frame.observed, cfg.iterations);
      } catch (const TrackingLost&) {
        // keep whatever estimate survived; error recorded below
      }
      const PoseErrors err = pose_error(tracker.pose(), frame.gt_pose);
      final_t.push_back(err.translation_mm);
      final_r.push_back(err.rotation_deg);
    }
    InitPerturbationCell cell;
    cell.rotation_mode = rotation_mode;
    cell.magnitude = magnitude;
    cell.trials = cfg.trials;
    const Summary st = summarize(final_t);
    const Summary sr = summarize(final_r);
    cell.mean_t_mm = st.mean;
    cell.std_t_mm = st.stddev;
    cell.mean_r_deg = sr.mean;
    cell.std_r_deg = sr.stddev;
    cells.push_back(cell);
  }
  return cells;
}

void write_report_csv(const BenchReport& report, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("bench: cannot open for writing: " + path);
  std::fprintf(f, "frame,t_err_mm,r_err_deg,center_mm,reset_flag\n");
  for (const auto& row : report.rows)
    std::fprintf(f, "%d,%.9g,%.9g,%.9g,%d\n", row.frame, row.t_err_mm, row.r_err_deg,
                 row.center_mm, row.reset ? 1 : 0);
  std::fclose(f);
}

void write_summary_csv(const std::vector<std::pair<std::string, Summary>>& cells,
                       const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("bench: cannot open for writing: " + path);
  std::fprintf(f, "cell,mean,std,p25,p50,p75\n");
  for (const auto& [name, s] : cells)
    std::fprintf(f, "%s,%.9g,%.9g,%.9g,%.9g,%.9g\n", name.c_str(), s.mean, s.stddev, s.p25, s.p50,
                 s.p75);
  std::fclose(f);
}

void write_init_csv(const std::vector<InitPerturbationCell>& cells, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("bench: cannot open for writing: " + path);
  std::fprintf(f, "mode,magnitude,mean_t_mm,std_t_mm,mean_r_deg,std_r_deg,trials\n");
  for (const auto& c : cells)
    std::fprintf(f, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", c.rotation_mode ? "rotation" : "translation",
                 c.magnitude, c.mean_t_mm, c.std_t_mm, c.mean_r_deg, c.std_r_deg, c.trials);
  std::fclose(f);
}

}  // namespace dt6d
