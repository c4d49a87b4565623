#include "dt6d/sequence.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dt6d/augment.hpp"
#include "dt6d/background.hpp"
#include "dt6d/errors.hpp"
#include "dt6d/render.hpp"

namespace dt6d {

double measure_occluded_fraction(const RgbdFrame& object_only, const RgbdFrame& occluder_only) {
  if (!object_only.same_size(occluder_only))
    throw std::invalid_argument("occlusion measure: size mismatch");
  size_t object_px = 0, hidden_px = 0;
  const size_t n = object_only.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    const float oz = object_only.depth[i];
    if (oz <= 0.0f) continue;
    ++object_px;
    const float cz = occluder_only.depth[i];
    if (cz > 0.0f && cz < oz) ++hidden_px;
  }
  if (object_px == 0) throw TrackingLost("occlusion measure: empty silhouette");
  return static_cast<double>(hidden_px) / static_cast<double>(object_px);
}

namespace {

/// Occluder bar for the turntable protocol. Slightly tilted in-plane so the
/// covered fraction varies smoothly with the lateral offset.
TriMesh make_occluder_bar(OccluderOrientation orientation) {
  Texture tex = Texture::checkerboard(16, 4, {0.45f, 0.33f, 0.25f}, {0.55f, 0.45f, 0.35f});
  TriMesh bar = orientation == OccluderOrientation::kVertical
                    ? make_box(0.22, 1.2, 0.04, std::move(tex))
                    : make_box(1.2, 0.22, 0.04, std::move(tex));
  return bar;
}

RigidPose occluder_pose(OccluderOrientation orientation, double offset_m, double z_m) {
  RigidPose pose;
  pose.rotation = euler_to_matrix(0, 0, 6.0);  // in-plane tilt
  pose.translation = orientation == OccluderOrientation::kVertical
                         ? Vec3{offset_m, 0, z_m}
                         : Vec3{0, -offset_m, z_m};  // slides up from center
  return pose;
}

}  // namespace

SyntheticSequence synth_sequence(const TriMesh& mesh, const SynthConfig& cfg) {
  if (cfg.n_frames < 2) throw std::invalid_argument("synth_sequence: need at least 2 frames");
  if (cfg.occlusion < 0 || cfg.occlusion > 0.6)
    throw std::invalid_argument("synth_sequence: occlusion fraction must be in [0, 0.6]");
  cfg.intrinsics.validate();

  SyntheticSequence seq;
  seq.kind = cfg.kind;
  seq.occlusion = cfg.occlusion;
  seq.orientation = cfg.orientation;
  seq.seed = cfg.seed;
  seq.intrinsics = cfg.intrinsics;
  seq.frames.reserve(static_cast<size_t>(cfg.n_frames));

  RandomStream scene_rng = RandomStream::substream(cfg.seed, 0, "scene");
  const Lighting light = Lighting::random_observed(scene_rng);
  const RgbdFrame background = make_procedural_background(cfg.intrinsics, scene_rng);

  if (cfg.kind == SequenceKind::kTurntable) {
    RigidPose base;
    base.rotation = euler_to_matrix(scene_rng.uniform(-20, 20), scene_rng.uniform(-180, 180),
                                    scene_rng.uniform(-15, 15));
    base.translation = {0, 0, cfg.turntable_z_m};

    // Static occluder calibrated by bisection on its lateral offset.
    RgbdFrame occluder_frame(cfg.intrinsics.width, cfg.intrinsics.height);
    if (cfg.occlusion > 0) {
      const TriMesh bar = make_occluder_bar(cfg.orientation);
      const double z_occ = cfg.turntable_z_m * 0.6;
      const RgbdFrame object_only = render_rgbd(mesh, base, cfg.intrinsics, light);

      auto fraction_at = [&](double offset) {
        const RgbdFrame occ =
            render_rgbd(bar, occluder_pose(cfg.orientation, offset, z_occ), cfg.intrinsics, light);
        return measure_occluded_fraction(object_only, occ);
      };
      double lo = 0.0, hi = 0.6;  // offset meters; fraction decreases with offset
      if (fraction_at(lo) < cfg.occlusion)
        throw std::invalid_argument("synth_sequence: occlusion target unreachable");
      for (int it = 0; it < 48; ++it) {
        const double mid = (lo + hi) / 2;
        if (fraction_at(mid) >= cfg.occlusion) lo = mid;
        else hi = mid;
      }
      // lo is the largest probed offset still covering >= target.
      double offset = lo;
      if (std::abs(fraction_at(offset) - cfg.occlusion) > 0.01)
        throw std::invalid_argument("synth_sequence: occlusion calibration outside 1% tolerance");
      occluder_frame =
          render_rgbd(bar, occluder_pose(cfg.orientation, offset, z_occ), cfg.intrinsics, light);
    }

    for (int f = 0; f < cfg.n_frames; ++f) {
      RigidPose gt;
      gt.rotation = euler_to_matrix(0, cfg.turntable_rate_deg * f, 0) * base.rotation;
      gt.translation = base.translation;

      RgbdFrame observed = render_rgbd(mesh, gt, cfg.intrinsics, light);
      observed = composite_over(observed, background);
      observed = composite_over(occluder_frame, observed);
      RandomStream noise_rng = RandomStream::substream(cfg.seed, static_cast<uint64_t>(f), "noise");
      add_gaussian_noise(observed, cfg.noise_sigma, noise_rng);
      seq.frames.push_back({gt, std::move(observed)});
    }
    return seq;
  }

  // Handheld: momentum-smoothed pose walk, per-frame delta clamped to half
  // the training range, bounced off the viewing-volume bounds.
  RandomStream walk_rng = RandomStream::substream(cfg.seed, 0, "walk");
  RigidPose pose = sample_observed_pose(walk_rng, cfg.radius_lo_m, cfg.radius_hi_m);
  const double t_half = cfg.t_max_mm / 2.0, r_half = cfg.r_max_deg / 2.0;
  PoseDelta velocity;

  const double lateral_span = 0.30;  // of the half-frustum, keeps the crop inside view
  for (int f = 0; f < cfg.n_frames; ++f) {
    RgbdFrame observed = render_rgbd(mesh, pose, cfg.intrinsics, light);
    observed = composite_over(observed, background);
    RandomStream noise_rng = RandomStream::substream(cfg.seed, static_cast<uint64_t>(f), "noise");
    add_gaussian_noise(observed, cfg.noise_sigma, noise_rng);
    seq.frames.push_back({pose, std::move(observed)});

    for (int i = 0; i < 3; ++i) {
      velocity.t_mm[i] = clamp(0.85 * velocity.t_mm[i] + walk_rng.uniform(-0.5, 0.5) * t_half,
                               -t_half, t_half);
      velocity.r_deg[i] = clamp(0.85 * velocity.r_deg[i] + walk_rng.uniform(-0.5, 0.5) * r_half,
                                -r_half, r_half);
    }
    RigidPose next = apply_delta(pose, velocity);
    const double max_x = lateral_span * next.translation.z * cfg.intrinsics.width / (2 * cfg.intrinsics.fx);
    const double max_y = lateral_span * next.translation.z * cfg.intrinsics.height / (2 * cfg.intrinsics.fy);
    if (next.translation.z < cfg.radius_lo_m || next.translation.z > cfg.radius_hi_m)
      velocity.t_mm[2] = -velocity.t_mm[2];
    if (std::abs(next.translation.x) > max_x) velocity.t_mm[0] = -velocity.t_mm[0];
    if (std::abs(next.translation.y) > max_y) velocity.t_mm[1] = -velocity.t_mm[1];
    pose = apply_delta(pose, velocity);
  }
  return seq;
}

void save_sequence(const SyntheticSequence& seq, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream meta(dir + "/meta.ini");
  if (!meta) throw FormatError("sequence: cannot write meta.ini in " + dir);
  meta << "[sequence]\n";
  meta << "kind = " << (seq.kind == SequenceKind::kHandheld ? "handheld" : "turntable") << "\n";
  meta << "occlusion = " << seq.occlusion << "\n";
  meta << "orientation = "
       << (seq.orientation == OccluderOrientation::kVertical ? "vertical" : "horizontal") << "\n";
  meta << "seed = " << seq.seed << "\n";
  meta << "frames = " << seq.frames.size() << "\n";
  meta << "[camera]\n";
  meta << "width = " << seq.intrinsics.width << "\nheight = " << seq.intrinsics.height << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", seq.intrinsics.fx);
  meta << "fx = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", seq.intrinsics.fy);
  meta << "fy = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", seq.intrinsics.cx);
  meta << "cx = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", seq.intrinsics.cy);
  meta << "cy = " << buf << "\n";

  FILE* poses = std::fopen((dir + "/poses.csv").c_str(), "w");
  if (!poses) throw FormatError("sequence: cannot write poses.csv in " + dir);
  std::fprintf(poses, "frame,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz\n");
  for (size_t f = 0; f < seq.frames.size(); ++f) {
    const RigidPose& p = seq.frames[f].gt_pose;
    std::fprintf(poses, "%zu", f);
    for (int i = 0; i < 9; ++i) std::fprintf(poses, ",%.17g", p.rotation.m[i]);
    std::fprintf(poses, ",%.17g,%.17g,%.17g\n", p.translation.x, p.translation.y, p.translation.z);

    char name[32];
    std::snprintf(name, sizeof name, "/color_%05zu.png", f);
    write_color_png(seq.frames[f].observed, dir + name);
    std::snprintf(name, sizeof name, "/depth_%05zu.png", f);
    write_depth_png(seq.frames[f].observed, dir + name);
  }
  std::fclose(poses);
}

SyntheticSequence load_sequence(const std::string& dir) {
  std::ifstream meta(dir + "/meta.ini");
  if (!meta) throw FormatError("sequence: missing meta.ini in " + dir);
  SyntheticSequence seq;
  size_t frame_count = 0;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ss(line);
    std::string key, eq, value;
    if (!(ss >> key >> eq >> value) || eq != "=") continue;
    if (key == "kind") seq.kind = value == "turntable" ? SequenceKind::kTurntable : SequenceKind::kHandheld;
    else if (key == "occlusion") seq.occlusion = std::stod(value);
    else if (key == "orientation")
      seq.orientation = value == "horizontal" ? OccluderOrientation::kHorizontal : OccluderOrientation::kVertical;
    else if (key == "seed") seq.seed = std::stoull(value);
    else if (key == "frames") frame_count = std::stoull(value);
    else if (key == "width") seq.intrinsics.width = std::stoi(value);
    else if (key == "height") seq.intrinsics.height = std::stoi(value);
    else if (key == "fx") seq.intrinsics.fx = std::stod(value);
    else if (key == "fy") seq.intrinsics.fy = std::stod(value);
    else if (key == "cx") seq.intrinsics.cx = std::stod(value);
    else if (key == "cy") seq.intrinsics.cy = std::stod(value);
  }
  seq.intrinsics.validate();

  std::ifstream poses(dir + "/poses.csv");
  if (!poses) throw FormatError("sequence: missing poses.csv in " + dir);
  std::getline(poses, line);  // header
  while (std::getline(poses, line)) {
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != 13) throw FormatError("sequence: malformed poses.csv row in " + dir);
    SequenceFrame frame;
    for (int i = 0; i < 9; ++i) frame.gt_pose.rotation.m[i] = values[1 + i];
    frame.gt_pose.translation = {values[10], values[11], values[12]};

    char name[32];
    std::snprintf(name, sizeof name, "/color_%05zu.png", static_cast<size_t>(values[0]));
    const std::string color = dir + name;
    std::snprintf(name, sizeof name, "/depth_%05zu.png", static_cast<size_t>(values[0]));
    frame.observed = read_rgbd_pngs(color, dir + name);
    seq.frames.push_back(std::move(frame));
  }
  if (seq.frames.empty() || (frame_count && seq.frames.size() != frame_count))
    throw FormatError("sequence: frame count mismatch in " + dir);
  return seq;
}

}  // namespace dt6d
