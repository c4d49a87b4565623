#include "dt6d/datagen.hpp"

#include <algorithm>
#include <stdexcept>

#include "dt6d/errors.hpp"
#include "dt6d/parallel.hpp"

namespace dt6d {

void GenParams::validate() const {
  if (!mesh || !occluder) throw std::invalid_argument("datagen: mesh and occluder required");
  if (!backgrounds || backgrounds->empty())
    throw std::invalid_argument("datagen: background pool must be non-empty");
  intrinsics.validate();
  augment.validate();
  if (input_side < 8) throw std::invalid_argument("datagen: input side too small");
  if (!(radius_lo_m > 0) || !(radius_hi_m > radius_lo_m))
    throw std::invalid_argument("datagen: bad radius range");
}

namespace {

struct DrawOutcome {
  SamplePair pair;
  SampleFlags flags;
};

DrawOutcome draw_once(const GenParams& p, uint64_t seed, uint64_t index, const char* pose_tag,
                      SampleDebug* debug) {
  RandomStream rng_pose = RandomStream::substream(seed, index, pose_tag);
  const RigidPose pose_obs = sample_observed_pose(rng_pose, p.radius_lo_m, p.radius_hi_m);
  const PoseDelta delta = sample_pose_delta(rng_pose, p.t_max_mm, p.r_max_deg);
  const RigidPose pose_pred = apply_delta(pose_obs, invert_delta(delta));

  const PixelBox bbox = projected_bbox(*p.mesh, pose_pred, p.intrinsics, p.bbox_margin);

  // Predicted frame: object alone, fixed lighting.
  RgbdFrame frame_pred = render_rgbd(*p.mesh, pose_pred, p.intrinsics, Lighting::predicted_default());

  // Observed frame: random light, color perturbation on object pixels,
  // background composite, then the sampled augmentations.
  RandomStream rng_light = RandomStream::substream(seed, index, "light");
  RgbdFrame frame_obs = render_rgbd(*p.mesh, pose_obs, p.intrinsics, Lighting::random_observed(rng_light));

  RandomStream rng_color = RandomStream::substream(seed, index, "color");
  const double h_hue = rng_color.uniform(-p.augment.hue_lum_range, p.augment.hue_lum_range);
  const double h_lum = rng_color.uniform(-p.augment.hue_lum_range, p.augment.hue_lum_range);
  perturb_color(frame_obs, h_hue, h_lum);

  RandomStream rng_bg = RandomStream::substream(seed, index, "bg");
  const RgbdFrame& bg = (*p.backgrounds)[rng_bg.uniform_index(p.backgrounds->size())];
  if (!bg.same_size(frame_obs)) throw std::invalid_argument("datagen: background resolution mismatch");
  frame_obs = composite_over(frame_obs, bg);

  SampleFlags flags;
  RandomStream rng_occ = RandomStream::substream(seed, index, "occ");
  if (rng_occ.uniform() < p.augment.p_occluder) {
    flags.occluder = true;
    // Place the occluder between camera and object, its center projecting
    // inside the object's silhouette disk.
    const Vec3 t_obj = pose_obs.translation;
    const double z_occ = t_obj.z * rng_occ.uniform(0.55, 0.8);
    Vec3 target = t_obj + Vec3{rng_occ.uniform(-0.7, 0.7) * p.mesh->radius,
                               rng_occ.uniform(-0.7, 0.7) * p.mesh->radius, 0};
    target = target * (z_occ / target.z);
    RigidPose occ_pose;
    occ_pose.rotation = euler_to_matrix(rng_occ.uniform(-180, 180), rng_occ.uniform(-180, 180),
                                        rng_occ.uniform(-180, 180));
    occ_pose.translation = target;

    TriMesh occ = *p.occluder;  // cheap copy; texture replaced per sample
    const auto rgb = hsv_to_rgb(static_cast<float>(rng_occ.uniform()), 0.7f,
                                static_cast<float>(rng_occ.uniform(0.25, 1.0)));
    occ.texture = Texture::flat(rgb[0], rgb[1], rgb[2]);
    RgbdFrame occ_frame = render_rgbd(occ, occ_pose, p.intrinsics, Lighting::predicted_default());
    frame_obs = composite_over(occ_frame, frame_obs);
  }

  RandomStream rng_noise = RandomStream::substream(seed, index, "noise");
  if (rng_noise.uniform() < p.augment.p_noise) {
    flags.noise = true;
    flags.sigma = rng_noise.uniform(p.augment.sigma_lo, p.augment.sigma_hi);
    add_gaussian_noise(frame_obs, flags.sigma, rng_noise);
  }

  RandomStream rng_blur = RandomStream::substream(seed, index, "blur");
  if (rng_blur.uniform() < p.augment.p_blur) {
    flags.blur = true;
    mean_blur3(frame_obs);
  }

  const double z_center = pose_pred.translation.z;
  DrawOutcome out;
  out.pair.x_pred = normalize_input(frame_pred, bbox, p.input_side, p.stats, z_center);
  out.pair.x_obs = normalize_input(frame_obs, bbox, p.input_side, p.stats, z_center);
  out.pair.y = encode_label(delta, p.t_max_mm, p.r_max_deg);
  out.flags = flags;

  if (debug) {
    debug->pose_obs = pose_obs;
    debug->pose_pred = pose_pred;
    debug->delta = delta;
    debug->bbox = bbox;
    debug->frame_pred = std::move(frame_pred);
    debug->frame_obs = std::move(frame_obs);
    debug->flags = flags;
  }
  return out;
}

}  // namespace

SamplePair generate_sample_pair(const GenParams& params, uint64_t seed, uint64_t index,
                                SampleDebug* debug) {
  params.validate();
  try {
    return draw_once(params, seed, index, "pose", debug).pair;
  } catch (const TrackingLost&) {
    return draw_once(params, seed, index, "pose-retry", debug).pair;
  }
}

DatagenResult generate_dataset(const GenParams& params, uint64_t seed, uint64_t count,
                               size_t stats_subset, const std::string& path, int workers) {
  params.validate();
  if (count == 0) throw std::invalid_argument("datagen: count must be positive");
  stats_subset = std::min<size_t>(stats_subset, count);

  // Pass 1: channel statistics from pre-standardized inputs (both halves of
  // the pair contribute). Generation is parallel per chunk; accumulation
  // folds in index order so the sums are worker-count independent.
  GenParams pre = params;
  pre.stats = ChannelStats{};  // identity
  StatsAccumulator acc;
  {
    const size_t chunk = 64;
    std::vector<SamplePair> buffer(chunk);
    for (size_t base = 0; base < stats_subset; base += chunk) {
      const size_t n = std::min(chunk, stats_subset - base);
      parallel_for(n, workers, [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) buffer[i] = generate_sample_pair(pre, seed, base + i);
      });
      for (size_t i = 0; i < n; ++i) {
        acc.add(buffer[i].x_pred);
        acc.add(buffer[i].x_obs);
      }
    }
  }
  const ChannelStats stats = acc.finalize();

  // Pass 2: regenerate everything with the final statistics and stream to
  // disk in index order.
  GenParams final_params = params;
  final_params.stats = stats;

  DatasetHeader header;
  header.side = static_cast<uint32_t>(params.input_side);
  header.count = count;
  header.seed = seed;
  header.stats = stats;
  header.augment = params.augment;
  DatasetWriter writer(path, header);

  DatagenStats rates;
  rates.count = count;
  const size_t chunk = 64;
  std::vector<SamplePair> buffer(chunk);
  std::vector<SampleFlags> flag_buffer(chunk);
  for (uint64_t base = 0; base < count; base += chunk) {
    const size_t n = static_cast<size_t>(std::min<uint64_t>(chunk, count - base));
    parallel_for(n, workers, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        SampleDebug debug;
        buffer[i] = generate_sample_pair(final_params, seed, base + i, &debug);
        flag_buffer[i] = debug.flags;
      }
    });
    for (size_t i = 0; i < n; ++i) {
      writer.append(buffer[i]);
      rates.occluder_applied += flag_buffer[i].occluder ? 1 : 0;
      rates.blur_applied += flag_buffer[i].blur ? 1 : 0;
      rates.noise_applied += flag_buffer[i].noise ? 1 : 0;
    }
  }
  writer.close();
  return {stats, rates};
}

}  // namespace dt6d
