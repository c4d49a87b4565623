#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dt6d/augment.hpp"
#include "dt6d/background.hpp"
#include "dt6d/datagen.hpp"
#include "dt6d/dataset.hpp"
#include "dt6d/errors.hpp"
#include "dt6d/half.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/ssim.hpp"

using namespace dt6d;

namespace {

RgbdFrame noise_frame(int w, int h, uint64_t seed) {
  RgbdFrame f(w, h);
  RandomStream rng(seed);
  for (size_t i = 0; i < f.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) f.rgb[i * 3 + c] = static_cast<float>(rng.uniform());
    f.depth[i] = static_cast<float>(rng.uniform(0.2, 3.0));
  }
  return f;
}

/// Independent SSIM: same definition, written directly from the formula.
double ssim_reference(const RgbdFrame& a, const RgbdFrame& b) {
  auto luma = [](const RgbdFrame& f, int x, int y) {
    const float* p = f.rgb_at(x, y);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  int windows = 0;
  for (int wy = 0; wy + 8 <= a.height; ++wy)
    for (int wx = 0; wx + 8 <= a.width; ++wx) {
      double mx = 0, my = 0;
      for (int dy = 0; dy < 8; ++dy)
        for (int dx = 0; dx < 8; ++dx) {
          mx += luma(a, wx + dx, wy + dy);
          my += luma(b, wx + dx, wy + dy);
        }
      mx /= 64;
      my /= 64;
      double vx = 0, vy = 0, cov = 0;
      for (int dy = 0; dy < 8; ++dy)
        for (int dx = 0; dx < 8; ++dx) {
          const double ex = luma(a, wx + dx, wy + dy) - mx;
          const double ey = luma(b, wx + dx, wy + dy) - my;
          vx += ex * ex;
          vy += ey * ey;
          cov += ex * ey;
        }
      vx /= 64;
      vy /= 64;
      cov /= 64;
      total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  return total / windows;
}

GenParams tiny_gen_params(const TriMesh* mesh, const TriMesh* occ,
                          const std::vector<RgbdFrame>* bgs, const CameraIntrinsics& k) {
  GenParams p;
  p.mesh = mesh;
  p.occluder = occ;
  p.backgrounds = bgs;
  p.intrinsics = k;
  p.input_side = 32;
  p.radius_lo_m = 0.45;
  p.radius_hi_m = 0.9;
  return p;
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("color perturbation identities and hue rotation") {
  RgbdFrame f(4, 4);
  for (size_t i = 0; i < f.pixel_count(); ++i) {
    f.rgb[i * 3] = 0.8f;
    f.rgb[i * 3 + 1] = 0.3f;
    f.rgb[i * 3 + 2] = 0.1f;
    f.depth[i] = 1.0f;
  }
  RgbdFrame same = f;
  perturb_color(same, 0, 0);
  for (size_t i = 0; i < f.rgb.size(); ++i)
    CHECK(same.rgb[i] == doctest::Approx(f.rgb[i]).epsilon(1e-6));

  RgbdFrame red(1, 1);
  red.rgb = {1, 0, 0};
  red.depth = {1.0f};
  perturb_color(red, 1.0 / 3.0, 0);
  CHECK(red.rgb[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(red.rgb[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(red.rgb[2] == doctest::Approx(0.0).epsilon(1e-6));

  RgbdFrame bright(1, 1);
  bright.rgb = {0.98f, 0.98f, 0.98f};
  bright.depth = {1.0f};
  perturb_color(bright, 0, 0.05);
  CHECK(bright.rgb[0] == doctest::Approx(1.0));

  // Depth-less pixels keep their color.
  RgbdFrame bg(1, 1);
  bg.rgb = {0.2f, 0.4f, 0.6f};
  bg.depth = {0.0f};
  perturb_color(bg, 0.3, 0.02);
  CHECK(bg.rgb[0] == 0.2f);
}

TEST_CASE("gaussian noise magnitude and clamping") {
  RgbdFrame f(300, 350);
  for (size_t i = 0; i < f.pixel_count(); ++i) {
    f.rgb[i * 3] = f.rgb[i * 3 + 1] = f.rgb[i * 3 + 2] = 0.5f;
    f.depth[i] = 1.0f;
  }
  RgbdFrame same = f;
  RandomStream rng(61);
  add_gaussian_noise(same, 0, rng);
  CHECK(same.rgb == f.rgb);

  RgbdFrame noisy = f;
  add_gaussian_noise(noisy, 2.0, rng);
  double sum = 0, sum_sq = 0;
  const size_t n = noisy.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    const double d = noisy.rgb[i * 3] - 0.5;
    sum += d;
    sum_sq += d * d;
  }
  const double std_dev = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
  CHECK(std_dev == doctest::Approx(2.0 / 255.0).epsilon(0.05));
  for (size_t i = 0; i < n; ++i) {
    CHECK(noisy.rgb[i * 3] >= 0.0f);
    CHECK(noisy.rgb[i * 3] <= 1.0f);
    CHECK(noisy.depth[i] >= 0.0f);
  }
}

TEST_CASE("box blur kernel behavior") {
  RgbdFrame constant(8, 8);
  for (size_t i = 0; i < constant.pixel_count(); ++i) {
    constant.rgb[i * 3] = 0.4f;
    constant.depth[i] = 2.0f;
  }
  RgbdFrame blurred = constant;
  mean_blur3(blurred);
  for (size_t i = 0; i < blurred.pixel_count(); ++i) {
    CHECK(blurred.rgb[i * 3] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(blurred.depth[i] == doctest::Approx(2.0).epsilon(1e-6));
  }

  RgbdFrame impulse(9, 9);
  impulse.rgb_at(4, 4)[0] = 1.0f;
  mean_blur3(impulse);
  for (int y = 3; y <= 5; ++y)
    for (int x = 3; x <= 5; ++x) CHECK(impulse.rgb_at(x, y)[0] == doctest::Approx(1.0 / 9.0));
  CHECK(impulse.rgb_at(1, 1)[0] == 0.0f);

  // Interior mass conservation.
  RgbdFrame random = noise_frame(24, 24, 67);
  double before = 0;
  for (int y = 4; y < 20; ++y)
    for (int x = 4; x < 20; ++x) before += random.rgb_at(x, y)[0];
  RgbdFrame after_frame = random;
  mean_blur3(after_frame);
  // Interior sums of a box filter agree when the surrounding band is
  // included in the before-sum; use a conservative core-vs-halo check.
  double core_after = 0;
  for (int y = 5; y < 19; ++y)
    for (int x = 5; x < 19; ++x) core_after += after_frame.rgb_at(x, y)[0];
  double core_before = 0;
  for (int y = 5; y < 19; ++y)
    for (int x = 5; x < 19; ++x) core_before += random.rgb_at(x, y)[0];
  CHECK(core_after == doctest::Approx(core_before).epsilon(0.1));
}

TEST_CASE("ssim identities and reference agreement") {
  const RgbdFrame a = noise_frame(16, 16, 71);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

  // Mid-contrast inversion flips structure: negative score, matching the
  // independently coded formula.
  RgbdFrame mid(16, 16);
  RandomStream rng(73);
  for (size_t i = 0; i < mid.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) mid.rgb[i * 3 + c] = static_cast<float>(rng.uniform(0.3, 0.7));
  RgbdFrame inverted = mid;
  for (auto& v : inverted.rgb) v = 1.0f - v;
  const double score = ssim(mid, inverted);
  CHECK(score == doctest::Approx(ssim_reference(mid, inverted)).epsilon(1e-9));
  CHECK(score < 0.0);

  const RgbdFrame b = noise_frame(16, 16, 79);
  CHECK(ssim(a, b) == doctest::Approx(ssim_reference(a, b)).epsilon(1e-9));

  RgbdFrame small(4, 4);
  CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
  RgbdFrame other(16, 8);
  CHECK_THROWS_AS(ssim(a, other), std::invalid_argument);
}

TEST_CASE("noise monotonically decreases ssim") {
  const RgbdFrame base = noise_frame(32, 32, 83);
  double last = 1.0;
  for (double sigma : {0.01, 0.05, 0.1}) {
    RgbdFrame noisy = base;
    RandomStream rng(89);
    for (size_t i = 0; i < noisy.pixel_count(); ++i)
      for (int c = 0; c < 3; ++c)
        noisy.rgb[i * 3 + c] =
            static_cast<float>(clamp01(noisy.rgb[i * 3 + c] + sigma * rng.normal()));
    const double score = ssim(base, noisy);
    CHECK(score < last);
    last = score;
  }
}

TEST_CASE("background pool greedy selection") {
  RgbdFrame black(16, 16), white(16, 16);
  for (auto& v : white.rgb) v = 1.0f;

  std::vector<RgbdFrame> identical(5, black);
  CHECK(build_background_pool(identical, 0.9).size() == 1);

  std::vector<RgbdFrame> alternating;
  for (int i = 0; i < 6; ++i) alternating.push_back(i % 2 ? white : black);
  CHECK(build_background_pool(alternating, 0.5).size() == 6);

  // Pool size is non-increasing in the threshold.
  std::vector<RgbdFrame> mixed;
  for (int i = 0; i < 12; ++i) mixed.push_back(noise_frame(16, 16, 100 + i / 3));
  size_t last = mixed.size() + 1;
  for (double threshold : {0.99, 0.7, 0.3, -0.5}) {
    const size_t size = build_background_pool(mixed, threshold).size();
    CHECK(size <= last);
    last = size;
  }
}

TEST_CASE("normalization identities") {
  const ChannelStats identity;
  RgbdFrame frame = noise_frame(64, 64, 91);
  PixelBox box{32, 32, 40};
  const NormalizedInput raw = crop_resize_shift(frame, box, 16, 0.0);
  NormalizedInput standardized = raw;
  standardize(standardized, identity);
  CHECK(standardized.data == raw.data);

  PixelBox degenerate{32, 32, 3.5};
  CHECK_THROWS_AS(crop_resize_shift(frame, degenerate, 16, 0.0), TrackingLost);
}

TEST_CASE("depth shift centers the object") {
  // Flat quad at exactly z_center: shifted depth vanishes inside the box.
  CameraIntrinsics k;
  k.width = k.height = 64;
  k.fx = k.fy = 80;
  k.cx = k.cy = 32;
  TriMesh quad;
  quad.texture = Texture::flat(1, 1, 1);
  quad.vertices = {{-0.4, -0.4, 0}, {0.4, -0.4, 0}, {0.4, 0.4, 0}, {-0.4, 0.4, 0}};
  quad.normals = {{0, 0, -1}, {0, 0, -1}, {0, 0, -1}, {0, 0, -1}};
  quad.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  quad.triangles = {{0, 1, 2}, {0, 2, 3}};
  RigidPose pose;
  pose.translation = {0, 0, 0.8};
  const RgbdFrame frame = render_rgbd(quad, pose, k, Lighting::predicted_default());
  const NormalizedInput input = crop_resize_shift(frame, PixelBox{32, 32, 20}, 8, 0.8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(std::abs(input.at(y, x, 3)) < 1e-4);
}

TEST_CASE("normalization is scale invariant across depth") {
  const TriMesh toy = make_toy_mesh();
  CameraIntrinsics k;
  k.width = 320;
  k.height = 320;
  k.fx = k.fy = 228;
  k.cx = k.cy = 160;
  RandomStream rng(97);
  RigidPose pose = sample_observed_pose(rng, 0.5, 0.500001);

  auto normalized_at = [&](double z) {
    RigidPose p = pose;
    p.translation.z = z;
    const RgbdFrame frame = render_rgbd(toy, p, k, Lighting::predicted_default());
    const PixelBox box = projected_bbox(toy, p, k, 0.15);
    return crop_resize_shift(frame, box, 100, z);
  };
  const NormalizedInput near = normalized_at(0.5);
  const NormalizedInput far = normalized_at(1.0);
  double mean_abs = 0;
  for (size_t i = 0; i < near.data.size(); ++i)
    mean_abs += std::abs(double(near.data[i]) - far.data[i]);
  mean_abs /= static_cast<double>(near.data.size());
  CHECK(mean_abs < 0.05);
}

TEST_CASE("channel statistics") {
  StatsAccumulator constant_acc;
  NormalizedInput flat(8);
  std::fill(flat.data.begin(), flat.data.end(), 0.5f);
  for (int i = 0; i < 120; ++i) constant_acc.add(flat);
  CHECK_THROWS_AS(constant_acc.finalize(), std::invalid_argument);

  StatsAccumulator small_acc;
  small_acc.add(flat);
  CHECK_THROWS_AS(small_acc.finalize(), std::invalid_argument);

  // Restandardizing with own statistics yields mean 0, std 1; order of
  // accumulation does not change the result beyond float error.
  std::vector<NormalizedInput> inputs;
  RandomStream rng(101);
  for (int i = 0; i < 150; ++i) {
    NormalizedInput input(8);
    for (auto& v : input.data) v = static_cast<float>(rng.uniform(-1, 3));
    inputs.push_back(std::move(input));
  }
  StatsAccumulator acc, reversed;
  for (const auto& input : inputs) acc.add(input);
  for (auto it = inputs.rbegin(); it != inputs.rend(); ++it) reversed.add(*it);
  const ChannelStats stats = acc.finalize();
  const ChannelStats rstats = reversed.finalize();
  for (int c = 0; c < 4; ++c) {
    CHECK(stats.mean[c] == doctest::Approx(rstats.mean[c]).epsilon(1e-9));
    CHECK(stats.stddev[c] == doctest::Approx(rstats.stddev[c]).epsilon(1e-9));
  }
  double sum = 0, sum_sq = 0;
  size_t n = 0;
  for (auto& input : inputs) {
    standardize(input, stats);
    for (size_t i = 0; i < input.data.size(); i += 4) {
      sum += input.data[i];
      sum_sq += input.data[i] * input.data[i];
      ++n;
    }
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 1e-3);
  CHECK(std::sqrt(sum_sq / n - mean * mean) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("half precision roundtrip") {
  RandomStream rng(103);
  for (int i = 0; i < 20000; ++i) {
    const float x = static_cast<float>(rng.uniform(-8, 8));
    const float back = half_to_float(float_to_half(x));
    CHECK(std::abs(back - x) <= std::max(0.0009765625, std::abs(x) * 0.0009765625));
  }
  CHECK(half_to_float(float_to_half(0.0f)) == 0.0f);
  CHECK(half_to_float(float_to_half(1.0f)) == 1.0f);
  CHECK(half_to_float(float_to_half(-2.5f)) == -2.5f);
}

TEST_CASE("sample pair generation") {
  const TriMesh toy = make_toy_mesh();
  RandomStream orng(107);
  const TriMesh occ = make_ellipsoid(0.05, 0.075, 0.04, 1, 0.25, orng);
  CameraIntrinsics k;
  k.width = k.height = 96;
  k.fx = k.fy = 110;
  k.cx = k.cy = 48;
  std::vector<RgbdFrame> bgs;
  for (int i = 0; i < 3; ++i) bgs.push_back(noise_frame(96, 96, 200 + i));
  for (auto& bg : bgs)
    for (auto& d : bg.depth) d = static_cast<float>(2.0 + d);  // keep behind the object

  GenParams params = tiny_gen_params(&toy, &occ, &bgs, k);

  SUBCASE("no augmentation and zero delta leaves label zero") {
    GenParams quiet = params;
    quiet.augment.p_noise = quiet.augment.p_blur = quiet.augment.p_occluder = 0;
    quiet.augment.hue_lum_range = 0;
    quiet.t_max_mm = 1e-12;
    quiet.r_max_deg = 1e-12;
    SampleDebug debug;
    const SamplePair pair = generate_sample_pair(quiet, 1, 0, &debug);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(pair.y.y[i]) < 1e-9);
    const PoseErrors err = pose_error(debug.pose_obs, debug.pose_pred);
    CHECK(err.translation_mm < 1e-6);
    CHECK(err.rotation_deg < 1e-6);
  }

  SUBCASE("label is consistent with the stored poses") {
    for (uint64_t idx = 0; idx < 50; ++idx) {
      SampleDebug debug;
      const SamplePair pair = generate_sample_pair(params, 2, idx, &debug);
      // delta maps p_pred to p_obs in the camera frame.
      const Mat3 r_delta = debug.pose_obs.rotation * debug.pose_pred.rotation.transposed();
      const auto euler = matrix_to_euler(r_delta);
      PoseDelta rebuilt;
      rebuilt.r_deg = euler;
      const Vec3 dt = (debug.pose_obs.translation - debug.pose_pred.translation) * 1000.0;
      rebuilt.t_mm = {dt.x, dt.y, dt.z};
      const Label6 y = encode_label(rebuilt, params.t_max_mm, params.r_max_deg);
      for (int i = 0; i < 6; ++i) CHECK(std::abs(y.y[i] - pair.y.y[i]) < 1e-9);
    }
  }

  SUBCASE("augmentations never alter the label") {
    GenParams loud = params;
    loud.augment.p_noise = loud.augment.p_blur = loud.augment.p_occluder = 1.0;
    GenParams quiet = params;
    quiet.augment.p_noise = quiet.augment.p_blur = quiet.augment.p_occluder = 0.0;
    for (uint64_t idx = 0; idx < 20; ++idx) {
      const SamplePair a = generate_sample_pair(loud, 3, idx);
      const SamplePair b = generate_sample_pair(quiet, 3, idx);
      for (int i = 0; i < 6; ++i) CHECK(a.y.y[i] == b.y.y[i]);
    }
  }

  SUBCASE("predicted frame contains the object alone") {
    SampleDebug debug;
    generate_sample_pair(params, 4, 1, &debug);
    const RgbdFrame reference =
        render_rgbd(toy, debug.pose_pred, k, Lighting::predicted_default());
    CHECK(debug.frame_pred.depth == reference.depth);
    CHECK(debug.frame_pred.rgb == reference.rgb);
  }

  SUBCASE("augmentation application rates match the schedule") {
    int occl = 0, blur = 0, noise = 0;
    const int n = 3000;
    for (int idx = 0; idx < n; ++idx) {
      SampleDebug debug;
      generate_sample_pair(params, 5, idx, &debug);
      occl += debug.flags.occluder;
      blur += debug.flags.blur;
      noise += debug.flags.noise;
    }
    CHECK(std::abs(occl / double(n) - 0.60) < 0.03);
    CHECK(std::abs(blur / double(n) - 0.40) < 0.03);
    CHECK(std::abs(noise / double(n) - 0.95) < 0.02);
  }
}

TEST_CASE("dataset container roundtrip and layout") {
  const int side = 12;
  const auto path = (std::filesystem::temp_directory_path() / "dt6d_test_dataset.bin").string();
  DatasetHeader header;
  header.side = side;
  header.count = 100;
  header.seed = 42;
  header.stats.mean = {0.1, 0.2, 0.3, 0.4};
  header.stats.stddev = {1, 2, 3, 4};

  RandomStream rng(109);
  std::vector<SamplePair> originals;
  {
    DatasetWriter writer(path, header);
    for (int i = 0; i < 100; ++i) {
      SamplePair s;
      s.x_pred = NormalizedInput(side);
      s.x_obs = NormalizedInput(side);
      for (auto& v : s.x_pred.data) v = static_cast<float>(rng.uniform(-3, 3));
      for (auto& v : s.x_obs.data) v = static_cast<float>(rng.uniform(-3, 3));
      for (auto& y : s.y.y) y = rng.uniform(-1, 1);
      writer.append(s);
      originals.push_back(std::move(s));
    }
    writer.close();
  }

  CHECK(std::filesystem::file_size(path) ==
        DatasetWriter::header_bytes() + 100 * DatasetWriter::record_stride(side));

  const Dataset ds = Dataset::open(path);
  CHECK(ds.size() == 100);
  CHECK(ds.header().stats.mean[2] == 0.3);
  for (size_t i = 0; i < 100; ++i) {
    const SamplePair back = ds.sample(i);
    for (int j = 0; j < 6; ++j)
      CHECK(static_cast<float>(back.y.y[j]) == static_cast<float>(originals[i].y.y[j]));
    for (size_t v = 0; v < back.x_pred.data.size(); ++v) {
      const double x = originals[i].x_pred.data[v];
      CHECK(std::abs(back.x_pred.data[v] - x) <= std::max(0.0009765625, std::abs(x) * 0.0009765625));
    }
  }

  // Corrupt the magic: typed format error.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(Dataset::open(path), FormatError);
}

TEST_CASE("validation split is deterministic and near a quarter") {
  size_t val = 0;
  const size_t n = 20000;
  for (size_t i = 0; i < n; ++i) val += Dataset::validation_split(i);
  CHECK(std::abs(val / double(n) - 0.25) < 0.02);
  for (size_t i = 0; i < 100; ++i)
    CHECK(Dataset::validation_split(i) == Dataset::validation_split(i));
}

TEST_CASE("generated dataset is byte-identical across worker counts") {
  const TriMesh toy = make_toy_mesh();
  RandomStream orng(113);
  const TriMesh occ = make_ellipsoid(0.05, 0.075, 0.04, 1, 0.25, orng);
  CameraIntrinsics k;
  k.width = k.height = 64;
  k.fx = k.fy = 72;
  k.cx = k.cy = 32;
  std::vector<RgbdFrame> bgs{noise_frame(64, 64, 300), noise_frame(64, 64, 301)};
  GenParams params = tiny_gen_params(&toy, &occ, &bgs, k);
  params.input_side = 24;

  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "dt6d_ds_w1.bin").string();
  const std::string p4 = (dir / "dt6d_ds_w4.bin").string();
  std::filesystem::remove(p1);
  std::filesystem::remove(p4);
  generate_dataset(params, 77, 128, 100, p1, 1);
  generate_dataset(params, 77, 128, 100, p4, 4);

  std::ifstream f1(p1, std::ios::binary), f4(p4, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b4((std::istreambuf_iterator<char>(f4)), std::istreambuf_iterator<char>());
  CHECK(b1.size() == b4.size());
  CHECK(b1 == b4);
}

}  // TEST_SUITE
