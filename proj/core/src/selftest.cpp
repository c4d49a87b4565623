#include "dt6d/check/selftest.hpp"

#include <cmath>
#include <cstdio>

#include "dt6d/check/gradcheck.hpp"
#include "dt6d/check/oracles.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/pose.hpp"
#include "dt6d/render.hpp"
#include "dt6d/ssim.hpp"

namespace dt6d::check {

namespace {

std::string format_err(double value, double bound) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "max rel err %.3g (bound %.3g)", value, bound);
  return buf;
}

CheckResult gradient_block(const std::string& name, RandomStream& rng, int repeats,
                           GradCheckReport (*fn)(RandomStream&)) {
  double worst = 0;
  size_t checked = 0;
  for (int i = 0; i < repeats; ++i) {
    const GradCheckReport rep = fn(rng);
    worst = std::max(worst, rep.max_rel_err);
    checked += rep.checked;
  }
  CheckResult result;
  result.name = name;
  result.pass = worst < 1e-4;
  result.detail = format_err(worst, 1e-4) + ", " + std::to_string(checked) + " partials";
  return result;
}

TriMesh random_two_triangle_mesh(RandomStream& rng) {
  TriMesh mesh;
  for (int t = 0; t < 2; ++t) {
    const int base = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < 3; ++i) {
      mesh.vertices.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3)});
      mesh.uvs.push_back({rng.uniform(), rng.uniform()});
    }
    mesh.triangles.push_back({base, base + 1, base + 2});
  }
  mesh.recompute_normals();
  mesh.texture = Texture::checkerboard(16, 4, {0.9f, 0.4f, 0.2f}, {0.2f, 0.5f, 0.9f});
  mesh.recompute_radius();
  return mesh;
}

}  // namespace

std::vector<CheckResult> run_selftest(uint64_t seed) {
  std::vector<CheckResult> results;
  RandomStream rng = RandomStream::substream(seed, 0, "selftest");

  results.push_back(gradient_block("grad conv2d", rng, 20, check_conv_gradients));
  results.push_back(gradient_block("grad dense", rng, 20, check_dense_gradients));
  results.push_back(gradient_block("grad batchnorm", rng, 20, check_batchnorm_gradients));
  results.push_back(gradient_block("grad maxpool", rng, 20, check_maxpool_gradients));
  results.push_back(gradient_block("grad elu", rng, 20, check_elu_gradients));
  results.push_back(gradient_block("grad tanh", rng, 20, check_tanh_gradients));
  results.push_back(gradient_block("grad dropout", rng, 20, check_dropout_gradients));
  results.push_back(gradient_block("grad composed network", rng, 20, check_network_gradients));
  {
    const GradCheckReport rep = check_full_stack_gradients(seed);
    results.push_back({"grad full layer stack", rep.max_rel_err < 1e-4,
                       format_err(rep.max_rel_err, 1e-4)});
  }

  {  // Euler matrices against quaternion composition.
    double worst = 0;
    for (int i = 0; i < 500; ++i) {
      const double a = rng.uniform(-180, 180), b = rng.uniform(-180, 180), c = rng.uniform(-180, 180);
      const Mat3 m = euler_to_matrix(a, b, c);
      const Mat3 q = euler_matrix_quaternion_oracle(a, b, c);
      for (int j = 0; j < 9; ++j) worst = std::max(worst, std::abs(m.m[j] - q.m[j]));
    }
    results.push_back({"euler vs quaternion oracle", worst < 1e-9, format_err(worst, 1e-9)});
  }

  {  // Label codec roundtrip.
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const PoseDelta d = sample_pose_delta(rng);
      const PoseDelta back = decode_label(encode_label(d));
      for (int j = 0; j < 3; ++j) {
        worst = std::max(worst, std::abs(back.t_mm[j] - d.t_mm[j]));
        worst = std::max(worst, std::abs(back.r_deg[j] - d.r_deg[j]));
      }
    }
    results.push_back({"label codec roundtrip", worst < 1e-12, format_err(worst, 1e-12)});
  }

  {  // Delta group law.
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      RigidPose p = sample_observed_pose(rng, 0.4, 1.5);
      const PoseDelta d = sample_pose_delta(rng);
      const RigidPose back = apply_delta(apply_delta(p, d), invert_delta(d));
      for (int j = 0; j < 9; ++j)
        worst = std::max(worst, std::abs(back.rotation.m[j] - p.rotation.m[j]));
      worst = std::max(worst, (back.translation - p.translation).norm());
    }
    results.push_back({"delta apply/invert roundtrip", worst < 1e-9, format_err(worst, 1e-9)});
  }

  // The two sampler checks run at a pinned seed: an alpha = 0.01 test
  // rejects a matching fraction of honest seeds by construction, so a
  // seed-varying selftest would flake. The gradient and oracle checks
  // above keep drawing from the caller's seed.
  constexpr uint64_t kStatSeed = 20250810;

  {  // Sphere sampler statistics.
    const size_t n = 100000;
    std::vector<double> cosphi;
    cosphi.reserve(n);
    Vec3 mean_dir{0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
      RandomStream draw = RandomStream::substream(kStatSeed, i, "sphere");
      const RigidPose p = sample_observed_pose(draw, 0.4, 1.5);
      // Camera direction in object coordinates: rotate camera -z? The
      // sampler places the object along +z in camera space; recover the
      // direction as R^T * (0,0,1).
      const Vec3 d = p.rotation.transposed() * Vec3{0, 0, 1};
      mean_dir += d;
      cosphi.push_back(d.z);
    }
    mean_dir = mean_dir / static_cast<double>(n);
    const double ks = ks_statistic_uniform(cosphi, -1.0, 1.0);
    const bool pass = ks < ks_critical_alpha01(n) && mean_dir.norm() < 0.01;
    char buf[128];
    std::snprintf(buf, sizeof buf, "KS %.4g (crit %.4g), mean dir norm %.4g", ks,
                  ks_critical_alpha01(n), mean_dir.norm());
    results.push_back({"sphere sampler uniformity", pass, buf});
  }

  {  // Delta sampler flatness, per component.
    const size_t n = 100000;
    std::vector<std::vector<double>> comps(6);
    for (size_t i = 0; i < n; ++i) {
      RandomStream draw = RandomStream::substream(kStatSeed, i, "delta");
      const PoseDelta d = sample_pose_delta(draw);
      for (int j = 0; j < 3; ++j) {
        comps[j].push_back(d.t_mm[j]);
        comps[j + 3].push_back(d.r_deg[j]);
      }
    }
    double worst = 0;
    for (int j = 0; j < 6; ++j) {
      const double hi = j < 3 ? kDefaultDeltaTransMm : kDefaultDeltaRotDeg;
      worst = std::max(worst, chi2_statistic_uniform(comps[j], -hi, hi, 10));
    }
    const double crit = chi2_critical_alpha01(9);
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst chi2 %.4g (crit %.4g)", worst, crit);
    results.push_back({"delta sampler flatness", worst < crit, buf});
  }

  {  // Rasterizer vs ray-cast oracle on random two-triangle scenes.
    CameraIntrinsics k;
    k.width = k.height = 32;
    k.fx = k.fy = 40;
    k.cx = k.cy = 16;
    double worst_depth = 0, worst_color = 0;
    for (int scene = 0; scene < 20; ++scene) {
      const TriMesh mesh = random_two_triangle_mesh(rng);
      RigidPose pose;
      pose.translation = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(0.8, 1.6)};
      Lighting light = Lighting::random_observed(rng);
      const RgbdFrame raster = render_rgbd(mesh, pose, k, light);
      const RgbdFrame cast = raycast_render(mesh, pose, k, light);
      for (size_t i = 0; i < raster.pixel_count(); ++i) {
        worst_depth = std::max(worst_depth, std::abs(static_cast<double>(raster.depth[i]) - cast.depth[i]));
        for (int c = 0; c < 3; ++c)
          worst_color = std::max(worst_color,
                                 std::abs(static_cast<double>(raster.rgb[i * 3 + c]) - cast.rgb[i * 3 + c]));
      }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst depth %.3g m, worst color %.3g", worst_depth, worst_color);
    results.push_back({"rasterizer vs raycast oracle", worst_depth < 1e-3 && worst_color < 1e-3, buf});
  }

  {  // Compositing equals the per-pixel min-depth oracle.
    bool pass = true;
    for (int trial = 0; trial < 50 && pass; ++trial) {
      RgbdFrame a(8, 8), b(8, 8);
      for (size_t i = 0; i < a.pixel_count(); ++i) {
        a.depth[i] = rng.uniform() < 0.3 ? 0.0f : static_cast<float>(rng.uniform(0.1, 2.0));
        b.depth[i] = rng.uniform() < 0.3 ? 0.0f : static_cast<float>(rng.uniform(0.1, 2.0));
        for (int c = 0; c < 3; ++c) {
          a.rgb[i * 3 + c] = static_cast<float>(rng.uniform());
          b.rgb[i * 3 + c] = static_cast<float>(rng.uniform());
        }
      }
      const RgbdFrame out = composite_over(a, b);
      for (size_t i = 0; i < out.pixel_count() && pass; ++i) {
        const float az = a.depth[i], bz = b.depth[i];
        float want;
        if (az > 0 && bz > 0) want = std::min(az, bz);
        else want = az > 0 ? az : bz;
        if (out.depth[i] != want) pass = false;
      }
    }
    results.push_back({"composite min-depth oracle", pass, pass ? "exact" : "mismatch"});
  }

  return results;
}

}  // namespace dt6d::check
