#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dt6d/check/oracles.hpp"
#include "dt6d/errors.hpp"
#include "dt6d/image.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/render.hpp"

using namespace dt6d;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream f(path);
  f << content;
  return path;
}

constexpr const char* kCubeObj = R"(# unit cube
v -0.5 -0.5 -0.5
v  0.5 -0.5 -0.5
v  0.5  0.5 -0.5
v -0.5  0.5 -0.5
v -0.5 -0.5  0.5
v  0.5 -0.5  0.5
v  0.5  0.5  0.5
v -0.5  0.5  0.5
f 1 2 3
f 1 3 4
f 5 7 6
f 5 8 7
f 1 5 6
f 1 6 2
f 2 6 7
f 2 7 3
f 3 7 8
f 3 8 4
f 4 8 5
f 4 5 1
)";

TriMesh camera_facing_quad(double half, double z_local, std::array<float, 3> color) {
  TriMesh quad;
  quad.texture = Texture::flat(color[0], color[1], color[2]);
  quad.vertices = {{-half, -half, z_local}, {half, -half, z_local},
                   {half, half, z_local}, {-half, half, z_local}};
  quad.normals = {{0, 0, -1}, {0, 0, -1}, {0, 0, -1}, {0, 0, -1}};
  quad.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  quad.triangles = {{0, 1, 2}, {0, 2, 3}};
  quad.radius = half * 1.5;
  return quad;
}

}  // namespace

TEST_SUITE("raster") {

TEST_CASE("obj loader handles the cube") {
  const std::string path = write_temp("dt6d_cube.obj", kCubeObj);
  const TriMesh mesh = load_mesh(path);
  CHECK(mesh.triangles.size() == 12);
  CHECK(mesh.radius == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("obj loader triangulates quads") {
  const std::string path = write_temp("dt6d_quad.obj",
                                      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK(load_mesh(path).triangles.size() == 2);
}

TEST_CASE("obj loader names the offending line") {
  const std::string path = write_temp("dt6d_bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  try {
    load_mesh(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.obj"), FormatError);
  const std::string empty = write_temp("dt6d_empty.obj", "v 0 0 0\n");
  CHECK_THROWS_AS(load_mesh(empty), FormatError);
}

TEST_CASE("unit square projection depth and extent") {
  CameraIntrinsics k;
  k.width = k.height = 150;
  k.fx = k.fy = 300;
  k.cx = k.cy = 75;
  const TriMesh quad = camera_facing_quad(0.5, 0.0, {1, 1, 1});
  RigidPose pose;
  pose.translation = {0, 0, 1.0};
  const RgbdFrame frame = render_rgbd(quad, pose, k, Lighting::predicted_default());

  CHECK(frame.depth_at(75, 75) == doctest::Approx(1.0).epsilon(1e-3));
  // Half-extent 0.5 m at 1 m with f=300 projects to 300 px, clipping to the
  // whole 150 px frame.
  size_t covered = 0;
  for (size_t i = 0; i < frame.pixel_count(); ++i) covered += frame.depth[i] > 0;
  CHECK(covered == frame.pixel_count());
}

TEST_CASE("uncovered pixels are zero") {
  CameraIntrinsics k;
  k.width = k.height = 64;
  k.fx = k.fy = 80;
  k.cx = k.cy = 32;
  const TriMesh quad = camera_facing_quad(0.05, 0.0, {1, 0, 0});
  RigidPose pose;
  pose.translation = {0.2, 0.2, 1.0};  // off to a corner
  const RgbdFrame frame = render_rgbd(quad, pose, k, Lighting::predicted_default());
  CHECK(frame.depth_at(0, 0) == 0.0f);
  CHECK(frame.rgb_at(0, 0)[0] == 0.0f);

  RigidPose behind;
  behind.translation = {0, 0, -1.0};
  const RgbdFrame empty = render_rgbd(quad, behind, k, Lighting::predicted_default());
  for (size_t i = 0; i < empty.pixel_count(); ++i) CHECK(empty.depth[i] == 0.0f);
}

TEST_CASE("shading saturates at stated intensities") {
  CameraIntrinsics k;
  k.width = k.height = 32;
  k.fx = k.fy = 40;
  k.cx = k.cy = 16;
  const TriMesh quad = camera_facing_quad(0.5, 0.0, {1, 1, 1});
  RigidPose pose;
  pose.translation = {0, 0, 1.0};

  Lighting full;  // n = (0,0,-1) toward camera
  full.direction = {0, 0, -1};
  const RgbdFrame lit = render_rgbd(quad, pose, k, full);
  CHECK(lit.rgb_at(16, 16)[0] == doctest::Approx(1.0));  // min(1, 0.65+0.4)

  Lighting grazing;
  grazing.direction = {1, 0, 0};
  const RgbdFrame ambient_only = render_rgbd(quad, pose, k, grazing);
  CHECK(ambient_only.rgb_at(16, 16)[0] == doctest::Approx(0.65));
}

TEST_CASE("render is deterministic") {
  RandomStream rng(41);
  const TriMesh toy = make_toy_mesh();
  const CameraIntrinsics k = CameraIntrinsics::kinect_like(128, 106);
  const RigidPose pose = sample_observed_pose(rng, 0.5, 0.8);
  const RgbdFrame a = render_rgbd(toy, pose, k, Lighting::predicted_default());
  const RgbdFrame b = render_rgbd(toy, pose, k, Lighting::predicted_default());
  CHECK(a.rgb == b.rgb);
  CHECK(a.depth == b.depth);
}

TEST_CASE("rasterizer matches the raycast oracle on random scenes") {
  RandomStream rng(43);
  CameraIntrinsics k;
  k.width = k.height = 32;
  k.fx = k.fy = 40;
  k.cx = k.cy = 16;
  for (int scene = 0; scene < 5; ++scene) {
    TriMesh mesh;
    for (int t = 0; t < 2; ++t) {
      const int base = 3 * t;
      for (int i = 0; i < 3; ++i) {
        mesh.vertices.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3)});
        mesh.uvs.push_back({rng.uniform(), rng.uniform()});
      }
      mesh.triangles.push_back({base, base + 1, base + 2});
    }
    mesh.recompute_normals();
    mesh.texture = Texture::checkerboard(8, 2, {1, 0, 0}, {0, 0, 1});
    mesh.recompute_radius();
    RigidPose pose;
    pose.translation = {0, 0, rng.uniform(0.9, 1.4)};
    const Lighting light = Lighting::random_observed(rng);
    const RgbdFrame raster = render_rgbd(mesh, pose, k, light);
    const RgbdFrame cast = check::raycast_render(mesh, pose, k, light);
    double worst = 0;
    for (size_t i = 0; i < raster.pixel_count(); ++i) {
      worst = std::max(worst, std::abs(double(raster.depth[i]) - cast.depth[i]));
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(double(raster.rgb[i * 3 + c]) - cast.rgb[i * 3 + c]));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("composite rules") {
  RgbdFrame fg(4, 4), bg(4, 4);
  for (size_t i = 0; i < bg.pixel_count(); ++i) {
    bg.depth[i] = 1.0f;
    bg.rgb[i * 3] = 0.5f;
  }
  const RgbdFrame same = composite_over(fg, bg);  // fg empty
  CHECK(same.rgb == bg.rgb);
  CHECK(same.depth == bg.depth);

  fg.depth_at(1, 1) = 0.5f;
  fg.rgb_at(1, 1)[0] = 1.0f;
  const RgbdFrame out = composite_over(fg, bg);
  CHECK(out.depth_at(1, 1) == 0.5f);
  CHECK(out.rgb_at(1, 1)[0] == 1.0f);
  CHECK(out.depth_at(0, 0) == 1.0f);

  RgbdFrame wrong(3, 3);
  CHECK_THROWS_AS(composite_over(fg, wrong), std::invalid_argument);
}

TEST_CASE("composite associativity on tie-free random fields") {
  RandomStream rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    RgbdFrame f[3] = {RgbdFrame(6, 6), RgbdFrame(6, 6), RgbdFrame(6, 6)};
    for (auto& frame : f)
      for (size_t i = 0; i < frame.pixel_count(); ++i) {
        frame.depth[i] = rng.uniform() < 0.3 ? 0.0f : static_cast<float>(rng.uniform(0.1, 3.0));
        frame.rgb[i * 3] = static_cast<float>(rng.uniform());
      }
    const RgbdFrame left = composite_over(composite_over(f[0], f[1]), f[2]);
    const RgbdFrame right = composite_over(f[0], composite_over(f[1], f[2]));
    CHECK(left.depth == right.depth);
    CHECK(left.rgb == right.rgb);
  }
}

TEST_CASE("projected bbox formula and oracle") {
  CameraIntrinsics k;
  k.width = 400;
  k.height = 400;
  k.fx = k.fy = 300;
  k.cx = k.cy = 200;

  RandomStream rng(53);
  TriMesh ball = make_ellipsoid(0.075, 0.075, 0.075, 3, 0.0, rng);
  ball.radius = 0.075;
  RigidPose pose;
  pose.translation = {0, 0, 0.75};

  const PixelBox box = projected_bbox(ball, pose, k, 0.15);
  CHECK(box.side == doctest::Approx(69.0));
  CHECK(box.center_u == doctest::Approx(200.0));
  CHECK(box.center_v == doctest::Approx(200.0));

  // Per-vertex projection oracle: the margin-free box approximates the
  // actual projected extent to within 15%.
  double min_u = 1e9, max_u = -1e9;
  for (const auto& v : ball.vertices) {
    const Vec3 c = pose.rotation * v + pose.translation;
    const double u = k.fx * c.x / c.z + k.cx;
    min_u = std::min(min_u, u);
    max_u = std::max(max_u, u);
  }
  const PixelBox tight = projected_bbox(ball, pose, k, 0.0);
  CHECK(tight.side == doctest::Approx(max_u - min_u).epsilon(0.15));

  // Margin-free box bounds the rendered silhouette to within a pixel.
  const RgbdFrame frame = render_rgbd(ball, pose, k, Lighting::predicted_default());
  double sil_min = 1e9, sil_max = -1e9;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x)
      if (frame.depth_at(x, y) > 0) {
        sil_min = std::min(sil_min, double(x));
        sil_max = std::max(sil_max, double(x));
      }
  CHECK(sil_max - sil_min <= tight.side + 1.0);
  CHECK(sil_max - sil_min >= tight.side - 2.0);
}

TEST_CASE("bbox shrinks with depth") {
  const TriMesh toy = make_toy_mesh();
  const CameraIntrinsics k = CameraIntrinsics::kinect_like(256, 212);
  RigidPose pose;
  pose.translation = {0, 0, 1.0};
  const double s1 = projected_bbox(toy, pose, k).side;
  pose.translation.z = 1.1;
  const double s2 = projected_bbox(toy, pose, k).side;
  CHECK(std::abs(s2 - s1 / 1.1) < 1.0);

  pose.translation.z = -2.0;
  CHECK_THROWS_AS(projected_bbox(toy, pose, k), TrackingLost);
}

TEST_CASE("png color/depth pair roundtrip") {
  RandomStream rng(59);
  RgbdFrame frame(20, 14);
  for (size_t i = 0; i < frame.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) frame.rgb[i * 3 + c] = static_cast<float>(rng.uniform());
    frame.depth[i] = rng.uniform() < 0.2 ? 0.0f : static_cast<float>(rng.uniform(0.1, 5.0));
  }
  const auto dir = std::filesystem::temp_directory_path();
  const std::string color = (dir / "dt6d_t_color.png").string();
  const std::string depth = (dir / "dt6d_t_depth.png").string();
  write_color_png(frame, color);
  write_depth_png(frame, depth);
  const RgbdFrame back = read_rgbd_pngs(color, depth);
  REQUIRE(back.same_size(frame));
  double worst_rgb = 0, worst_depth = 0;
  for (size_t i = 0; i < frame.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c)
      worst_rgb = std::max(worst_rgb, std::abs(double(back.rgb[i * 3 + c]) - frame.rgb[i * 3 + c]));
    worst_depth = std::max(worst_depth, std::abs(double(back.depth[i]) - frame.depth[i]));
  }
  CHECK(worst_rgb <= 0.5 / 255.0 + 1e-6);
  CHECK(worst_depth <= 0.05e-3 + 1e-7);  // half of the 0.1 mm unit

  std::ofstream(color, std::ios::binary) << "not a png";
  CHECK_THROWS_AS(read_rgbd_pngs(color, depth), FormatError);
}

}  // TEST_SUITE
