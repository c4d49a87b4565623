#include "dt6d/background.hpp"

#include <algorithm>
#include <filesystem>

#include "dt6d/errors.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/render.hpp"
#include "dt6d/ssim.hpp"

namespace dt6d {

namespace {

Texture random_texture(RandomStream& rng) {
  auto color = [&rng]() -> std::array<float, 3> {
    return {static_cast<float>(rng.uniform(0.1, 0.95)), static_cast<float>(rng.uniform(0.1, 0.95)),
            static_cast<float>(rng.uniform(0.1, 0.95))};
  };
  if (rng.uniform() < 0.5) return Texture::checkerboard(32, 2 + static_cast<int>(rng.uniform_index(6)), color(), color());
  // Speckle texture.
  Texture t;
  t.width = t.height = 32;
  t.rgb.resize(32 * 32 * 3);
  const auto base = color();
  for (size_t i = 0; i < t.rgb.size() / 3; ++i) {
    const float jitter = static_cast<float>(rng.uniform(-0.25, 0.25));
    for (int c = 0; c < 3; ++c) t.rgb[i * 3 + c] = clamp(base[c] + jitter, 0.0f, 1.0f);
  }
  return t;
}

}  // namespace

RgbdFrame make_procedural_background(const CameraIntrinsics& k, RandomStream& rng) {
  const Lighting light = Lighting::random_observed(rng);
  RgbdFrame frame(k.width, k.height);

  // Back wall spanning the frustum at 3.5-5 m.
  {
    const double wall_z = rng.uniform(3.5, 5.0);
    const double half_w = wall_z * (k.width / (2.0 * k.fx)) * 1.3;
    const double half_h = wall_z * (k.height / (2.0 * k.fy)) * 1.3;
    TriMesh wall = make_box(half_w * 2, half_h * 2, 0.02, random_texture(rng));
    RigidPose pose{Mat3::identity(), {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), wall_z}};
    frame = composite_over(render_rgbd(wall, pose, k, light), frame);
  }

  // Floor plane, tilted into view.
  {
    TriMesh floor = make_box(8.0, 0.02, 8.0, random_texture(rng));
    RigidPose pose;
    pose.rotation = euler_to_matrix(rng.uniform(-12, 0), 0, 0);
    pose.translation = {0, rng.uniform(0.5, 1.0), rng.uniform(2.0, 3.0)};
    frame = composite_over(render_rgbd(floor, pose, k, light), frame);
  }

  // Clutter boxes between 0.5 and 3 m, kept off the image center where the
  // tracked object composites in.
  const int boxes = 2 + static_cast<int>(rng.uniform_index(4));
  for (int i = 0; i < boxes; ++i) {
    TriMesh box = make_box(rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5),
                           random_texture(rng));
    const double z = rng.uniform(1.2, 3.0);
    const double lateral = rng.uniform(0.35, 0.9) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    RigidPose pose;
    pose.rotation = euler_to_matrix(rng.uniform(-180, 180), rng.uniform(-180, 180), rng.uniform(-180, 180));
    pose.translation = {lateral * z * (k.width / (2.0 * k.fx)),
                        rng.uniform(-0.6, 0.6) * z * (k.height / (2.0 * k.fy)), z};
    frame = composite_over(render_rgbd(box, pose, k, light), frame);
  }
  return frame;
}

std::vector<RgbdFrame> build_background_pool(const std::vector<RgbdFrame>& frames,
                                             double ssim_threshold) {
  std::vector<RgbdFrame> pool;
  if (frames.empty()) return pool;
  pool.push_back(frames[0]);
  size_t reference = 0;
  for (size_t i = 1; i < frames.size(); ++i) {
    if (ssim(frames[reference], frames[i]) < ssim_threshold) {
      pool.push_back(frames[i]);
      reference = i;
    }
  }
  return pool;
}

std::vector<RgbdFrame> make_procedural_pool(const CameraIntrinsics& k, int count,
                                            double ssim_threshold, uint64_t seed) {
  std::vector<RgbdFrame> frames;
  frames.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    RandomStream rng = RandomStream::substream(seed, static_cast<uint64_t>(i), "background");
    frames.push_back(make_procedural_background(k, rng));
  }
  return build_background_pool(frames, ssim_threshold);
}

std::vector<RgbdFrame> import_background_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> colors;
  if (!fs::is_directory(dir)) throw FormatError("background import: not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("color_", 0) == 0 && entry.path().extension() == ".png")
      colors.push_back(entry.path().string());
  }
  std::sort(colors.begin(), colors.end());
  if (colors.empty()) throw FormatError("background import: no color_*.png files in " + dir);

  std::vector<RgbdFrame> frames;
  frames.reserve(colors.size());
  for (const auto& color_path : colors) {
    std::string depth_path = color_path;
    const size_t pos = depth_path.rfind("color_");
    depth_path.replace(pos, 6, "depth_");
    if (!fs::exists(depth_path))
      throw FormatError("background import: missing depth pair for " + color_path);
    frames.push_back(read_rgbd_pngs(color_path, depth_path));
  }
  return frames;
}

}  // namespace dt6d
