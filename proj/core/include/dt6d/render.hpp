#pragma once

#include "dt6d/image.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/pose.hpp"

namespace dt6d {

/// Ambient plus one directional white light. `direction` points from the
/// scene toward the light source, in camera coordinates (camera frame is
/// y-down, so the default downward-shining light has direction (0,-1,0)).
struct Lighting {
  double ambient = 0.65;
  double directional = 0.4;
  Vec3 direction{0, -1, 0};

  /// Fixed lighting used for every predicted frame.
  static Lighting predicted_default() { return {}; }

  /// Observed-frame lighting: direction uniform on the sphere.
  static Lighting random_observed(RandomStream& rng) {
    Lighting l;
    l.direction = rng.unit_sphere();
    return l;
  }
};

inline constexpr double kNearPlane = 0.05;  // meters
inline constexpr double kFarPlane = 10.0;

/// Square pixel-space crop box; may extend beyond the frame bounds (the
/// cropper zero-pads).
struct PixelBox {
  double center_u = 0;
  double center_v = 0;
  double side = 0;
};

/// Deterministic z-buffered render: perspective projection, top-left fill
/// rule, perspective-correct nearest-texel sampling, Lambertian shading
/// clamped to 1, no back-face culling. Uncovered pixels are RGB 0 / depth 0.
RgbdFrame render_rgbd(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                      const Lighting& light);

/// Depth-keyed overlay: fg wins where it has data and is strictly closer
/// (or bg has no data). Serves background compositing and occluders alike.
RgbdFrame composite_over(const RgbdFrame& fg, const RgbdFrame& bg);

/// Square box around the projected bounding sphere:
/// side = (1+margin) * 2 * radius * fx / z_center, centered on the projected
/// object origin. Throws TrackingLost when the center is behind the near plane.
PixelBox projected_bbox(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                        double margin = 0.15);

}  // namespace dt6d
