#pragma once

#include <array>

#include "dt6d/math.hpp"
#include "dt6d/rand.hpp"

namespace dt6d {

/// Rigid object-in-camera transform: p_cam = rotation * p_obj + translation.
/// Translation in meters, camera frame is x right / y down / z forward.
struct RigidPose {
  Mat3 rotation;
  Vec3 translation;

  bool is_valid(double tol = 1e-9) const;
};

/// Small corrective motion expressed in the camera frame: translation in
/// millimeters, rotation as Euler angles in degrees. Internal computation
/// converts to meters/radians at the boundary.
struct PoseDelta {
  std::array<double, 3> t_mm{0, 0, 0};
  std::array<double, 3> r_deg{0, 0, 0};
};

/// Network-facing 6-vector, each component in [-1, 1].
struct Label6 {
  std::array<double, 6> y{0, 0, 0, 0, 0, 0};
};

struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Kinect-v2-like defaults (fx = fy = 365 at 512x424) scaled to the
  /// requested resolution.
  static CameraIntrinsics kinect_like(int width, int height);

  void validate() const;
};

/// Default training ranges for the pose delta sampler and label codec.
inline constexpr double kDefaultDeltaTransMm = 20.0;
inline constexpr double kDefaultDeltaRotDeg = 10.0;

struct PoseErrors {
  double translation_mm = 0;
  double rotation_deg = 0;
  double center_distance_mm = 0;
};

/// Euler convention used everywhere in this codebase: intrinsic X-then-Y-
/// then-Z, matrices in coordinate-transform form, so euler_to_matrix(0,90,0)
/// maps +z onto -x. Roundtrips are exact away from gimbal lock (|beta|<89 deg).
Mat3 euler_to_matrix(double rx_deg, double ry_deg, double rz_deg);

/// Inverse of euler_to_matrix. At gimbal lock (|beta| = 90 deg) the answer
/// is canonicalized with gamma = 0.
std::array<double, 3> matrix_to_euler(const Mat3& r);

/// Observed-pose sampler: camera direction uniform on the sphere
/// (theta ~ U(-180,180), phi = acos(2x-1)), uniform roll about the optical
/// axis, distance r ~ U(radius_range). The returned pose has the object
/// centered on the optical axis at depth r.
RigidPose sample_observed_pose(RandomStream& rng, double radius_lo_m, double radius_hi_m);

/// Six i.i.d. uniform components: |t| <= t_max_mm, |r| <= r_max_deg.
PoseDelta sample_pose_delta(RandomStream& rng, double t_max_mm = kDefaultDeltaTransMm,
                            double r_max_deg = kDefaultDeltaRotDeg);

/// Applies a delta in the camera frame: rotate about the object center by
/// the delta rotation, then translate.
RigidPose apply_delta(const RigidPose& p, const PoseDelta& d);

/// Delta such that apply_delta(apply_delta(p, d), invert_delta(d)) == p.
PoseDelta invert_delta(const PoseDelta& d);

/// Linear scaling of a pose delta into [-1,1]^6. Throws std::out_of_range
/// if any component exceeds the range.
Label6 encode_label(const PoseDelta& d, double t_max_mm = kDefaultDeltaTransMm,
                    double r_max_deg = kDefaultDeltaRotDeg);

/// Exact inverse of encode_label; inputs outside [-1,1] are clamped to the
/// boundary (the tracker path only ever decodes).
PoseDelta decode_label(const Label6& y, double t_max_mm = kDefaultDeltaTransMm,
                       double r_max_deg = kDefaultDeltaRotDeg);

/// Translation error (mm), geodesic rotation angle (deg), and center
/// distance (mm, displacement of the object-origin point).
PoseErrors pose_error(const RigidPose& a, const RigidPose& b);

}  // namespace dt6d
