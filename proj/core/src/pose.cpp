#include "dt6d/pose.hpp"

#include <cmath>
#include <stdexcept>

#include "dt6d/errors.hpp"

namespace dt6d {

namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return r;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

}  // namespace

bool RigidPose::is_valid(double tol) const {
  const Mat3 rtr = rotation.transposed() * rotation;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double want = r == c ? 1.0 : 0.0;
      if (std::abs(rtr(r, c) - want) > tol) return false;
    }
  if (std::abs(rotation.det() - 1.0) > tol) return false;
  return std::isfinite(translation.x) && std::isfinite(translation.y) && std::isfinite(translation.z);
}

CameraIntrinsics CameraIntrinsics::kinect_like(int width, int height) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  const double scale = static_cast<double>(width) / 512.0;
  k.fx = 365.0 * scale;
  k.fy = 365.0 * scale;
  k.cx = width / 2.0;
  k.cy = height / 2.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (fx <= 0 || fy <= 0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: dimensions must be positive");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height)
    throw std::invalid_argument("intrinsics: principal point outside image");
}

Mat3 euler_to_matrix(double rx_deg, double ry_deg, double rz_deg) {
  const Mat3 active = rot_x(deg_to_rad(rx_deg)) * rot_y(deg_to_rad(ry_deg)) * rot_z(deg_to_rad(rz_deg));
  return active.transposed();
}

std::array<double, 3> matrix_to_euler(const Mat3& r) {
  // Inverts the transposed X*Y*Z composition: r(2,0)=sin(b),
  // r(2,1)=-sin(a)cos(b), r(2,2)=cos(a)cos(b), r(1,0)=-cos(b)sin(c),
  // r(0,0)=cos(b)cos(c).
  const double sb = clamp(r(2, 0), -1.0, 1.0);
  const double cb = std::sqrt(r(2, 1) * r(2, 1) + r(2, 2) * r(2, 2));
  double a, b, c;
  b = std::atan2(sb, cb);
  if (cb < 1e-9) {  // gimbal lock: canonicalize with c = 0
    c = 0.0;
    a = std::atan2(sb > 0 ? r(0, 1) : -r(0, 1), r(1, 1));
  } else {
    a = std::atan2(-r(2, 1), r(2, 2));
    c = std::atan2(-r(1, 0), r(0, 0));
  }
  return {rad_to_deg(a), rad_to_deg(b), rad_to_deg(c)};
}

RigidPose sample_observed_pose(RandomStream& rng, double radius_lo_m, double radius_hi_m) {
  if (!(radius_lo_m > 0) || !(radius_hi_m > radius_lo_m))
    throw std::invalid_argument("sample_observed_pose: need 0 < radius_lo < radius_hi");

  // Camera direction on the unit sphere around the object.
  const double theta = rng.uniform(-kPi, kPi);
  const double cosphi = 2.0 * rng.uniform() - 1.0;
  const double sinphi = std::sqrt(std::max(0.0, 1.0 - cosphi * cosphi));
  const Vec3 dir{sinphi * std::cos(theta), sinphi * std::sin(theta), cosphi};
  const double roll = rng.uniform(-kPi, kPi);
  const double radius = rng.uniform(radius_lo_m, radius_hi_m);

  const Vec3 forward = -dir;  // camera looks at the object origin
  const Vec3 up_hint = std::abs(forward.z) < 0.999 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 x_axis = up_hint.cross(forward).normalized();
  const Vec3 y_axis = forward.cross(x_axis);

  Mat3 world_to_cam;
  world_to_cam.m = {x_axis.x, x_axis.y, x_axis.z,
                    y_axis.x, y_axis.y, y_axis.z,
                    forward.x, forward.y, forward.z};

  RigidPose pose;
  pose.rotation = rot_z(roll) * world_to_cam;
  pose.translation = {0, 0, radius};
  return pose;
}

PoseDelta sample_pose_delta(RandomStream& rng, double t_max_mm, double r_max_deg) {
  if (t_max_mm < 0 || r_max_deg < 0)
    throw std::invalid_argument("sample_pose_delta: ranges must be non-negative");
  PoseDelta d;
  for (auto& t : d.t_mm) t = rng.uniform(-t_max_mm, t_max_mm);
  for (auto& r : d.r_deg) r = rng.uniform(-r_max_deg, r_max_deg);
  return d;
}

RigidPose apply_delta(const RigidPose& p, const PoseDelta& d) {
  RigidPose out;
  out.rotation = euler_to_matrix(d.r_deg[0], d.r_deg[1], d.r_deg[2]) * p.rotation;
  out.translation = p.translation + Vec3{d.t_mm[0], d.t_mm[1], d.t_mm[2]} / 1000.0;
  return out;
}

PoseDelta invert_delta(const PoseDelta& d) {
  PoseDelta inv;
  const Mat3 r = euler_to_matrix(d.r_deg[0], d.r_deg[1], d.r_deg[2]);
  inv.r_deg = matrix_to_euler(r.transposed());
  for (int i = 0; i < 3; ++i) inv.t_mm[i] = -d.t_mm[i];
  return inv;
}

Label6 encode_label(const PoseDelta& d, double t_max_mm, double r_max_deg) {
  Label6 y;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d.t_mm[i]) > t_max_mm * (1 + 1e-12))
      throw std::out_of_range("encode_label: translation component exceeds range");
    if (std::abs(d.r_deg[i]) > r_max_deg * (1 + 1e-12))
      throw std::out_of_range("encode_label: rotation component exceeds range");
    y.y[i] = d.t_mm[i] / t_max_mm;
    y.y[i + 3] = d.r_deg[i] / r_max_deg;
  }
  return y;
}

PoseDelta decode_label(const Label6& y, double t_max_mm, double r_max_deg) {
  PoseDelta d;
  for (int i = 0; i < 3; ++i) {
    d.t_mm[i] = clamp(y.y[i], -1.0, 1.0) * t_max_mm;
    d.r_deg[i] = clamp(y.y[i + 3], -1.0, 1.0) * r_max_deg;
  }
  return d;
}

PoseErrors pose_error(const RigidPose& a, const RigidPose& b) {
  PoseErrors e;
  e.translation_mm = (a.translation - b.translation).norm() * 1000.0;
  const Mat3 rel = a.rotation.transposed() * b.rotation;
  const double arg = clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  e.rotation_deg = rad_to_deg(std::acos(arg));
  // The object origin is its center, so the center-point displacement equals
  // the translation difference.
  e.center_distance_mm = e.translation_mm;
  return e;
}

}  // namespace dt6d
