#include "dt6d/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dt6d/errors.hpp"

namespace dt6d {

namespace {

struct ClipVertex {
  Vec3 pos;  // camera space
  Vec3 normal;
  Vec2 uv;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  ClipVertex out;
  out.pos = a.pos + (b.pos - a.pos) * t;
  out.normal = a.normal + (b.normal - a.normal) * t;
  out.uv = {a.uv.u + (b.uv.u - a.uv.u) * t, a.uv.v + (b.uv.v - a.uv.v) * t};
  return out;
}

/// Clips a camera-space triangle against z >= near. Writes 0..4 vertices of
/// the clipped polygon into out.
int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.pos.z >= kNearPlane;
    const bool nxt_in = nxt.pos.z >= kNearPlane;
    if (cur_in) out[count++] = cur;
    if (cur_in != nxt_in) {
      const double t = (kNearPlane - cur.pos.z) / (nxt.pos.z - cur.pos.z);
      out[count++] = lerp(cur, nxt, t);
    }
  }
  return count;
}

struct ScreenVertex {
  double x, y;       // pixel coordinates
  double inv_z;      // 1/z
  double u_over_z, v_over_z;
  Vec3 n_over_z;
};

ScreenVertex project(const ClipVertex& v, const CameraIntrinsics& k) {
  ScreenVertex s;
  const double inv_z = 1.0 / v.pos.z;
  s.x = k.fx * v.pos.x * inv_z + k.cx;
  s.y = k.fy * v.pos.y * inv_z + k.cy;
  s.inv_z = inv_z;
  s.u_over_z = v.uv.u * inv_z;
  s.v_over_z = v.uv.v * inv_z;
  s.n_over_z = v.normal * inv_z;
  return s;
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (px - ax) * (by - ay) - (py - ay) * (bx - ax);
}

void shade_and_store(RgbdFrame& frame, int x, int y, double z, double u, double v,
                     const Vec3& normal, const TriMesh& mesh, const Lighting& light) {
  const Vec3 n = normal.normalized();
  const double lambert = std::max(0.0, n.dot(light.direction));
  const double intensity = std::min(1.0, light.ambient + light.directional * lambert);
  const auto albedo = mesh.texture.sample_nearest(clamp(u, 0.0, 1.0), clamp(v, 0.0, 1.0));
  float* px = frame.rgb_at(x, y);
  px[0] = static_cast<float>(clamp01(albedo[0] * intensity));
  px[1] = static_cast<float>(clamp01(albedo[1] * intensity));
  px[2] = static_cast<float>(clamp01(albedo[2] * intensity));
  frame.depth_at(x, y) = static_cast<float>(z);
}

void raster_triangle(RgbdFrame& frame, std::vector<double>& zbuf, ScreenVertex sv[3],
                     const TriMesh& mesh, const Lighting& light, const CameraIntrinsics& k) {
  double area = edge(sv[0].x, sv[0].y, sv[1].x, sv[1].y, sv[2].x, sv[2].y);
  if (area == 0.0) return;
  if (area < 0) {  // normalize winding so edge tests read >= 0 as inside
    std::swap(sv[1], sv[2]);
    area = -area;
  }

  const double min_x = std::min({sv[0].x, sv[1].x, sv[2].x});
  const double max_x = std::max({sv[0].x, sv[1].x, sv[2].x});
  const double min_y = std::min({sv[0].y, sv[1].y, sv[2].y});
  const double max_y = std::max({sv[0].y, sv[1].y, sv[2].y});
  const int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
  const int x1 = std::min(k.width - 1, static_cast<int>(std::ceil(max_x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int y1 = std::min(k.height - 1, static_cast<int>(std::ceil(max_y)));
  if (x0 > x1 || y0 > y1) return;

  // Top-left rule: zero-valued edges count as covered only for top or left
  // edges, so shared edges paint exactly once.
  auto top_left = [](const ScreenVertex& a, const ScreenVertex& b) {
    // Positive-area winding with y down: interior lies right of each
    // directed edge, so left edges run downward (dy > 0) and top edges run
    // leftward (dy == 0, dx < 0).
    const double dx = b.x - a.x, dy = b.y - a.y;
    return (dy > 0) || (dy == 0 && dx < 0);
  };
  const bool tl0 = top_left(sv[1], sv[2]);
  const bool tl1 = top_left(sv[2], sv[0]);
  const bool tl2 = top_left(sv[0], sv[1]);

  const double inv_area = 1.0 / area;
  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      const double w0 = edge(sv[1].x, sv[1].y, sv[2].x, sv[2].y, px, py);
      const double w1 = edge(sv[2].x, sv[2].y, sv[0].x, sv[0].y, px, py);
      const double w2 = edge(sv[0].x, sv[0].y, sv[1].x, sv[1].y, px, py);
      const bool inside = (w0 > 0 || (w0 == 0 && tl0)) && (w1 > 0 || (w1 == 0 && tl1)) &&
                          (w2 > 0 || (w2 == 0 && tl2));
      if (!inside) continue;

      const double l0 = w0 * inv_area, l1 = w1 * inv_area, l2 = w2 * inv_area;
      const double inv_z = l0 * sv[0].inv_z + l1 * sv[1].inv_z + l2 * sv[2].inv_z;
      const double z = 1.0 / inv_z;
      if (z > kFarPlane) continue;
      double& zcell = zbuf[static_cast<size_t>(y) * k.width + x];
      if (z >= zcell) continue;
      zcell = z;

      const double u = (l0 * sv[0].u_over_z + l1 * sv[1].u_over_z + l2 * sv[2].u_over_z) * z;
      const double v = (l0 * sv[0].v_over_z + l1 * sv[1].v_over_z + l2 * sv[2].v_over_z) * z;
      const Vec3 n = (sv[0].n_over_z * l0 + sv[1].n_over_z * l1 + sv[2].n_over_z * l2) * z;
      shade_and_store(frame, x, y, z, u, v, n, mesh, light);
    }
  }
}

}  // namespace

RgbdFrame render_rgbd(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                      const Lighting& light) {
  k.validate();
  RgbdFrame frame(k.width, k.height);
  std::vector<double> zbuf(frame.pixel_count(), std::numeric_limits<double>::infinity());

  // Transform all vertices and normals into camera space once.
  std::vector<Vec3> cam_pos(mesh.vertices.size());
  std::vector<Vec3> cam_nrm(mesh.normals.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam_pos[i] = pose.rotation * mesh.vertices[i] + pose.translation;
    cam_nrm[i] = pose.rotation * mesh.normals[i];
  }

  for (const auto& tri : mesh.triangles) {
    ClipVertex cv[3];
    for (int i = 0; i < 3; ++i)
      cv[i] = {cam_pos[tri[i]], cam_nrm[tri[i]], mesh.uvs[tri[i]]};
    if (cv[0].pos.z < kNearPlane && cv[1].pos.z < kNearPlane && cv[2].pos.z < kNearPlane) continue;

    ClipVertex clipped[4];
    const int n = clip_near(cv, clipped);
    for (int i = 1; i + 1 < n; ++i) {  // fan-triangulate the clipped polygon
      ScreenVertex sv[3] = {project(clipped[0], k), project(clipped[i], k),
                            project(clipped[i + 1], k)};
      raster_triangle(frame, zbuf, sv, mesh, light, k);
    }
  }
  return frame;
}

RgbdFrame composite_over(const RgbdFrame& fg, const RgbdFrame& bg) {
  if (!fg.same_size(bg)) throw std::invalid_argument("composite_over: size mismatch");
  RgbdFrame out = bg;
  const size_t n = fg.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    const float fz = fg.depth[i];
    if (fz > 0.0f && (bg.depth[i] == 0.0f || fz < bg.depth[i])) {
      out.depth[i] = fz;
      out.rgb[i * 3] = fg.rgb[i * 3];
      out.rgb[i * 3 + 1] = fg.rgb[i * 3 + 1];
      out.rgb[i * 3 + 2] = fg.rgb[i * 3 + 2];
    }
  }
  return out;
}

PixelBox projected_bbox(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                        double margin) {
  const double z = pose.translation.z;
  if (z <= kNearPlane)
    throw TrackingLost("projected_bbox: object center behind the near plane");
  PixelBox box;
  box.center_u = k.fx * pose.translation.x / z + k.cx;
  box.center_v = k.fy * pose.translation.y / z + k.cy;
  box.side = (1.0 + margin) * 2.0 * mesh.radius * k.fx / z;
  return box;
}

}  // namespace dt6d
