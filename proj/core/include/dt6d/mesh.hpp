#pragma once

#include <array>
#include <string>
#include <vector>

#include "dt6d/math.hpp"
#include "dt6d/rand.hpp"

namespace dt6d {

struct Texture {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // width*height*3, [0,1]

  /// Nearest-texel lookup, coordinates clamped to [0,1].
  std::array<float, 3> sample_nearest(double u, double v) const;

  static Texture flat(float r, float g, float b);
  static Texture checkerboard(int size, int cells, std::array<float, 3> a, std::array<float, 3> b);
};

struct Vec2 {
  double u = 0, v = 0;
};

/// Triangle mesh with per-vertex normals and UVs. Loaded meshes are
/// recentered so the centroid sits at the object-frame origin; `radius` is
/// the max vertex distance from that origin.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Vec2> uvs;
  std::vector<std::array<int, 3>> triangles;
  Texture texture;
  double radius = 0;

  void validate() const;
  void recompute_radius();
  /// Area-weighted per-vertex normals from face geometry.
  void recompute_normals();
};

/// OBJ subset importer: v, vt, vn, f (convex polygons are fan-triangulated).
/// Missing normals are recomputed, missing texture becomes a checkerboard,
/// missing UVs get a spherical mapping.
TriMesh load_mesh(const std::string& path);

/// Axis-aligned box; each face maps onto its own cell of the texture atlas.
TriMesh make_box(double sx, double sy, double sz, Texture texture);

/// Deformed ellipsoid used as the occluder shape.
TriMesh make_ellipsoid(double rx, double ry, double rz, int subdivisions,
                       double deform_amplitude, RandomStream& rng);

/// The default tracked object: an asymmetric assembly of colored blocks,
/// roughly 15 cm across, with orientation-revealing texture gradients.
TriMesh make_toy_mesh();

/// Merge helper: appends src (with pose baked in) onto dst. Textures are
/// not merged; the caller keeps meshes separate when textures differ.
void append_transformed(TriMesh& dst, const TriMesh& src, const Mat3& rot, const Vec3& trans);

}  // namespace dt6d
