#include "dt6d/mesh.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "dt6d/errors.hpp"

namespace dt6d {

std::array<float, 3> Texture::sample_nearest(double u, double v) const {
  const int x = clamp(static_cast<int>(u * width), 0, width - 1);
  const int y = clamp(static_cast<int>(v * height), 0, height - 1);
  const size_t i = (static_cast<size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

Texture Texture::flat(float r, float g, float b) {
  Texture t;
  t.width = t.height = 1;
  t.rgb = {r, g, b};
  return t;
}

Texture Texture::checkerboard(int size, int cells, std::array<float, 3> a, std::array<float, 3> b) {
  Texture t;
  t.width = t.height = size;
  t.rgb.resize(static_cast<size_t>(size) * size * 3);
  const int cell = std::max(1, size / cells);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const auto& c = ((x / cell) + (y / cell)) % 2 == 0 ? a : b;
      const size_t i = (static_cast<size_t>(y) * size + x) * 3;
      t.rgb[i] = c[0];
      t.rgb[i + 1] = c[1];
      t.rgb[i + 2] = c[2];
    }
  return t;
}

void TriMesh::validate() const {
  if (triangles.empty()) throw FormatError("mesh: no triangles");
  const int n = static_cast<int>(vertices.size());
  for (const auto& tri : triangles)
    for (int idx : tri)
      if (idx < 0 || idx >= n) throw FormatError("mesh: triangle index out of range");
  if (normals.size() != vertices.size() || uvs.size() != vertices.size())
    throw FormatError("mesh: attribute count mismatch");
  for (const auto& nrm : normals) {
    const double len = nrm.norm();
    if (std::abs(len - 1.0) > 1e-6) throw FormatError("mesh: non-unit normal");
  }
}

void TriMesh::recompute_radius() {
  radius = 0;
  for (const auto& v : vertices) radius = std::max(radius, v.norm());
}

void TriMesh::recompute_normals() {
  normals.assign(vertices.size(), Vec3{0, 0, 0});
  for (const auto& tri : triangles) {
    const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    const Vec3 fn = e1.cross(e2);  // magnitude = 2*area, weights the average
    for (int idx : tri) normals[idx] += fn;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    n = len > 1e-12 ? n / len : Vec3{0, 0, 1};
  }
}

namespace {

struct ObjIndex {
  int v = 0, vt = 0, vn = 0;  // 1-based; 0 = absent
  bool operator<(const ObjIndex& o) const {
    return std::tie(v, vt, vn) < std::tie(o.v, o.vt, o.vn);
  }
};

ObjIndex parse_face_corner(const std::string& token, int line_no) {
  ObjIndex idx;
  int part = 0;
  size_t start = 0;
  for (size_t i = 0; i <= token.size(); ++i) {
    if (i == token.size() || token[i] == '/') {
      if (i > start) {
        const int value = std::stoi(token.substr(start, i - start));
        if (part == 0) idx.v = value;
        else if (part == 1) idx.vt = value;
        else if (part == 2) idx.vn = value;
        else throw FormatError("obj: malformed face corner at line " + std::to_string(line_no));
      }
      ++part;
      start = i + 1;
    }
  }
  if (idx.v == 0) throw FormatError("obj: face corner missing vertex index at line " + std::to_string(line_no));
  return idx;
}

int resolve_index(int idx, size_t count, int line_no) {
  const int resolved = idx > 0 ? idx - 1 : static_cast<int>(count) + idx;
  if (resolved < 0 || resolved >= static_cast<int>(count))
    throw FormatError("obj: index out of range at line " + std::to_string(line_no));
  return resolved;
}

void spherical_uvs(TriMesh& mesh) {
  mesh.uvs.resize(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 d = mesh.vertices[i].normalized();
    mesh.uvs[i].u = 0.5 + std::atan2(d.y, d.x) / (2 * kPi);
    mesh.uvs[i].v = 0.5 - std::asin(clamp(d.z, -1.0, 1.0)) / kPi;
  }
}

void recenter(TriMesh& mesh) {
  Vec3 centroid{0, 0, 0};
  for (const auto& v : mesh.vertices) centroid += v;
  centroid = centroid / static_cast<double>(mesh.vertices.size());
  for (auto& v : mesh.vertices) v = v - centroid;
}

}  // namespace

TriMesh load_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("obj: cannot open: " + path);

  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  std::vector<Vec3> objnormals;
  TriMesh mesh;
  std::map<ObjIndex, int> vertex_map;
  bool any_normals = false, any_uvs = false;

  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    try {
      if (tag == "v") {
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z)) throw FormatError("obj: bad vertex at line " + std::to_string(line_no));
        positions.push_back(p);
      } else if (tag == "vt") {
        Vec2 t;
        if (!(ss >> t.u >> t.v)) throw FormatError("obj: bad texcoord at line " + std::to_string(line_no));
        texcoords.push_back(t);
      } else if (tag == "vn") {
        Vec3 n;
        if (!(ss >> n.x >> n.y >> n.z)) throw FormatError("obj: bad normal at line " + std::to_string(line_no));
        objnormals.push_back(n);
      } else if (tag == "f") {
        std::vector<int> corners;
        std::string token;
        while (ss >> token) {
          const ObjIndex oi = parse_face_corner(token, line_no);
          auto found = vertex_map.find(oi);
          int unified;
          if (found != vertex_map.end()) {
            unified = found->second;
          } else {
            unified = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(positions[resolve_index(oi.v, positions.size(), line_no)]);
            if (oi.vt != 0) {
              mesh.uvs.push_back(texcoords[resolve_index(oi.vt, texcoords.size(), line_no)]);
              any_uvs = true;
            } else {
              mesh.uvs.push_back({0, 0});
            }
            if (oi.vn != 0) {
              mesh.normals.push_back(objnormals[resolve_index(oi.vn, objnormals.size(), line_no)].normalized());
              any_normals = true;
            } else {
              mesh.normals.push_back({0, 0, 1});
            }
            vertex_map.emplace(oi, unified);
          }
          corners.push_back(unified);
        }
        if (corners.size() < 3) throw FormatError("obj: face with fewer than 3 corners at line " + std::to_string(line_no));
        for (size_t i = 1; i + 1 < corners.size(); ++i)
          mesh.triangles.push_back({corners[0], corners[i], corners[i + 1]});
      }
      // Unknown tags (o, g, s, mtllib, usemtl, ...) are skipped.
    } catch (const std::invalid_argument&) {
      throw FormatError("obj: unparseable number at line " + std::to_string(line_no));
    } catch (const std::out_of_range&) {
      throw FormatError("obj: number out of range at line " + std::to_string(line_no));
    }
  }

  if (mesh.triangles.empty()) throw FormatError("obj: no triangles in " + path);
  recenter(mesh);
  if (!any_normals) mesh.recompute_normals();
  if (!any_uvs) spherical_uvs(mesh);
  mesh.texture = Texture::checkerboard(64, 8, {0.85f, 0.85f, 0.85f}, {0.35f, 0.35f, 0.35f});
  mesh.recompute_radius();
  mesh.validate();
  return mesh;
}

TriMesh make_box(double sx, double sy, double sz, Texture texture) {
  TriMesh mesh;
  mesh.texture = std::move(texture);
  const double hx = sx / 2, hy = sy / 2, hz = sz / 2;
  // 6 faces, each with 4 unique vertices and its own atlas cell (3x2 grid).
  struct Face {
    Vec3 origin, du, dv, normal;
  };
  const Face faces[6] = {
      {{-hx, -hy, hz}, {sx, 0, 0}, {0, sy, 0}, {0, 0, 1}},    // +z
      {{hx, -hy, -hz}, {-sx, 0, 0}, {0, sy, 0}, {0, 0, -1}},  // -z
      {{hx, -hy, hz}, {0, 0, -sz}, {0, sy, 0}, {1, 0, 0}},    // +x
      {{-hx, -hy, -hz}, {0, 0, sz}, {0, sy, 0}, {-1, 0, 0}},  // -x
      {{-hx, hy, hz}, {sx, 0, 0}, {0, 0, -sz}, {0, 1, 0}},    // +y
      {{-hx, -hy, -hz}, {sx, 0, 0}, {0, 0, sz}, {0, -1, 0}},  // -y
  };
  for (int fi = 0; fi < 6; ++fi) {
    const Face& face = faces[fi];
    const double u0 = (fi % 3) / 3.0, v0 = (fi / 3) / 2.0;
    const int base = static_cast<int>(mesh.vertices.size());
    const Vec2 uv[4] = {{u0, v0}, {u0 + 1 / 3.0, v0}, {u0 + 1 / 3.0, v0 + 0.5}, {u0, v0 + 0.5}};
    const Vec3 pos[4] = {face.origin, face.origin + face.du, face.origin + face.du + face.dv,
                         face.origin + face.dv};
    for (int i = 0; i < 4; ++i) {
      mesh.vertices.push_back(pos[i]);
      mesh.normals.push_back(face.normal);
      mesh.uvs.push_back(uv[i]);
    }
    mesh.triangles.push_back({base, base + 1, base + 2});
    mesh.triangles.push_back({base, base + 2, base + 3});
  }
  mesh.recompute_radius();
  return mesh;
}

TriMesh make_ellipsoid(double rx, double ry, double rz, int subdivisions,
                       double deform_amplitude, RandomStream& rng) {
  // Icosahedron base.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v = v.normalized();
  std::vector<std::array<int, 3>> tris = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(verts.size());
      verts.push_back(((verts[a] + verts[b]) / 2.0).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& tri : tris) {
      const int ab = mid(tri[0], tri[1]), bc = mid(tri[1], tri[2]), ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  TriMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const auto& unit : verts) {
    const double bump = 1.0 + deform_amplitude * (2.0 * rng.uniform() - 1.0);
    mesh.vertices.push_back({unit.x * rx * bump, unit.y * ry * bump, unit.z * rz * bump});
  }
  mesh.triangles = std::move(tris);
  mesh.recompute_normals();
  spherical_uvs(mesh);
  mesh.texture = Texture::flat(0.8f, 0.7f, 0.6f);
  mesh.recompute_radius();
  return mesh;
}

TriMesh make_toy_mesh() {
  // Body, roof wedge, chimney, nose: no mirror symmetry, every face has a
  // distinct color so rotations are visually unambiguous.
  auto gradient_atlas = [](std::array<float, 3> base) {
    Texture t;
    t.width = t.height = 48;
    t.rgb.resize(48 * 48 * 3);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        const float fu = x / 47.0f, fv = y / 47.0f;
        const size_t i = (static_cast<size_t>(y) * 48 + x) * 3;
        t.rgb[i] = clamp(base[0] * (0.45f + 0.55f * fu), 0.0f, 1.0f);
        t.rgb[i + 1] = clamp(base[1] * (0.45f + 0.55f * fv), 0.0f, 1.0f);
        t.rgb[i + 2] = clamp(base[2] * (0.35f + 0.4f * fu + 0.25f * fv), 0.0f, 1.0f);
      }
    return t;
  };

  TriMesh body = make_box(0.14, 0.08, 0.09, gradient_atlas({0.95f, 0.25f, 0.2f}));

  TriMesh roof;  // wedge
  roof.texture = gradient_atlas({0.2f, 0.5f, 0.95f});
  const double rw = 0.12, rd = 0.085, rh = 0.05;
  roof.vertices = {{-rw / 2, 0, -rd / 2}, {rw / 2, 0, -rd / 2}, {rw / 2, 0, rd / 2},
                   {-rw / 2, 0, rd / 2}, {-rw / 2, -rh, 0}, {rw / 2, -rh, 0}};
  roof.triangles = {{0, 1, 2}, {0, 2, 3},              // underside
                    {0, 4, 5}, {0, 5, 1},              // back slope
                    {3, 2, 5}, {3, 5, 4},              // front slope
                    {0, 3, 4}, {1, 5, 2}};             // gable ends
  roof.uvs = {{0.05, 0.05}, {0.95, 0.05}, {0.95, 0.95}, {0.05, 0.95}, {0.3, 0.5}, {0.7, 0.5}};
  roof.recompute_normals();

  TriMesh chimney = make_box(0.025, 0.05, 0.025, gradient_atlas({0.95f, 0.85f, 0.2f}));
  TriMesh nose = make_box(0.04, 0.03, 0.05, gradient_atlas({0.25f, 0.9f, 0.4f}));

  // Assemble around the body (y down in object frame, roof on top).
  TriMesh toy = body;
  append_transformed(toy, roof, Mat3::identity(), {0, -0.04, 0});
  append_transformed(toy, chimney, Mat3::identity(), {0.042, -0.075, 0.012});
  append_transformed(toy, nose, Mat3::identity(), {-0.075, 0.01, -0.015});

  // Merge textures by packing the four atlases into a 2x2 sheet; sub-mesh
  // UVs were laid out in [0,1] so remap each block into its quadrant.
  Texture sheet;
  sheet.width = sheet.height = 96;
  sheet.rgb.assign(96 * 96 * 3, 0.0f);
  const Texture* parts[4] = {&body.texture, &roof.texture, &chimney.texture, &nose.texture};
  const size_t vertex_starts[4] = {0, body.vertices.size(), body.vertices.size() + roof.vertices.size(),
                                   body.vertices.size() + roof.vertices.size() + chimney.vertices.size()};
  for (int p = 0; p < 4; ++p) {
    const int ox = (p % 2) * 48, oy = (p / 2) * 48;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x)
        for (int c = 0; c < 3; ++c)
          sheet.rgb[((static_cast<size_t>(oy + y)) * 96 + ox + x) * 3 + c] =
              parts[p]->rgb[(static_cast<size_t>(y) * 48 + x) * 3 + c];
    const size_t begin = vertex_starts[p];
    const size_t end = p + 1 < 4 ? vertex_starts[p + 1] : toy.vertices.size();
    for (size_t i = begin; i < end; ++i) {
      toy.uvs[i].u = (clamp(toy.uvs[i].u, 0.0, 1.0) + (p % 2)) / 2.0;
      toy.uvs[i].v = (clamp(toy.uvs[i].v, 0.0, 1.0) + (p / 2)) / 2.0;
    }
  }
  toy.texture = std::move(sheet);

  recenter(toy);
  toy.recompute_radius();
  toy.validate();
  return toy;
}

void append_transformed(TriMesh& dst, const TriMesh& src, const Mat3& rot, const Vec3& trans) {
  const int base = static_cast<int>(dst.vertices.size());
  for (size_t i = 0; i < src.vertices.size(); ++i) {
    dst.vertices.push_back(rot * src.vertices[i] + trans);
    dst.normals.push_back(rot * src.normals[i]);
    dst.uvs.push_back(src.uvs[i]);
  }
  for (const auto& tri : src.triangles)
    dst.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
  dst.recompute_radius();
}

}  // namespace dt6d
