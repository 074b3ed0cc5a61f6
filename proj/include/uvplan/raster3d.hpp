#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "uvplan/geometry.hpp"
#include "uvplan/parallel.hpp"
#include "uvplan/radiometry.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// Orientation of one cube face: pixel (i, j) looks along
/// forward + right * sx + up * sy with sx, sy the pixel-center coordinates in [-1, 1].
struct CubeFace {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

inline constexpr std::array<CubeFace, 6> kCubeFaces = {{
    {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}},
    {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
    {{0, 1, 0}, {1, 0, 0}, {0, 0, -1}},
    {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
    {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},
    {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}},
}};

inline constexpr std::int32_t kVoidPixel = -1;

/// Six R x R buffers of nearest-triangle index and view depth.
struct VisibilityCube {
  int resolution = 0;
  std::array<std::vector<std::int32_t>, 6> triangle;
  std::array<std::vector<double>, 6> depth;

  explicit VisibilityCube(int r = 0) : resolution(r) {
    const auto n = static_cast<std::size_t>(r) * static_cast<std::size_t>(r);
    for (int f = 0; f < 6; ++f) {
      triangle[f].assign(n, kVoidPixel);
      depth[f].assign(n, std::numeric_limits<double>::infinity());
    }
  }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * resolution + i; }
  std::int32_t at(int face, int i, int j) const { return triangle[face][index(i, j)]; }

  std::size_t void_count() const {
    std::size_t n = 0;
    for (const auto& buf : triangle) {
      for (std::int32_t t : buf) n += t == kVoidPixel;
    }
    return n;
  }

  /// Unit direction of the ray through the center of pixel (i, j).
  Vec3 pixel_direction(int face, int i, int j) const {
    const CubeFace& cf = kCubeFaces[face];
    const double sx = -1.0 + (2.0 * i + 1.0) / resolution;
    const double sy = -1.0 + (2.0 * j + 1.0) / resolution;
    return normalized(cf.forward + cf.right * sx + cf.up * sy);
  }
};

/// Per-pixel emitted power: e(i, j) = P * solid_angle(i, j) / (4 pi).
struct PowerEmissionTexture {
  int resolution = 0;
  double power = 0.0;
  std::vector<double> face;  // one face; all six are congruent

  double at(int i, int j) const { return face[static_cast<std::size_t>(j) * resolution + i]; }

  double total() const {
    double s = 0.0;
    for (double e : face) s += e;
    return 6.0 * s;
  }
};

/// Exact solid angle of the rectangle [x0,x1] x [y0,y1] on the plane z = 1.
inline double cube_rect_solid_angle(double x0, double x1, double y0, double y1) {
  auto corner = [](double x, double y) { return std::atan2(x * y, std::sqrt(x * x + y * y + 1.0)); };
  return corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0);
}

inline PowerEmissionTexture precompute_emission(int resolution, double power) {
  if (resolution < 8) throw std::invalid_argument("cube resolution must be >= 8");
  PowerEmissionTexture tex{resolution, power, std::vector<double>(static_cast<std::size_t>(resolution) * resolution)};
  const double scale = power / (4.0 * kPi);
  for (int j = 0; j < resolution; ++j) {
    const double y0 = -1.0 + 2.0 * j / resolution;
    const double y1 = -1.0 + 2.0 * (j + 1) / resolution;
    for (int i = 0; i < resolution; ++i) {
      const double x0 = -1.0 + 2.0 * i / resolution;
      const double x1 = -1.0 + 2.0 * (i + 1) / resolution;
      tex.face[static_cast<std::size_t>(j) * resolution + i] = scale * cube_rect_solid_angle(x0, x1, y0, y1);
    }
  }
  return tex;
}

namespace detail {

struct ClipVertex {
  double x, y, z;  // view space: x along right, y along up, z along forward
};

inline bool lex_less(const ClipVertex& a, const ClipVertex& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

/// Sutherland-Hodgman against plane value(v) >= 0. Intersections are computed
/// from a canonically ordered endpoint pair so shared edges clip identically.
template <typename PlaneFn>
int clip_polygon(const ClipVertex* in, int n, ClipVertex* out, PlaneFn value) {
  int m = 0;
  for (int k = 0; k < n; ++k) {
    const ClipVertex& a = in[k];
    const ClipVertex& b = in[(k + 1) % n];
    const double va = value(a);
    const double vb = value(b);
    if (va >= 0.0) out[m++] = a;
    if ((va >= 0.0) != (vb >= 0.0)) {
      const bool swap = lex_less(b, a);
      const ClipVertex& p = swap ? b : a;
      const ClipVertex& q = swap ? a : b;
      const double vp = swap ? vb : va;
      const double vq = swap ? va : vb;
      const double t = vp / (vp - vq);
      out[m++] = {p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t, p.z + (q.z - p.z) * t};
    }
  }
  return m;
}

struct ScreenVertex {
  double x, y, inv_z;
};

/// Edge function with a canonical endpoint order, so the two triangles sharing
/// an edge see exactly negated values.
inline double edge_value(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  const bool swap = (b.x < a.x) || (b.x == a.x && b.y < a.y);
  const ScreenVertex& p = swap ? b : a;
  const ScreenVertex& q = swap ? a : b;
  const double v = (q.x - p.x) * (py - p.y) - (q.y - p.y) * (px - p.x);
  return swap ? -v : v;
}

/// Top-left fill rule for a counter-clockwise (y-up) triangle.
inline bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dy < 0.0 || (dy == 0.0 && dx < 0.0);
}

inline void raster_triangle(ScreenVertex v0, ScreenVertex v1, ScreenVertex v2, std::int32_t id, int resolution,
                            std::vector<std::int32_t>& tri_buf, std::vector<double>& depth_buf) {
  double area = (v1.x - v0.x) * (v2.y - v0.y) - (v1.y - v0.y) * (v2.x - v0.x);
  if (area == 0.0 || !std::isfinite(area)) return;
  if (area < 0.0) {
    std::swap(v1, v2);
    area = -area;
  }
  const double min_x = std::min({v0.x, v1.x, v2.x});
  const double max_x = std::max({v0.x, v1.x, v2.x});
  const double min_y = std::min({v0.y, v1.y, v2.y});
  const double max_y = std::max({v0.y, v1.y, v2.y});
  const int i0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
  const int i1 = std::min(resolution - 1, static_cast<int>(std::ceil(max_x - 0.5)));
  const int j0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int j1 = std::min(resolution - 1, static_cast<int>(std::ceil(max_y - 0.5)));
  const bool own0 = owns_edge(v1, v2);
  const bool own1 = owns_edge(v2, v0);
  const bool own2 = owns_edge(v0, v1);
  const double inv_area = 1.0 / area;
  for (int j = j0; j <= j1; ++j) {
    const double py = j + 0.5;
    for (int i = i0; i <= i1; ++i) {
      const double px = i + 0.5;
      const double w0 = edge_value(v1, v2, px, py);
      const double w1 = edge_value(v2, v0, px, py);
      const double w2 = edge_value(v0, v1, px, py);
      if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
      if ((w0 == 0.0 && !own0) || (w1 == 0.0 && !own1) || (w2 == 0.0 && !own2)) continue;
      const double inv_z = (w0 * v0.inv_z + w1 * v1.inv_z + w2 * v2.inv_z) * inv_area;
      if (!(inv_z > 0.0)) continue;
      const double z = 1.0 / inv_z;
      const std::size_t idx = static_cast<std::size_t>(j) * resolution + i;
      if (z < depth_buf[idx]) {
        depth_buf[idx] = z;
        tri_buf[idx] = id;
      }
    }
  }
}

}  // namespace detail

/// Renders triangle indices around `center` into six 90-degree frusta with a depth test.
inline VisibilityCube rasterize_cube(const TriMeshWorld& mesh, Vec3 center, int resolution) {
  if (resolution < 8) throw std::invalid_argument("cube resolution must be >= 8");
  VisibilityCube cube(resolution);
  constexpr double kNear = 1e-6;
  constexpr double kGuard = 2.0;  // guard band in units of the face half-width
  const double half = 0.5 * resolution;
  std::vector<detail::ClipVertex> view(mesh.vertices.size());
  for (int f = 0; f < 6; ++f) {
    const CubeFace& cf = kCubeFaces[f];
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const Vec3 p = mesh.vertices[v] - center;
      view[v] = {dot(p, cf.right), dot(p, cf.up), dot(p, cf.forward)};
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const detail::ClipVertex a = view[tri[0]];
      const detail::ClipVertex b = view[tri[1]];
      const detail::ClipVertex c = view[tri[2]];
      if (a.z <= kNear && b.z <= kNear && c.z <= kNear) continue;
      if (a.x > kGuard * a.z && b.x > kGuard * b.z && c.x > kGuard * c.z) continue;
      if (-a.x > kGuard * a.z && -b.x > kGuard * b.z && -c.x > kGuard * c.z) continue;
      if (a.y > kGuard * a.z && b.y > kGuard * b.z && c.y > kGuard * c.z) continue;
      if (-a.y > kGuard * a.z && -b.y > kGuard * b.z && -c.y > kGuard * c.z) continue;
      detail::ClipVertex buf_a[12] = {a, b, c};
      detail::ClipVertex buf_b[12];
      int n = 3;
      n = detail::clip_polygon(buf_a, n, buf_b, [](const detail::ClipVertex& v) { return v.z - kNear; });
      n = detail::clip_polygon(buf_b, n, buf_a, [](const detail::ClipVertex& v) { return kGuard * v.z - v.x; });
      n = detail::clip_polygon(buf_a, n, buf_b, [](const detail::ClipVertex& v) { return kGuard * v.z + v.x; });
      n = detail::clip_polygon(buf_b, n, buf_a, [](const detail::ClipVertex& v) { return kGuard * v.z - v.y; });
      n = detail::clip_polygon(buf_a, n, buf_b, [](const detail::ClipVertex& v) { return kGuard * v.z + v.y; });
      if (n < 3) continue;
      detail::ScreenVertex sv[12];
      for (int k = 0; k < n; ++k) {
        const auto& v = buf_b[k];
        sv[k] = {(v.x / v.z + 1.0) * half, (v.y / v.z + 1.0) * half, 1.0 / v.z};
      }
      for (int k = 1; k + 1 < n; ++k) {
        detail::raster_triangle(sv[0], sv[k], sv[k + 1], static_cast<std::int32_t>(t), resolution, cube.triangle[f],
                                cube.depth[f]);
      }
    }
  }
  return cube;
}

/// Per-triangle radiant flux (W).
struct FluxBuffer {
  std::vector<double> flux;

  double total() const {
    double s = 0.0;
    for (double f : flux) s += f;
    return s;
  }
};

/// Adds e(i, j) into F[T(i, j)] for every non-void pixel whose triangle faces the light.
inline void accumulate_flux(const TriMeshWorld& mesh, Vec3 center, const VisibilityCube& cube,
                            const PowerEmissionTexture& emission, FluxBuffer& out) {
  if (cube.resolution != emission.resolution) throw std::invalid_argument("cube and emission resolutions differ");
  out.flux.resize(mesh.triangles.size(), 0.0);
  std::vector<std::int8_t> facing(mesh.triangles.size(), -1);
  const int r = cube.resolution;
  for (int f = 0; f < 6; ++f) {
    const auto& tri_buf = cube.triangle[f];
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        const std::int32_t t = tri_buf[static_cast<std::size_t>(j) * r + i];
        if (t == kVoidPixel) continue;
        auto& fa = facing[static_cast<std::size_t>(t)];
        if (fa < 0) fa = dot(center - mesh.vertices[mesh.triangles[t][0]], mesh.normals[t]) > 0.0 ? 1 : 0;
        if (fa) out.flux[static_cast<std::size_t>(t)] += emission.at(i, j);
      }
    }
  }
}

struct RasterOptions {
  int resolution = 512;
};

/// Mean irradiance F[i] / |s_i| of every triangle from a lamp at `position`.
/// Cylinder lamps render once per emitter and sum flux before dividing by area.
inline std::vector<double> triangle_irradiance(const TriMeshWorld& mesh, const LightSource& light, Vec3 position,
                                               const RasterOptions& opt = {}) {
  light.validate();
  const PowerEmissionTexture emission = precompute_emission(opt.resolution, light.emitter_power());
  FluxBuffer flux;
  flux.flux.assign(mesh.triangles.size(), 0.0);
  for (Vec3 e : light.emitters(position)) {
    const VisibilityCube cube = rasterize_cube(mesh, e, opt.resolution);
    accumulate_flux(mesh, e, cube, emission, flux);
  }
  std::vector<double> irradiance(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) irradiance[t] = flux.flux[t] / mesh.area(t);
  return irradiance;
}

inline std::vector<double> triangle_irradiance(const TriMeshWorld& mesh, Vec3 center, int resolution, double power) {
  return triangle_irradiance(mesh, LightSource::point(power), center, RasterOptions{resolution});
}

inline IrradianceMatrix build_irradiance_matrix(const TriMeshWorld& mesh, const LightSource& light,
                                                std::span<const Vec3> vantages, const RasterOptions& opt = {}) {
  IrradianceMatrix m(mesh.triangles.size(), vantages.size());
  parallel_for(vantages.size(), [&](std::size_t k) {
    const auto column = triangle_irradiance(mesh, light, vantages[k], opt);
    for (std::size_t i = 0; i < column.size(); ++i) m.at(i, k) = column[i];
  });
  return m;
}

}  // namespace uvplan
