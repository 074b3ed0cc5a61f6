#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "uvplan/geometry.hpp"
#include "uvplan/parallel.hpp"
#include "uvplan/visibility.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// Lamp model. A cylinder is approximated by `sample_count` evenly spaced
/// point emitters on its axis, each carrying power / sample_count. The axis
/// endpoints are offsets from the vantage position.
struct LightSource {
  enum class Kind { point, cylinder };

  Kind kind = Kind::point;
  double power = 80.0;
  Vec3 axis_start;
  Vec3 axis_end;
  int sample_count = 1;

  static LightSource point(double power) { return {Kind::point, power, {}, {}, 1}; }

  static LightSource cylinder(double power, Vec3 axis_start, Vec3 axis_end, int sample_count = 10) {
    return {Kind::cylinder, power, axis_start, axis_end, sample_count};
  }

  void validate() const {
    if (!(power > 0.0)) throw std::invalid_argument("light power must be positive");
    if (kind == Kind::cylinder && sample_count < 1) throw std::invalid_argument("cylinder sample_count must be >= 1");
  }

  int emitter_count() const { return kind == Kind::point ? 1 : sample_count; }

  /// Emitter positions for a lamp placed at `position`.
  std::vector<Vec3> emitters(Vec3 position) const {
    if (kind == Kind::point) return {position};
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(sample_count));
    for (int j = 0; j < sample_count; ++j) {
      const double s = (j + 0.5) / sample_count;
      pts.push_back(position + axis_start + (axis_end - axis_start) * s);
    }
    return pts;
  }

  double emitter_power() const { return power / emitter_count(); }
};

/// Inverse-square irradiance density P * max(0, cos) / (4 pi r^2) at a surface
/// point, with cos measured between the outward normal and the direction to
/// the light. Occlusion is the caller's concern.
inline double point_irradiance_density(Vec3 light_pos, Vec3 surface_pos, Vec3 normal, double power) {
  const Vec3 d = light_pos - surface_pos;
  const double r2 = dot(d, d);
  if (!(r2 >= 1e-18)) throw std::domain_error("light coincides with surface point (r < 1e-9 m)");
  const double r = std::sqrt(r2);
  const double cos_theta = dot(d, normal) / r;
  if (cos_theta <= 0.0) return 0.0;
  return power * cos_theta / (4.0 * kPi * r2);
}

struct IntegrationOptions {
  double relative_tolerance = 1e-4;
  bool midpoint_only = false;
  int max_depth = 14;
};

namespace detail {

inline double unit_density(Vec3 light, Vec3 p, Vec3 n) {
  const Vec3 d = light - p;
  const double r2 = dot(d, d);
  if (!(r2 >= 1e-18)) throw std::domain_error("light coincides with surface point (r < 1e-9 m)");
  const double c = dot(d, n);
  if (c <= 0.0) return 0.0;
  return c / (4.0 * kPi * r2 * std::sqrt(r2));
}

/// Adaptive midpoint quadrature over a bilinear-parametrized planar cell.
/// `point(u, v)` maps [0,1]^2 to the surface; `area` is the cell area.
template <typename PointFn>
double integrate_cell(const PointFn& point, Vec3 light, Vec3 n, double u0, double u1, double v0, double v1,
                      double cell_area, double estimate, double abs_tol_per_area, int depth, int max_depth) {
  const double um = 0.5 * (u0 + u1);
  const double vm = 0.5 * (v0 + v1);
  const double child_area = 0.25 * cell_area;
  const double uu[2][2] = {{u0, um}, {um, u1}};
  const double vv[2][2] = {{v0, vm}, {vm, v1}};
  double child[4];
  double refined = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double val =
          unit_density(light, point(0.5 * (uu[a][0] + uu[a][1]), 0.5 * (vv[b][0] + vv[b][1])), n) * child_area;
      child[2 * a + b] = val;
      refined += val;
    }
  }
  if (depth >= max_depth || std::abs(refined - estimate) <= abs_tol_per_area * cell_area) return refined;
  double sum = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      sum += integrate_cell(point, light, n, uu[a][0], uu[a][1], vv[b][0], vv[b][1], child_area, child[2 * a + b],
                            abs_tol_per_area, depth + 1, max_depth);
    }
  }
  return sum;
}

inline double integrate_triangle(Vec3 light, Vec3 n, Vec3 a, Vec3 b, Vec3 c, double area,
                          double estimate, double abs_tol_per_area, int depth, int max_depth) {
  const Vec3 ab = (a + b) * 0.5;
  const Vec3 bc = (b + c) * 0.5;
  const Vec3 ca = (c + a) * 0.5;
  const Vec3 kids[4][3] = {{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {ab, bc, ca}};
  const double child_area = 0.25 * area;
  double child[4];
  double refined = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Vec3 centroid = (kids[k][0] + kids[k][1] + kids[k][2]) * (1.0 / 3.0);
    child[k] = unit_density(light, centroid, n) * child_area;
    refined += child[k];
  }
  if (depth >= max_depth || std::abs(refined - estimate) <= abs_tol_per_area * area) return refined;
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    sum += integrate_triangle(light, n, kids[k][0], kids[k][1], kids[k][2], child_area, child[k],
                              abs_tol_per_area, depth + 1, max_depth);
  }
  return sum;
}

/// Mean unit-power density over a wall panel.
inline double panel_mean_density(Vec3 light, const WallPanel& w, Vec3 n, const IntegrationOptions& opt) {
  const Vec2 d = w.b - w.a;
  const double len = norm(d);
  const double height = w.z1 - w.z0;
  auto point = [&](double u, double v) { return Vec3{w.a.x + d.x * u, w.a.y + d.y * u, w.z0 + height * v}; };
  if (opt.midpoint_only) return unit_density(light, point(0.5, 0.5), n);
  // Start from roughly square cells.
  int nu = 1;
  int nv = 1;
  if (len >= height) {
    nu = std::clamp(static_cast<int>(std::ceil(len / height - 1e-9)), 1, 64);
  } else {
    nv = std::clamp(static_cast<int>(std::ceil(height / len - 1e-9)), 1, 64);
  }
  const double area = len * height;
  const double cell_area = area / (nu * nv);
  std::vector<double> coarse(static_cast<std::size_t>(nu * nv));
  double total = 0.0;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double val = unit_density(light, point((i + 0.5) / nu, (j + 0.5) / nv), n) * cell_area;
      coarse[static_cast<std::size_t>(i * nv + j)] = val;
      total += val;
    }
  }
  if (total <= 0.0) {
    // Cell midpoints can all be back-facing only if the whole panel is.
    return 0.0;
  }
  const double abs_tol_per_area = opt.relative_tolerance * total / area;
  double sum = 0.0;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      sum += integrate_cell(point, light, n, static_cast<double>(i) / nu, static_cast<double>(i + 1) / nu,
                            static_cast<double>(j) / nv, static_cast<double>(j + 1) / nv, cell_area,
                            coarse[static_cast<std::size_t>(i * nv + j)], abs_tol_per_area, 0, opt.max_depth);
    }
  }
  return sum / area;
}

inline double triangle_mean_density(Vec3 light, const TrianglePanel& t, Vec3 n, const IntegrationOptions& opt) {
  const Vec3 centroid = (t.a + t.b + t.c) * (1.0 / 3.0);
  if (opt.midpoint_only) return unit_density(light, centroid, n);
  const double area = triangle_area(t.a, t.b, t.c);
  const double coarse = unit_density(light, centroid, n) * area;
  // The coarse estimate may vanish at a grazing centroid; seed the tolerance from one refinement.
  const double seed = integrate_triangle(light, n, t.a, t.b, t.c, area, coarse, INFINITY, 0, 0);
  const double scale = std::max(coarse, seed);
  if (scale <= 0.0) return 0.0;
  const double abs_tol_per_area = opt.relative_tolerance * scale / area;
  return integrate_triangle(light, n, t.a, t.b, t.c, area, coarse, abs_tol_per_area, 0, opt.max_depth) / area;
}

inline double patch_mean_density(Vec3 light, const SurfacePatch& patch, const IntegrationOptions& opt) {
  if (const auto* w = std::get_if<WallPanel>(&patch.geometry)) return panel_mean_density(light, *w, patch.normal, opt);
  return triangle_mean_density(light, std::get<TrianglePanel>(patch.geometry), patch.normal, opt);
}

}  // namespace detail

/// Mean irradiance (W/m^2) over a patch from a lamp at `light_pos`; zero when
/// the patch is not visible.
inline double patch_irradiance(const LightSource& light, Vec3 light_pos, const SurfacePatch& patch, bool visible,
                               const IntegrationOptions& opt = {}) {
  if (!visible) return 0.0;
  const double each = light.emitter_power();
  double sum = 0.0;
  for (Vec3 e : light.emitters(light_pos)) sum += each * detail::patch_mean_density(e, patch, opt);
  return sum;
}

/// N patches x K vantages of mean irradiance, row-major by patch.
struct IrradianceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::size_t> patch_ids;
  std::vector<std::size_t> vantage_ids;

  IrradianceMatrix() = default;
  IrradianceMatrix(std::size_t n, std::size_t k) : rows(n), cols(k), values(n * k, 0.0), patch_ids(n), vantage_ids(k) {
    for (std::size_t i = 0; i < n; ++i) patch_ids[i] = i;
    for (std::size_t j = 0; j < k; ++j) vantage_ids[j] = j;
  }

  double at(std::size_t patch, std::size_t vantage) const { return values[patch * cols + vantage]; }
  double& at(std::size_t patch, std::size_t vantage) { return values[patch * cols + vantage]; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }

  /// Patch i is lit by at least one vantage.
  bool row_nonzero(std::size_t i) const {
    for (std::size_t k = 0; k < cols; ++k) {
      if (at(i, k) > 0.0) return true;
    }
    return false;
  }

  /// Submatrix restricted to the given vantage columns (ids preserved).
  IrradianceMatrix select_columns(std::span<const std::size_t> keep) const {
    IrradianceMatrix m(rows, keep.size());
    m.patch_ids = patch_ids;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      m.vantage_ids[j] = vantage_ids[keep[j]];
      for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = at(i, keep[j]);
    }
    return m;
  }

  /// Submatrix restricted to the given patch rows (ids preserved).
  IrradianceMatrix select_rows(std::span<const std::size_t> keep) const {
    IrradianceMatrix m(keep.size(), cols);
    m.vantage_ids = vantage_ids;
    for (std::size_t r = 0; r < keep.size(); ++r) {
      m.patch_ids[r] = patch_ids[keep[r]];
      for (std::size_t k = 0; k < cols; ++k) m.at(r, k) = at(keep[r], k);
    }
    return m;
  }

  bool operator==(const IrradianceMatrix&) const = default;
};

/// Column k holds patch_irradiance of every patch against vantage k. Columns are computed in parallel.
inline IrradianceMatrix build_irradiance_matrix(const LightSource& light, std::span<const Vec3> vantages,
                                                std::span<const SurfacePatch> patches, const VisibilityGraph& vis,
                                                const IntegrationOptions& opt = {}) {
  light.validate();
  if (vis.light_count() != vantages.size() || vis.patch_count() != patches.size()) {
    throw std::invalid_argument("visibility graph dimensions do not match vantages/patches");
  }
  IrradianceMatrix m(patches.size(), vantages.size());
  parallel_for(vantages.size(), [&](std::size_t k) {
    for (std::size_t i = 0; i < patches.size(); ++i) {
      m.at(i, k) = patch_irradiance(light, vantages[k], patches[i], vis.light_sees_patch(k, i), opt);
    }
  });
  return m;
}

}  // namespace uvplan
