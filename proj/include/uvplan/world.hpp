#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "uvplan/geometry.hpp"
#include "uvplan/rng.hpp"

namespace uvplan {

/// Planar room with full-height extruded walls and prism obstacles.
/// Lengths are meters. Obstacle vertices are counter-clockwise.
struct World2p5D {
  Rect bounds;
  double wall_height = 2.0;
  std::vector<Polygon> obstacles;
  double patch_resolution = 0.125;

  bool operator==(const World2p5D&) const = default;

  /// Boundary walls as a counter-clockwise rectangle.
  std::array<Vec2, 4> boundary() const {
    return {bounds.min, Vec2{bounds.max.x, bounds.min.y}, bounds.max, Vec2{bounds.min.x, bounds.max.y}};
  }

  void validate() const {
    if (!(bounds.width() > 0.0 && bounds.depth() > 0.0)) throw std::invalid_argument("world bounds are degenerate");
    if (!(wall_height > 0.0)) throw std::invalid_argument("wall_height must be positive");
    if (!(patch_resolution > 0.0)) throw std::invalid_argument("patch_resolution must be positive");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const Polygon& poly = obstacles[i];
      if (!polygon_is_simple(poly)) {
        throw std::invalid_argument("obstacle " + std::to_string(i) + " is not a simple polygon");
      }
      for (Vec2 v : poly) {
        if (!bounds.strictly_contains(v)) {
          throw std::invalid_argument("obstacle " + std::to_string(i) + " is not strictly inside bounds");
        }
      }
    }
  }
};

/// Triangle mesh environment; normals follow the counter-clockwise winding
/// and point toward the side the light is expected to occupy.
struct TriMeshWorld {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;

  bool operator==(const TriMeshWorld&) const = default;

  static constexpr double kMinTriangleArea = 1e-14;

  /// Builds the mesh, computing per-triangle normals. Throws on bad indices or zero-area faces.
  static TriMeshWorld from_triangles(std::vector<Vec3> vertices, std::vector<std::array<std::uint32_t, 3>> triangles) {
    TriMeshWorld mesh{std::move(vertices), std::move(triangles), {}};
    mesh.normals.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      for (std::uint32_t idx : tri) {
        if (idx >= mesh.vertices.size()) {
          throw std::invalid_argument("triangle " + std::to_string(t) + " has out-of-range vertex index");
        }
      }
      const Vec3 n = cross(mesh.vertices[tri[1]] - mesh.vertices[tri[0]], mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
      const double len = norm(n);
      if (!(0.5 * len > kMinTriangleArea)) {
        throw std::invalid_argument("triangle " + std::to_string(t) + " is degenerate (zero area)");
      }
      mesh.normals.push_back(n * (1.0 / len));
    }
    return mesh;
  }

  std::array<Vec3, 3> corners(std::size_t t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }

  double area(std::size_t t) const {
    const auto c = corners(t);
    return triangle_area(c[0], c[1], c[2]);
  }

  std::pair<Vec3, Vec3> bounding_box() const {
    Vec3 lo{INFINITY, INFINITY, INFINITY};
    Vec3 hi{-INFINITY, -INFINITY, -INFINITY};
    for (Vec3 v : vertices) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    return {lo, hi};
  }
};

using AnyWorld = std::variant<World2p5D, TriMeshWorld>;

/// Vertical rectangle standing on the floorplan segment a->b.
struct WallPanel {
  Vec2 a;
  Vec2 b;
  double z0 = 0.0;
  double z1 = 0.0;
};

struct TrianglePanel {
  Vec3 a;
  Vec3 b;
  Vec3 c;
};

/// Where a patch came from: polygon -1 is the room boundary, -2 a mesh
/// triangle (edge then holds the triangle index).
struct SurfaceRef {
  int polygon = -1;
  int edge = 0;

  static constexpr int kBoundary = -1;
  static constexpr int kMesh = -2;
};

struct SurfacePatch {
  std::size_t id = 0;
  std::variant<WallPanel, TrianglePanel> geometry;
  double area = 0.0;
  Vec3 centroid;
  Vec3 normal;
  SurfaceRef source;
};

struct RoomGenParams {
  double min_circumradius = 0.2;
  double max_circumradius = 0.8;
  double max_shear = 0.5;
  int min_sides = 3;
  int max_sides = 8;
  int max_retries = 1000;
};

/// Random room: each obstacle is a regular polygon with a random number of
/// sides, rotated, scaled, sheared and displaced until it fits strictly
/// inside the bounds. Obstacles may overlap one another.
inline World2p5D generate_random_room(std::uint64_t seed, Rect bounds, int n_obstacles, double wall_height,
                                      const RoomGenParams& params = {}) {
  if (n_obstacles < 0) throw std::invalid_argument("n_obstacles must be non-negative");
  if (!(bounds.width() > 0.0 && bounds.depth() > 0.0)) throw std::invalid_argument("bounds are degenerate");
  World2p5D world;
  world.bounds = bounds;
  world.wall_height = wall_height;
  Rng rng(seed);
  for (int o = 0; o < n_obstacles; ++o) {
    const int sides = static_cast<int>(rng.uniform_int(params.min_sides, params.max_sides));
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double radius = rng.uniform(params.min_circumradius, params.max_circumradius);
    const double shear = rng.uniform(-params.max_shear, params.max_shear);
    Polygon shape;
    shape.reserve(static_cast<std::size_t>(sides));
    for (int k = 0; k < sides; ++k) {
      const double ang = phase + 2.0 * kPi * k / sides;
      const double x = radius * std::cos(ang);
      const double y = radius * std::sin(ang);
      // Shear keeps the determinant at 1, so orientation stays counter-clockwise.
      shape.push_back({x + shear * y, y});
    }
    bool placed = false;
    for (int attempt = 0; attempt < params.max_retries && !placed; ++attempt) {
      const Vec2 offset{rng.uniform(bounds.min.x, bounds.max.x), rng.uniform(bounds.min.y, bounds.max.y)};
      Polygon poly;
      poly.reserve(shape.size());
      bool inside = true;
      for (Vec2 v : shape) {
        const Vec2 p = v + offset;
        inside = inside && bounds.strictly_contains(p);
        poly.push_back(p);
      }
      if (inside) {
        world.obstacles.push_back(std::move(poly));
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("obstacle placement failed after " + std::to_string(params.max_retries) +
                               " retries (seed " + std::to_string(seed) + ", obstacle " + std::to_string(o) + ")");
    }
  }
  return world;
}

/// Obstacle count for room `seed` of a batch, uniform in [lo, hi].
inline int sample_obstacle_count(std::uint64_t seed, int lo, int hi) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  return static_cast<int>(rng.uniform_int(lo, hi));
}

/// Splits every wall (room boundary and obstacle faces, full height) into
/// ceil(length / resolution) equal-width vertical panels.
inline std::vector<SurfacePatch> discretize_surfaces(const World2p5D& world, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  std::vector<SurfacePatch> patches;
  auto add_polygon = [&](std::span<const Vec2> poly, int polygon_index, bool inward) {
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const Vec2 a = poly[e];
      const Vec2 b = poly[(e + 1) % poly.size()];
      const Vec2 d = b - a;
      const double len = norm(d);
      if (len <= 0.0) continue;
      // Left normal of a CCW edge points inside the polygon.
      Vec2 n{-d.y / len, d.x / len};
      if (!inward) n = n * -1.0;
      const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(len / resolution - 1e-9)));
      for (std::size_t k = 0; k < count; ++k) {
        const Vec2 p0 = a + d * (static_cast<double>(k) / count);
        const Vec2 p1 = a + d * (static_cast<double>(k + 1) / count);
        SurfacePatch patch;
        patch.id = patches.size();
        patch.geometry = WallPanel{p0, p1, 0.0, world.wall_height};
        patch.area = norm(p1 - p0) * world.wall_height;
        patch.centroid = lift((p0 + p1) * 0.5, 0.5 * world.wall_height);
        patch.normal = {n.x, n.y, 0.0};
        patch.source = {polygon_index, static_cast<int>(e)};
        patches.push_back(patch);
      }
    }
  };
  const auto walls = world.boundary();
  add_polygon(walls, SurfaceRef::kBoundary, true);
  for (std::size_t o = 0; o < world.obstacles.size(); ++o) {
    add_polygon(world.obstacles[o], static_cast<int>(o), false);
  }
  return patches;
}

/// One patch per mesh triangle.
inline std::vector<SurfacePatch> discretize_surfaces(const TriMeshWorld& mesh) {
  std::vector<SurfacePatch> patches;
  patches.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto c = mesh.corners(t);
    SurfacePatch patch;
    patch.id = t;
    patch.geometry = TrianglePanel{c[0], c[1], c[2]};
    patch.area = mesh.area(t);
    patch.centroid = (c[0] + c[1] + c[2]) * (1.0 / 3.0);
    patch.normal = mesh.normals[t];
    patch.source = {SurfaceRef::kMesh, static_cast<int>(t)};
    patches.push_back(patch);
  }
  return patches;
}

inline double total_wall_area(const World2p5D& world) {
  double perimeter = 2.0 * (world.bounds.width() + world.bounds.depth());
  for (const Polygon& poly : world.obstacles) {
    for (std::size_t i = 0; i < poly.size(); ++i) perimeter += norm(poly[(i + 1) % poly.size()] - poly[i]);
  }
  return perimeter * world.wall_height;
}

}  // namespace uvplan
