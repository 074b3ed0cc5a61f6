#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvplan/geometry.hpp"
#include "uvplan/parallel.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// A floorplan edge that blocks light: a room wall or an obstacle face.
struct OccludingEdge {
  Vec2 a;
  Vec2 b;
  SurfaceRef ref;
};

inline std::vector<OccludingEdge> occluding_edges(const World2p5D& world) {
  std::vector<OccludingEdge> edges;
  const auto walls = world.boundary();
  for (int e = 0; e < 4; ++e) edges.push_back({walls[e], walls[(e + 1) % 4], {SurfaceRef::kBoundary, e}});
  for (std::size_t o = 0; o < world.obstacles.size(); ++o) {
    const Polygon& poly = world.obstacles[o];
    for (std::size_t e = 0; e < poly.size(); ++e) {
      edges.push_back({poly[e], poly[(e + 1) % poly.size()], {static_cast<int>(o), static_cast<int>(e)}});
    }
  }
  return edges;
}

inline bool same_surface(SurfaceRef a, SurfaceRef b) { return a.polygon == b.polygon && a.edge == b.edge; }

/// True iff the closed floorplan segment from->to touches no occluding edge
/// other than the ones it starts or ends on. Grazing contact counts as blocked.
inline bool floorplan_clear(Vec2 from, Vec2 to, std::span<const OccludingEdge> edges, const SurfaceRef* skip_from,
                            const SurfaceRef* skip_to) {
  const double min_x = std::min(from.x, to.x);
  const double max_x = std::max(from.x, to.x);
  const double min_y = std::min(from.y, to.y);
  const double max_y = std::max(from.y, to.y);
  for (const OccludingEdge& e : edges) {
    if (skip_from && same_surface(e.ref, *skip_from)) continue;
    if (skip_to && same_surface(e.ref, *skip_to)) continue;
    if (std::max(e.a.x, e.b.x) < min_x || std::min(e.a.x, e.b.x) > max_x || std::max(e.a.y, e.b.y) < min_y ||
        std::min(e.a.y, e.b.y) > max_y) {
      continue;
    }
    if (segments_intersect(from, to, e.a, e.b)) return false;
  }
  return true;
}

/// Light on the outward side of the patch.
inline bool front_facing(Vec3 light, const SurfacePatch& patch) {
  return dot(light - patch.centroid, patch.normal) > 0.0;
}

inline bool segment_visible(Vec3 light, const SurfacePatch& patch, std::span<const OccludingEdge> edges) {
  return front_facing(light, patch) && floorplan_clear(light.xy(), patch.centroid.xy(), edges, nullptr, &patch.source);
}

/// Midpoint visibility of a wall patch from a light position in a 2.5D world.
inline bool segment_visible(Vec3 light, const SurfacePatch& patch, const World2p5D& world) {
  const auto edges = occluding_edges(world);
  return segment_visible(light, patch, edges);
}

/// Visibility among light positions and patch midpoints. Nodes [0, K) are
/// lights, [K, K + N) are patch midpoints. Light-patch pairs are precomputed;
/// other pairs are evaluated on demand with the same rules.
class VisibilityGraph {
 public:
  VisibilityGraph() = default;

  VisibilityGraph(std::span<const Vec3> lights, std::span<const SurfacePatch> patches, std::vector<OccludingEdge> edges)
      : lights_(lights.begin(), lights.end()), patches_(patches.begin(), patches.end()), edges_(std::move(edges)) {
    light_patch_.assign(lights_.size() * patches_.size(), 0);
    parallel_for(lights_.size(), [&](std::size_t k) {
      for (std::size_t i = 0; i < patches_.size(); ++i) {
        light_patch_[k * patches_.size() + i] = segment_visible(lights_[k], patches_[i], edges_) ? 1 : 0;
      }
    });
  }

  std::size_t light_count() const { return lights_.size(); }
  std::size_t patch_count() const { return patches_.size(); }
  std::size_t node_count() const { return lights_.size() + patches_.size(); }

  bool light_sees_patch(std::size_t light, std::size_t patch) const {
    return light_patch_[light * patches_.size() + patch] != 0;
  }

  bool edge(std::size_t a, std::size_t b) const {
    if (a == b) return true;
    const std::size_t k = lights_.size();
    if (a < k && b < k) return floorplan_clear(lights_[a].xy(), lights_[b].xy(), edges_, nullptr, nullptr);
    if (a < k) return light_sees_patch(a, b - k);
    if (b < k) return light_sees_patch(b, a - k);
    const SurfacePatch& p = patches_[a - k];
    const SurfacePatch& q = patches_[b - k];
    return front_facing(q.centroid, p) && front_facing(p.centroid, q) &&
           floorplan_clear(p.centroid.xy(), q.centroid.xy(), edges_, &p.source, &q.source);
  }

 private:
  std::vector<Vec3> lights_;
  std::vector<SurfacePatch> patches_;
  std::vector<OccludingEdge> edges_;
  std::vector<std::uint8_t> light_patch_;
};

inline VisibilityGraph build_visibility_graph(std::span<const Vec3> lights, std::span<const SurfacePatch> patches,
                                              const World2p5D& world) {
  return VisibilityGraph(lights, patches, occluding_edges(world));
}

}  // namespace uvplan
