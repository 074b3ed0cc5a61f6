#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "uvplan/visibility.hpp"

using namespace uvplan;

namespace {

const Rect kRoom{{0.0, 0.0}, {4.0, 4.0}};

// Crossing-number test, written independently of the library's polygon code.
bool inside(Vec2 p, const Polygon& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

bool in_free_space(Vec2 p, const World2p5D& w) {
  if (!w.bounds.strictly_contains(p)) return false;
  for (const Polygon& poly : w.obstacles) {
    if (inside(p, poly)) return false;
  }
  return true;
}

/// Marches from the light toward the patch midpoint, stopping just short of it.
bool ray_march_visible(Vec3 light, const SurfacePatch& patch, const World2p5D& w, double step) {
  const Vec3 to_light = light - patch.centroid;
  if (to_light.x * patch.normal.x + to_light.y * patch.normal.y <= 0.0) return false;
  const Vec2 a = light.xy(), b = patch.centroid.xy();
  const double len = norm(b - a);
  const double stop = len - 10.0 * step;
  for (double s = 0.0; s < stop; s += step) {
    if (!in_free_space(a + (b - a) * (s / len), w)) return false;
  }
  return true;
}

/// Closest approach of the open segment to any obstacle vertex or the patch's neighbors' corners.
double tangency_clearance(Vec2 a, Vec2 b, const World2p5D& w) {
  double best = 1e9;
  for (const Polygon& poly : w.obstacles) {
    for (Vec2 v : poly) best = std::min(best, point_segment_distance(v, a, b));
  }
  return best;
}

Vec2 random_free_point(std::mt19937_64& gen, const World2p5D& w) {
  std::uniform_real_distribution<double> ux(w.bounds.min.x, w.bounds.max.x), uy(w.bounds.min.y, w.bounds.max.y);
  for (;;) {
    const Vec2 p{ux(gen), uy(gen)};
    if (in_free_space(p, w)) return p;
  }
}

}  // namespace

TEST(Visibility, EmptyRoomSeesAllWalls) {
  World2p5D w;
  w.bounds = kRoom;
  const auto patches = discretize_surfaces(w, 0.25);
  for (const SurfacePatch& p : patches) EXPECT_TRUE(segment_visible({2.0, 2.0, 1.0}, p, w));
}

TEST(Visibility, SquareObstacleBlocksFarSide) {
  World2p5D w;
  w.bounds = kRoom;
  w.obstacles = {{{1.5, 1.5}, {2.5, 1.5}, {2.5, 2.5}, {1.5, 2.5}}};
  const auto patches = discretize_surfaces(w, 0.25);
  const Vec3 light{2.0, 0.5, 1.0};
  for (const SurfacePatch& p : patches) {
    const bool north_face = p.source.polygon == 0 && std::abs(p.centroid.y - 2.5) < 1e-12;
    const bool north_wall_behind =
        p.source.polygon == SurfaceRef::kBoundary && p.centroid.y > 3.99 && std::abs(p.centroid.x - 2.0) < 0.3;
    if (north_face || north_wall_behind) { EXPECT_FALSE(segment_visible(light, p, w)) << p.id; }
  }
}

TEST(Visibility, BackFacingPatchInvisible) {
  World2p5D w;
  w.bounds = kRoom;
  w.obstacles = {{{1.0, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {1.0, 2.0}}};
  for (const SurfacePatch& p : discretize_surfaces(w, 0.5)) {
    if (p.source.polygon == 0 && p.normal.x > 0.5) { EXPECT_FALSE(segment_visible({0.5, 1.5, 1.0}, p, w)); }
  }
}

TEST(Visibility, PartitionWallSeparatesHalves) {
  World2p5D w;
  w.bounds = kRoom;
  // Thin wall touching neither boundary would leak; this one spans the room up to a hair.
  w.obstacles = {{{1.95, 1e-6}, {2.05, 1e-6}, {2.05, 4.0 - 1e-6}, {1.95, 4.0 - 1e-6}}};
  const auto patches = discretize_surfaces(w, 0.25);
  const Vec3 light{1.0, 2.0, 1.0};
  for (const SurfacePatch& p : patches) {
    if (p.centroid.x > 2.06) { EXPECT_FALSE(segment_visible(light, p, w)) << p.id; }
  }
}

TEST(Visibility, GraphIsSymmetricAndReflexive) {
  const World2p5D w = generate_random_room(3, kRoom, 10, 2.0);
  std::mt19937_64 gen(3);
  std::vector<Vec3> lights;
  for (int i = 0; i < 12; ++i) lights.push_back(lift(random_free_point(gen, w), 1.0));
  const auto patches = discretize_surfaces(w, 0.5);
  const VisibilityGraph g = build_visibility_graph(lights, patches, w);
  for (std::size_t a = 0; a < g.node_count(); ++a) {
    EXPECT_TRUE(g.edge(a, a));
    for (std::size_t b = a + 1; b < g.node_count(); b += 3) ASSERT_EQ(g.edge(a, b), g.edge(b, a)) << a << " " << b;
  }
  for (std::size_t k = 0; k < lights.size(); ++k) {
    for (std::size_t i = 0; i < patches.size(); ++i) EXPECT_EQ(g.light_sees_patch(k, i), segment_visible(lights[k], patches[i], w));
  }
}

TEST(Visibility, RemovingObstacleNeverHides) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const World2p5D w = generate_random_room(seed, kRoom, 12, 2.0);
    World2p5D fewer = w;
    fewer.obstacles.pop_back();
    std::mt19937_64 gen(seed);
    const auto patches = discretize_surfaces(w, 0.25);
    for (int l = 0; l < 10; ++l) {
      const Vec3 light = lift(random_free_point(gen, w), 1.0);
      for (const SurfacePatch& p : patches) {
        if (p.source.polygon == static_cast<int>(w.obstacles.size()) - 1) continue;
        if (segment_visible(light, p, w)) { EXPECT_TRUE(segment_visible(light, p, fewer)); }
      }
    }
  }
}

TEST(Visibility, AgreesWithRayMarching) {
  std::mt19937_64 gen(2718);
  std::size_t compared = 0, agree = 0;
  for (std::uint64_t seed = 1; compared < 1000; ++seed) {
    const World2p5D w = generate_random_room(seed, kRoom, 13, 2.0);
    const auto patches = discretize_surfaces(w, 0.125);
    for (int trial = 0; trial < 100 && compared < 1000; ++trial) {
      const Vec3 light = lift(random_free_point(gen, w), 1.0);
      const SurfacePatch& p = patches[std::uniform_int_distribution<std::size_t>(0, patches.size() - 1)(gen)];
      // A midpoint inside another overlapping obstacle is unreachable for both.
      if (!w.bounds.contains(p.centroid.xy())) continue;
      const double step = 2e-4;
      if (tangency_clearance(light.xy(), p.centroid.xy(), w) < 20.0 * step) continue;
      ++compared;
      agree += segment_visible(light, p, w) == ray_march_visible(light, p, w, step);
    }
  }
  EXPECT_EQ(agree, compared);
}

TEST(Visibility, DeskScaleBuildTime) {
  const World2p5D w = generate_random_room(5, kRoom, 13, 2.0);
  std::mt19937_64 gen(5);
  std::vector<Vec3> lights;
  for (int i = 0; i < 64; ++i) lights.push_back(lift(random_free_point(gen, w), 1.0));
  const auto patches = discretize_surfaces(w, 0.05);
  ASSERT_GE(patches.size(), 500u);
  const auto start = std::chrono::steady_clock::now();
  const VisibilityGraph g = build_visibility_graph(lights, patches, w);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(g.light_count(), 64u);
  EXPECT_LT(secs, 5.0);
}
