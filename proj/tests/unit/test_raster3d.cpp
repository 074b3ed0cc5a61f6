#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "uvplan/raster3d.hpp"

using namespace uvplan;

namespace {

/// Axis-aligned box with faces wound so normals point inward.
TriMeshWorld inward_box(Vec3 lo, Vec3 hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  // Outward-wound quads (a, b, c, d); reversing each gives inward normals.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  std::vector<std::array<std::uint32_t, 3>> tris;
  for (const auto& q : quads) {
    tris.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[2]), static_cast<std::uint32_t>(q[1])});
    tris.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[3]), static_cast<std::uint32_t>(q[2])});
  }
  return TriMeshWorld::from_triangles(v, tris);
}

/// Unit square on z = d centred on the axis, facing the origin.
TriMeshWorld facing_square(double d, double half) {
  return TriMeshWorld::from_triangles({{-half, -half, d}, {half, -half, d}, {half, half, d}, {-half, half, d}},
                                      {{{0, 2, 1}}, {{0, 3, 2}}});
}

struct Hit {
  std::int32_t triangle = kVoidPixel;
  bool ambiguous = false;
};

/// Nearest ray-triangle intersection; ambiguous when the ray grazes the edge of
/// a triangle at or in front of the nearest hit, or two hits are nearly equidistant.
Hit ray_cast(const TriMeshWorld& mesh, Vec3 o, Vec3 dir) {
  constexpr double kEdge = 1e-3;
  struct Candidate {
    double dist;
    bool inside, near_edge;
  };
  std::vector<Candidate> cand(mesh.triangles.size(), {0.0, false, false});
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto c = mesh.corners(t);
    const Vec3 e1 = c[1] - c[0], e2 = c[2] - c[0];
    const Vec3 p = cross(dir, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = o - c[0];
    const double u = dot(s, p) / det;
    const Vec3 q = cross(s, e1);
    const double v = dot(dir, q) / det;
    const double dist = dot(e2, q) / det;
    if (dist <= 1e-9) continue;
    cand[t] = {dist, u >= 0 && v >= 0 && u + v <= 1,
               u > -kEdge && v > -kEdge && u + v < 1 + kEdge && (u < kEdge || v < kEdge || u + v > 1 - kEdge)};
  }
  Hit best;
  double best_t = 1e300;
  for (std::size_t t = 0; t < cand.size(); ++t) {
    if (cand[t].inside && cand[t].dist < best_t) {
      best_t = cand[t].dist;
      best.triangle = static_cast<std::int32_t>(t);
    }
  }
  for (std::size_t t = 0; t < cand.size(); ++t) {
    if (cand[t].near_edge && cand[t].dist < best_t + 1e-6) best.ambiguous = true;
    if (cand[t].inside && static_cast<std::int32_t>(t) != best.triangle && cand[t].dist - best_t < 1e-6) best.ambiguous = true;
  }
  return best;
}

}  // namespace

TEST(Emission, SumsToPowerAndEachFaceToOneSixth) {
  for (int r : {8, 64, 512}) {
    const PowerEmissionTexture tex = precompute_emission(r, 80.0);
    EXPECT_NEAR(tex.total(), 80.0, 1e-9) << r;
    EXPECT_NEAR(tex.total() / 6.0, 80.0 / 6.0, 1e-9);
  }
}

TEST(Emission, CentrePixelsCarryMoreThanCorners) {
  const PowerEmissionTexture tex = precompute_emission(64, 80.0);
  EXPECT_GT(tex.at(31, 31), tex.at(0, 0));
  EXPECT_DOUBLE_EQ(tex.at(0, 0), tex.at(63, 63));
  EXPECT_DOUBLE_EQ(tex.at(10, 3), tex.at(3, 10));
}

TEST(Emission, ResolutionBelowEightRejected) { EXPECT_THROW(precompute_emission(4, 80.0), std::invalid_argument); }

TEST(Rasterize, SingleTriangleCoversItsFace) {
  const TriMeshWorld mesh = facing_square(1.0, 0.5);
  const VisibilityCube cube = rasterize_cube(mesh, {0, 0, 0}, 64);
  // Face 4 looks along +z; its central pixels see the square.
  EXPECT_NE(cube.at(4, 31, 31), kVoidPixel);
  EXPECT_NE(cube.at(4, 32, 32), kVoidPixel);
  EXPECT_EQ(cube.at(4, 0, 0), kVoidPixel);
  EXPECT_EQ(cube.at(5, 31, 31), kVoidPixel);
}

TEST(Rasterize, DepthTestKeepsNearest) {
  TriMeshWorld far = facing_square(2.0, 2.0);
  TriMeshWorld near = facing_square(1.0, 0.2);
  std::vector<Vec3> v = far.vertices;
  v.insert(v.end(), near.vertices.begin(), near.vertices.end());
  const TriMeshWorld both = TriMeshWorld::from_triangles(v, {{{0, 2, 1}}, {{0, 3, 2}}, {{4, 6, 5}}, {{4, 7, 6}}});
  const VisibilityCube cube = rasterize_cube(both, {0, 0, 0}, 64);
  const std::int32_t centre = cube.at(4, 32, 32);
  EXPECT_TRUE(centre == 2 || centre == 3);
  const std::int32_t rim = cube.at(4, 2, 32);
  EXPECT_TRUE(rim == 0 || rim == 1);
}

TEST(Rasterize, ClosedBoxHasNoVoidPixels) {
  const TriMeshWorld box = inward_box({-1, -2, -0.5}, {3, 1, 2});
  EXPECT_EQ(rasterize_cube(box, {0.3, -0.4, 0.1}, 128).void_count(), 0u);
}

TEST(Rasterize, AgreesWithRayCasting) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> verts;
  std::vector<std::array<std::uint32_t, 3>> tris;
  for (std::uint32_t t = 0; t < 40; ++t) {
    const Vec3 c{2.5 * u(gen), 2.5 * u(gen), 2.5 * u(gen)};
    if (norm(c) < 0.4) continue;
    const auto base = static_cast<std::uint32_t>(verts.size());
    for (int k = 0; k < 3; ++k) verts.push_back(c + Vec3{0.7 * u(gen), 0.7 * u(gen), 0.7 * u(gen)});
    tris.push_back({base, base + 1, base + 2});
  }
  const TriMeshWorld mesh = TriMeshWorld::from_triangles(verts, tris);
  const int r = 128;
  const VisibilityCube cube = rasterize_cube(mesh, {0, 0, 0}, r);
  std::uniform_int_distribution<int> face(0, 5), pix(0, r - 1);
  int compared = 0, agree = 0;
  for (int n = 0; n < 1000; ++n) {
    const int f = face(gen), i = pix(gen), j = pix(gen);
    const Hit h = ray_cast(mesh, {0, 0, 0}, cube.pixel_direction(f, i, j));
    if (h.ambiguous) continue;
    ++compared;
    agree += h.triangle == cube.at(f, i, j);
  }
  EXPECT_GT(compared, 900);
  EXPECT_EQ(agree, compared);
}

TEST(Flux, UnitSquareMatchesAnalyticAtR512) {
  // Solid angle of a 1 x 1 square at distance 1: 4 asin(a b / sqrt((a^2 + d^2)(b^2 + d^2))) with a = b = 1/2.
  const double omega = 4.0 * std::asin(0.25 / 1.25);
  const double analytic = 80.0 * omega / (4.0 * kPi);  // W on the square, area 1
  const auto e = triangle_irradiance(facing_square(1.0, 0.5), {0, 0, 0}, 512, 80.0);
  EXPECT_NEAR((e[0] + e[1]) * 0.5, analytic, 0.02 * analytic);
}

TEST(Flux, TriangleMatchesMonteCarloAndConverges) {
  const TriMeshWorld mesh = TriMeshWorld::from_triangles({{-0.4, -0.3, 1.2}, {0.6, 0.1, 0.9}, {0.0, 0.7, 1.1}}, {{{0, 2, 1}}});
  const TrianglePanel t{mesh.vertices[0], mesh.vertices[2], mesh.vertices[1]};
  const double mc = oracle::monte_carlo_triangle_irradiance({0, 0, 0}, t, mesh.normals[0], 80.0, 1000, 3);
  const double coarse = std::abs(triangle_irradiance(mesh, {0, 0, 0}, 32, 80.0)[0] - mc) / mc;
  const double fine = std::abs(triangle_irradiance(mesh, {0, 0, 0}, 512, 80.0)[0] - mc) / mc;
  EXPECT_LT(fine, 0.02);
  EXPECT_LT(fine, coarse);
}

TEST(Flux, NeverExceedsPower) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> verts;
    std::vector<std::array<std::uint32_t, 3>> tris;
    for (std::uint32_t t = 0; t < 30; ++t) {
      for (int k = 0; k < 3; ++k) verts.push_back({u(gen), u(gen), u(gen)});
      tris.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    const TriMeshWorld mesh = TriMeshWorld::from_triangles(verts, tris);
    const Vec3 c{0.1 * u(gen), 0.1 * u(gen), 0.1 * u(gen)};
    FluxBuffer flux;
    accumulate_flux(mesh, c, rasterize_cube(mesh, c, 64), precompute_emission(64, 80.0), flux);
    EXPECT_LE(flux.total(), 80.0 * (1.0 + 1e-12));
  }
}

TEST(Flux, ClosedBoxConservesEnergy) {
  const TriMeshWorld box = inward_box({-1, -2, -0.5}, {3, 1, 2});
  for (int r : {64, 256}) {
    FluxBuffer flux;
    const Vec3 c{0.3, -0.4, 0.1};
    accumulate_flux(box, c, rasterize_cube(box, c, r), precompute_emission(r, 80.0), flux);
    EXPECT_NEAR(flux.total(), 80.0, 80.0 * 1e-3) << r;
  }
}

TEST(Flux, FullyOccludedTriangleGetsExactlyZero) {
  TriMeshWorld wall = facing_square(1.0, 1.5);
  std::vector<Vec3> v = wall.vertices;
  for (Vec3 p : {Vec3{-0.2, -0.2, 2.0}, Vec3{0.2, -0.2, 2.0}, Vec3{0.0, 0.2, 2.0}}) v.push_back(p);
  const TriMeshWorld mesh = TriMeshWorld::from_triangles(v, {{{0, 2, 1}}, {{0, 3, 2}}, {{4, 6, 5}}});
  const auto e = triangle_irradiance(mesh, {0, 0, 0}, 256, 80.0);
  EXPECT_EQ(e[2], 0.0);
  EXPECT_GT(e[0], 0.0);
}

TEST(Flux, BackFacingTriangleGetsZero) {
  const TriMeshWorld mesh = TriMeshWorld::from_triangles({{-0.5, -0.5, 1}, {0.5, -0.5, 1}, {0, 0.5, 1}}, {{{0, 1, 2}}});
  ASSERT_GT(mesh.normals[0].z, 0.0);
  EXPECT_EQ(triangle_irradiance(mesh, {0, 0, 0}, 64, 80.0)[0], 0.0);
}

TEST(Flux, MatrixColumnsMatchPerVantageCalls) {
  const TriMeshWorld box = inward_box({0, 0, 0}, {2, 2, 2});
  const std::vector<Vec3> vantages{{0.5, 0.5, 1.0}, {1.5, 1.2, 0.7}};
  RasterOptions opt;
  opt.resolution = 64;
  const LightSource lamp = LightSource::cylinder(80, {0, 0, -0.3}, {0, 0, 0.3}, 3);
  const IrradianceMatrix m = build_irradiance_matrix(box, lamp, vantages, opt);
  ASSERT_EQ(m.rows, 12u);
  ASSERT_EQ(m.cols, 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto col = triangle_irradiance(box, lamp, vantages[k], opt);
    double flux = 0.0;
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_EQ(m.at(t, k), col[t]);
      flux += col[t] * box.area(t);
    }
    EXPECT_NEAR(flux, 80.0, 0.08);
  }
}
