#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "uvplan/matrix_io.hpp"
#include "uvplan/radiometry.hpp"

using namespace uvplan;

namespace {

SurfacePatch panel(Vec2 a, Vec2 b, double z0, double z1) {
  SurfacePatch p;
  p.geometry = WallPanel{a, b, z0, z1};
  const Vec2 d = (b - a) * (1.0 / norm(b - a));
  p.normal = {-d.y, d.x, 0.0};
  p.area = norm(b - a) * (z1 - z0);
  p.centroid = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.5 * (z0 + z1)};
  return p;
}

double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST(PointDensity, FacingAtOneMetre) {
  EXPECT_NEAR(point_irradiance_density({0, 0, 1}, {0, 0, 0}, {0, 0, 1}, 80.0), 80.0 / (4.0 * kPi), 1e-12);
  EXPECT_NEAR(point_irradiance_density({0, 0, 1}, {0, 0, 0}, {0, 0, 1}, 80.0), 6.3662, 5e-5);
}

TEST(PointDensity, InverseSquare) {
  EXPECT_NEAR(point_irradiance_density({0, 0, 2}, {0, 0, 0}, {0, 0, 1}, 80.0), 1.59155, 5e-6);
}

TEST(PointDensity, GrazingAndBackFacingAreZero) {
  EXPECT_EQ(point_irradiance_density({1, 0, 0}, {0, 0, 0}, {0, 0, 1}, 80.0), 0.0);
  EXPECT_EQ(point_irradiance_density({0, 0, -1}, {0, 0, 0}, {0, 0, 1}, 80.0), 0.0);
}

TEST(PointDensity, CoincidentLightIsDomainError) {
  EXPECT_THROW(point_irradiance_density({0, 0, 0}, {0, 0, 5e-10}, {0, 0, 1}, 80.0), std::domain_error);
}

TEST(PatchIrradiance, InvisibleIsZero) {
  const SurfacePatch p = panel({0, 0}, {1, 0}, 0, 1);
  EXPECT_EQ(patch_irradiance(LightSource::point(80), {0.5, 1, 0.5}, p, false), 0.0);
}

TEST(PatchIrradiance, OnAxisWallPatchMatchesMonteCarlo) {
  const SurfacePatch p = panel({0, 0}, {0.5, 0}, 0, 2);
  const Vec3 light{0.25, 1.0, 1.0};
  const double got = patch_irradiance(LightSource::point(80), light, p, true);
  const double mc = oracle::monte_carlo_panel_irradiance(light, std::get<WallPanel>(p.geometry), p.normal, 80, 1000, 1);
  EXPECT_LT(relative_error(got, mc), 1e-3);
}

TEST(PatchIrradiance, RandomPanelsMatchMonteCarlo) {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 100; ++i) {
    const oracle::PanelConfig cfg = oracle::random_panel_config(gen);
    const double got = patch_irradiance(LightSource::point(80), cfg.light, cfg.patch, true);
    const double mc = oracle::monte_carlo_panel_irradiance(cfg.light, std::get<WallPanel>(cfg.patch.geometry),
                                                           cfg.patch.normal, 80, 1000, 100 + i);
    ASSERT_GT(mc, 0.0);
    EXPECT_LT(relative_error(got, mc), 1e-3) << "config " << i;
  }
}

TEST(PatchIrradiance, RandomTrianglesMatchMonteCarlo) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const TrianglePanel t{{u(gen), u(gen), 0.0}, {u(gen), u(gen), 0.0}, {u(gen), u(gen), 0.0}};
    if (triangle_area(t.a, t.b, t.c) < 0.05) continue;
    SurfacePatch p;
    p.geometry = t;
    p.normal = {0, 0, 1};
    const Vec3 light{u(gen), u(gen), 0.3 + std::abs(u(gen))};
    const double got = patch_irradiance(LightSource::point(80), light, p, true);
    const double mc = oracle::monte_carlo_triangle_irradiance(light, t, p.normal, 80, 1000, 200 + i);
    EXPECT_LT(relative_error(got, mc), 1e-3) << "triangle " << i;
  }
}

TEST(PatchIrradiance, TinyPatchConvergesToMidpoint) {
  const Vec3 light{0.3, 1.2, 0.8};
  for (double size : {1e-2, 1e-3}) {
    const SurfacePatch p = panel({0, 0}, {size, 0}, 0.5, 0.5 + size);
    const double mid = point_irradiance_density(light, p.centroid, p.normal, 80);
    EXPECT_LT(relative_error(patch_irradiance(LightSource::point(80), light, p, true), mid), 1e-4) << size;
  }
}

TEST(PatchIrradiance, MidpointOnlyOption) {
  const SurfacePatch p = panel({0, 0}, {0.5, 0}, 0, 2);
  const Vec3 light{0.1, 0.7, 1.4};
  IntegrationOptions opt;
  opt.midpoint_only = true;
  EXPECT_DOUBLE_EQ(patch_irradiance(LightSource::point(80), light, p, true, opt),
                   point_irradiance_density(light, p.centroid, p.normal, 80));
}

TEST(PatchIrradiance, SingleSampleCylinderEqualsPoint) {
  const SurfacePatch p = panel({0, 0}, {0.5, 0}, 0, 2);
  const Vec3 pos{0.1, 0.7, 0.0};
  const LightSource cyl = LightSource::cylinder(80, {0, 0, 0.5}, {0, 0, 1.5}, 1);
  EXPECT_DOUBLE_EQ(patch_irradiance(cyl, pos, p, true), patch_irradiance(LightSource::point(80), {0.1, 0.7, 1.0}, p, true));
}

TEST(PatchIrradiance, CylinderSplitsPowerAcrossEmitters) {
  const LightSource cyl = LightSource::cylinder(80, {0, 0, 0}, {0, 0, 1}, 4);
  const auto e = cyl.emitters({1, 1, 0});
  ASSERT_EQ(e.size(), 4u);
  EXPECT_DOUBLE_EQ(cyl.emitter_power(), 20.0);
  EXPECT_DOUBLE_EQ(e.front().z, 0.125);
  EXPECT_DOUBLE_EQ(e.back().z, 0.875);
}

TEST(IrradianceMatrix, SinglePatchSingleVantage) {
  SurfacePatch p = panel({-1e-4, 0}, {1e-4, 0}, -1e-4, 1e-4);
  p.centroid = {0, 0, 0};
  const std::vector<Vec3> v{{0, 1, 0}};
  const std::vector<SurfacePatch> patches{p};
  const VisibilityGraph vis(v, patches, {});
  ASSERT_TRUE(vis.light_sees_patch(0, 0));
  const IrradianceMatrix m = build_irradiance_matrix(LightSource::point(80), v, patches, vis);
  EXPECT_NEAR(m.at(0, 0), 6.3662, 1e-4);
}

TEST(IrradianceMatrix, OccludedVantageGivesZeroColumn) {
  World2p5D w;
  w.bounds = {{0, 0}, {4, 4}};
  w.obstacles = {{{1.9, 0.1}, {2.1, 0.1}, {2.1, 3.9}, {1.9, 3.9}}};
  const auto patches = discretize_surfaces(w, 0.5);
  const std::vector<Vec3> vantages{{1.0, 2.0, 1.0}, {3.0, 2.0, 1.0}};
  const VisibilityGraph vis = build_visibility_graph(vantages, patches, w);
  const IrradianceMatrix m = build_irradiance_matrix(LightSource::point(80), vantages, patches, vis);
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (!vis.light_sees_patch(0, i)) { EXPECT_EQ(m.at(i, 0), 0.0); }
    if (vis.light_sees_patch(1, i)) { EXPECT_GT(m.at(i, 1), 0.0); }
  }
}

TEST(IrradianceMatrix, DoublingPowerDoublesEntriesExactly) {
  const World2p5D w = generate_random_room(4, {{0, 0}, {4, 4}}, 10, 2.0);
  const auto patches = discretize_surfaces(w, 0.25);
  const std::vector<Vec3> vantages{{0.3, 0.3, 1.0}, {3.7, 3.7, 1.0}, {0.3, 3.7, 1.0}};
  const VisibilityGraph vis = build_visibility_graph(vantages, patches, w);
  const IrradianceMatrix a = build_irradiance_matrix(LightSource::point(80), vantages, patches, vis);
  const IrradianceMatrix b = build_irradiance_matrix(LightSource::point(160), vantages, patches, vis);
  for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_EQ(b.values[i], 2.0 * a.values[i]);
}

TEST(IrradianceMatrix, EmptyRoomCentreLightsEveryPatch) {
  World2p5D w;
  w.bounds = {{0, 0}, {5, 5}};
  const auto patches = discretize_surfaces(w, 0.25);
  const std::vector<Vec3> vantages{{2.5, 2.5, 1.0}};
  const VisibilityGraph vis = build_visibility_graph(vantages, patches, w);
  const IrradianceMatrix m = build_irradiance_matrix(LightSource::point(80), vantages, patches, vis);
  for (std::size_t i = 0; i < m.rows; ++i) EXPECT_TRUE(m.row_nonzero(i));
}

TEST(IrradianceMatrix, SelectionKeepsIds) {
  IrradianceMatrix m(3, 4);
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = static_cast<double>(i);
  const std::vector<std::size_t> cols{3, 1}, rows{2};
  const IrradianceMatrix s = m.select_columns(cols).select_rows(rows);
  EXPECT_EQ(s.vantage_ids, cols);
  EXPECT_EQ(s.patch_ids, rows);
  EXPECT_EQ(s.at(0, 0), m.at(2, 3));
  EXPECT_EQ(s.at(0, 1), m.at(2, 1));
}

TEST(MatrixIo, RoundTripIsBitExact) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  IrradianceMatrix m(7, 3);
  for (double& v : m.values) v = u(gen);
  m.patch_ids = {10, 11, 12, 13, 14, 15, 16};
  const auto path = std::filesystem::temp_directory_path() / "uvplan_matrix_roundtrip.bin";
  save_irradiance_matrix(m, path);
  EXPECT_EQ(load_irradiance_matrix(path), m);
  std::filesystem::remove(path);
}

TEST(MatrixIo, TruncatedPayloadRejected) {
  IrradianceMatrix m(2, 2);
  std::string bytes = serialize_irradiance_matrix(m);
  bytes.pop_back();
  EXPECT_THROW(deserialize_irradiance_matrix(bytes), std::runtime_error);
  EXPECT_THROW(deserialize_irradiance_matrix("JUNK\n{}\n"), std::runtime_error);
}
