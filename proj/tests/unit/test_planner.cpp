#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uvplan/planner.hpp"
#include "uvplan/svg.hpp"

using namespace uvplan;

namespace {

World2p5D room(double side, double resolution) {
  World2p5D w;
  w.bounds = {{0, 0}, {side, side}};
  w.patch_resolution = resolution;
  return w;
}

PlannerConfig coarse_config() {
  PlannerConfig cfg;
  cfg.grid_spacing = 0.5;
  cfg.robot = RobotModel::point();
  return cfg;
}

}  // namespace

TEST(Planner, EmptyRoomTwoStageCoversEverything) {
  const PlanningContext ctx = build_context(room(4, 0.25), coarse_config());
  const Plan plan = plan_two_stage(ctx, coarse_config());
  EXPECT_DOUBLE_EQ(plan.coverage.coverage_fraction, 1.0);
  EXPECT_NEAR(plan.total_time, plan.total_dwell + plan.path_length / 0.5, 1e-9);
  EXPECT_EQ(plan.details["certificate_ok"], true);
}

TEST(Planner, TourVisitsExactlyThePositiveDwellVantages) {
  const PlannerConfig cfg = coarse_config();
  World2p5D w = generate_random_room(2, {{0, 0}, {4, 4}}, 10, 2.0);
  w.patch_resolution = 0.25;
  const PlanningContext ctx = build_context(w, cfg);
  const Plan plan = plan_two_stage(ctx, cfg);
  std::vector<std::size_t> positive;
  for (std::size_t k = 0; k < plan.dwell.size(); ++k) {
    EXPECT_GE(plan.dwell[k], 0.0);
    if (plan.dwell[k] > 0.0) positive.push_back(k);
  }
  std::vector<std::size_t> order = plan.tour.order;
  std::sort(order.begin(), order.end());
  EXPECT_EQ(order, positive);
  EXPECT_NEAR(polyline_length(plan.path), plan.path_length, 1e-9);
  EXPECT_EQ(plan.path.front().x, plan.path.back().x);
}

TEST(Planner, RandomRoomsCoverAllVisibleArea) {
  const PlannerConfig cfg = coarse_config();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    World2p5D w = generate_random_room(seed, {{0, 0}, {4, 4}}, sample_obstacle_count(seed, 7, 19), 2.0);
    w.patch_resolution = 0.25;
    const PlanningContext ctx = build_context(w, cfg);
    const Plan mobile = plan_two_stage(ctx, cfg);
    const Plan fixed = plan_static_baseline(ctx, cfg);
    EXPECT_NEAR(mobile.coverage.visible_coverage_fraction, 1.0, 1e-12) << seed;
    EXPECT_GE(mobile.coverage.coverage_fraction, fixed.coverage.coverage_fraction) << seed;
    for (std::size_t i = 0; i < ctx.patches.size(); ++i) {
      if (ctx.irradiance.row_nonzero(i)) { EXPECT_GE(mobile.coverage.fluence[i], cfg.mu_min - 1e-6); }
    }
  }
}

TEST(Planner, StaticBaselineDwellsUntilEveryLitPatchIsDosed) {
  const PlannerConfig cfg = coarse_config();
  const PlanningContext ctx = build_context(room(4, 0.5), cfg);
  const Plan plan = plan_static_baseline(ctx, cfg);
  ASSERT_EQ(plan.tour.order.size(), 1u);
  const std::size_t k = plan.tour.order[0];
  double need = 0.0;
  for (std::size_t i = 0; i < ctx.irradiance.rows; ++i) need = std::max(need, cfg.mu_min / ctx.irradiance.at(i, k));
  EXPECT_DOUBLE_EQ(plan.total_dwell, need);
  EXPECT_EQ(plan.travel_time, 0.0);
  EXPECT_DOUBLE_EQ(plan.coverage.coverage_fraction, 1.0);
  // A 4 x 4 room at 0.5 m is symmetric; any of the four central points is optimal.
  EXPECT_NEAR(std::abs(ctx.vantages[k].x - 2.0), 0.25, 1e-9);
  EXPECT_NEAR(std::abs(ctx.vantages[k].y - 2.0), 0.25, 1e-9);
}

TEST(Planner, MobileBeatsStaticInEmptyRoom) {
  const PlannerConfig cfg = coarse_config();
  const PlanningContext ctx = build_context(room(4, 0.25), cfg);
  EXPECT_LT(plan_two_stage(ctx, cfg).total_time, plan_static_baseline(ctx, cfg).total_time);
}

TEST(Planner, DwellScalesLinearlyWithDoseAndInverselyWithPower) {
  PlannerConfig cfg = coarse_config();
  const PlanningContext base = build_context(room(4, 0.5), cfg);
  const double dwell = plan_two_stage(base, cfg).total_dwell;
  cfg.mu_min = 560.0;
  EXPECT_NEAR(plan_two_stage(base, cfg).total_dwell, 2.0 * dwell, 1e-6 * dwell);
  cfg.mu_min = 280.0;
  cfg.light = LightSource::point(160.0);
  const PlanningContext bright = build_context(room(4, 0.5), cfg);
  EXPECT_NEAR(plan_two_stage(bright, cfg).total_dwell, 0.5 * dwell, 1e-6 * dwell);
}

TEST(EvaluateFluence, ZeroDwellCoversNothingAndFluenceIsLinear) {
  const PlannerConfig cfg = coarse_config();
  const PlanningContext ctx = build_context(room(4, 0.5), cfg);
  const CoverageReport none = evaluate_fluence(std::vector<double>(ctx.vantages.size(), 0.0), ctx.irradiance, ctx.patches, 280);
  EXPECT_EQ(none.coverage_fraction, 0.0);
  std::vector<double> t(ctx.vantages.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = 3.0 + static_cast<double>(k % 5);
  std::vector<double> t2 = t;
  for (double& v : t2) v *= 2.0;
  const CoverageReport a = evaluate_fluence(t, ctx.irradiance, ctx.patches, 280);
  const CoverageReport b = evaluate_fluence(t2, ctx.irradiance, ctx.patches, 280);
  for (std::size_t i = 0; i < a.fluence.size(); ++i) {
    EXPECT_EQ(b.fluence[i], 2.0 * a.fluence[i]);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) sum += ctx.irradiance.at(i, k) * t[k];
    EXPECT_NEAR(a.fluence[i], sum, 1e-9 * sum);
  }
  EXPECT_GE(a.coverage_fraction, 0.0);
  EXPECT_LE(a.coverage_fraction, 1.0);
}

TEST(EvaluateFluence, DimensionMismatchRejected) {
  IrradianceMatrix m(3, 1);
  std::vector<SurfacePatch> patches(2);
  EXPECT_THROW(evaluate_fluence({1.0}, m, patches, 280), std::invalid_argument);
}

TEST(PlannerMilp, NeverWorseThanTwoStage) {
  const PlannerConfig cfg = coarse_config();
  World2p5D w = generate_random_room(6, {{0, 0}, {4, 4}}, 14, 2.0);
  w.patch_resolution = 0.5;
  const PlanningContext ctx = build_context(w, cfg);
  const Plan two = plan_two_stage(ctx, cfg);
  const Plan milp = plan_milp(ctx, cfg);
  EXPECT_EQ(milp.details["status"], "optimal");
  EXPECT_LE(milp.total_time, two.total_time * (1.0 + 1e-9));
  EXPECT_NEAR(milp.total_time, milp.details["objective"].get<double>(), 1e-6 * milp.total_time);
  EXPECT_NEAR(milp.coverage.visible_coverage_fraction, two.coverage.visible_coverage_fraction, 1e-12);
}

TEST(PlannerMilp, TooManyCandidatesIsStageError) {
  const PlannerConfig cfg = coarse_config();
  const PlanningContext ctx = build_context(room(4, 0.5), cfg);
  MilpPlanOptions opts;
  opts.candidates.resize(13);
  std::iota(opts.candidates.begin(), opts.candidates.end(), std::size_t{0});
  try {
    plan_milp(ctx, cfg, opts);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "milp");
  }
}

TEST(Planner, InvalidWorldReportsStage) {
  World2p5D w = room(4, 0.5);
  w.obstacles = {{{1, 1}, {2, 2}, {1, 2}, {2, 1}}};  // self-intersecting
  try {
    build_context(w, coarse_config());
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "world");
  }
}

TEST(Planner, MeshWorldCoversEveryLitTriangle) {
  // Closed 2 m box with inward normals.
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.push_back({(i & 1) ? 2.0 : 0.0, (i & 2) ? 2.0 : 0.0, (i & 4) ? 2.0 : 0.0});
  const std::vector<std::array<std::uint32_t, 3>> tris = {{0, 3, 2}, {0, 1, 3}, {4, 6, 7}, {4, 7, 5}, {0, 4, 5}, {0, 5, 1},
                                                          {2, 3, 7}, {2, 7, 6}, {0, 2, 6}, {0, 6, 4}, {1, 5, 7}, {1, 7, 3}};
  const TriMeshWorld box = TriMeshWorld::from_triangles(v, tris);
  PlannerConfig cfg;
  cfg.grid_spacing = 0.7;
  cfg.robot = RobotModel::point();
  cfg.raster.resolution = 64;
  const PlanningContext ctx = build_context(box, cfg);
  EXPECT_TRUE(ctx.volumetric);
  const Plan plan = plan_two_stage(ctx, cfg);
  EXPECT_DOUBLE_EQ(plan.coverage.coverage_fraction, 1.0);
}

TEST(PlanJson, CarriesTimesAndCoverage) {
  const PlannerConfig cfg = coarse_config();
  const PlanningContext ctx = build_context(room(4, 0.5), cfg);
  const Plan plan = plan_two_stage(ctx, cfg);
  const nlohmann::json j = plan_to_json(plan, ctx);
  EXPECT_EQ(j["format"], "uvplan-plan");
  EXPECT_EQ(j["method"], "lp-tsp");
  EXPECT_DOUBLE_EQ(j["total_time"].get<double>(), plan.total_time);
  EXPECT_EQ(j["coverage"]["fluence"].size(), ctx.patches.size());
  EXPECT_EQ(j["tour"]["stops"].size(), plan.tour.order.size());
}

TEST(Svg, OnePolylinePerPatchAndOneTrajectory) {
  const PlannerConfig cfg = coarse_config();
  const World2p5D w = room(4, 0.5);
  const PlanningContext ctx = build_context(w, cfg);
  const Plan plan = plan_two_stage(ctx, cfg);
  const std::string svg = render_plan_svg(w, ctx, plan, cfg.mu_min);
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  EXPECT_EQ(polylines, ctx.patches.size());
  EXPECT_NE(svg.find("id=\"trajectory\""), std::string::npos);
  EXPECT_EQ(fluence_color(0.0, 280), "#ff0000");
  EXPECT_EQ(fluence_color(500.0, 280), "#00ff00");
}
