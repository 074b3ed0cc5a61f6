#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvplan/lp.hpp"
#include "uvplan/milp.hpp"
#include "uvplan/radiometry.hpp"
#include "uvplan/raster3d.hpp"
#include "uvplan/roadmap.hpp"
#include "uvplan/tour.hpp"
#include "uvplan/visibility.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// A failure tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class RoadmapKind { grid, prm };

/// Units: m, W, J/m^2, s, m/s.
struct PlannerConfig {
  double grid_spacing = 0.1;
  std::optional<Vec2> grid_anchor;
  RobotModel robot = RobotModel::disc(0.1, 1.0);
  LightSource light = LightSource::point(80.0);
  double mu_min = 280.0;
  double t_max = 1e6;
  double v_max = 0.5;
  bool closed_tour = true;
  RoadmapKind roadmap = RoadmapKind::grid;
  PrmParams prm;
  IntegrationOptions integration;
  RasterOptions raster;
  /// Dwell times at or below this are treated as zero when selecting tour stops.
  double dwell_threshold = 1e-9;
};

struct StageTimes {
  double vantages = 0.0;
  double roadmap = 0.0;
  double visibility = 0.0;
  double irradiance = 0.0;
};

/// Everything the optimizers share: patches, retained vantages, roadmap
/// distances and the irradiance matrix (rows = patches, cols = retained vantages).
struct PlanningContext {
  std::vector<SurfacePatch> patches;
  VantageSet candidates;
  Roadmap roadmap;
  std::vector<std::size_t> retained;  // candidate indices in the largest connected component
  std::vector<Vec3> vantages;         // positions of the retained candidates
  ShortestPaths paths;
  VisibilityGraph visibility;         // 2.5D worlds only
  IrradianceMatrix irradiance;
  StageTimes times;
  bool volumetric = false;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

template <typename Space>
void finish_roadmap(PlanningContext& ctx, const Space& space, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  run_stage("roadmap", [&] {
    if (cfg.roadmap == RoadmapKind::grid) {
      ctx.roadmap = build_grid_roadmap(ctx.candidates, space.checker);
    } else {
      ctx.roadmap = build_prm(ctx.candidates.positions, space, cfg.prm).roadmap;
    }
    ctx.retained = ctx.roadmap.largest_target_component();
    std::vector<std::size_t> milestones;
    for (std::size_t k : ctx.retained) {
      ctx.vantages.push_back(ctx.candidates.positions[k]);
      milestones.push_back(ctx.roadmap.targets()[k]);
    }
    ctx.paths = shortest_path_matrix(ctx.roadmap, milestones);
    return 0;
  });
  ctx.times.roadmap = seconds_since(t0);
}

}  // namespace detail

inline PlanningContext build_context(const World2p5D& world, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  PlanningContext ctx;
  detail::run_stage("world", [&] {
    world.validate();
    ctx.patches = discretize_surfaces(world, world.patch_resolution);
    return 0;
  });
  auto t0 = Clock::now();
  ctx.candidates = detail::run_stage("vantages", [&] {
    return sample_vantage_grid(world, cfg.grid_spacing, cfg.robot, cfg.grid_anchor);
  });
  ctx.times.vantages = detail::seconds_since(t0);
  const PlanarSpace space{FloorplanCollision(world, cfg.robot.clearance()), cfg.robot.light_height};
  detail::finish_roadmap(ctx, space, cfg);
  t0 = Clock::now();
  ctx.visibility = detail::run_stage("visibility", [&] { return build_visibility_graph(ctx.vantages, ctx.patches, world); });
  ctx.times.visibility = detail::seconds_since(t0);
  t0 = Clock::now();
  ctx.irradiance = detail::run_stage("irradiance", [&] {
    return build_irradiance_matrix(cfg.light, ctx.vantages, ctx.patches, ctx.visibility, cfg.integration);
  });
  ctx.irradiance.vantage_ids = ctx.retained;
  ctx.times.irradiance = detail::seconds_since(t0);
  return ctx;
}

inline PlanningContext build_context(const TriMeshWorld& mesh, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  PlanningContext ctx;
  ctx.volumetric = true;
  ctx.patches = discretize_surfaces(mesh);
  auto t0 = Clock::now();
  ctx.candidates = detail::run_stage("vantages", [&] { return sample_vantage_grid(mesh, cfg.grid_spacing, cfg.robot); });
  ctx.times.vantages = detail::seconds_since(t0);
  const VolumeSpace space{MeshCollision(mesh, cfg.robot.clearance())};
  detail::finish_roadmap(ctx, space, cfg);
  t0 = Clock::now();
  ctx.irradiance = detail::run_stage("irradiance", [&] {
    return build_irradiance_matrix(mesh, cfg.light, ctx.vantages, cfg.raster);
  });
  ctx.irradiance.vantage_ids = ctx.retained;
  ctx.times.irradiance = detail::seconds_since(t0);
  return ctx;
}

struct CoverageReport {
  double coverage_fraction = 0.0;          // covered area / total patch area
  double visible_coverage_fraction = 0.0;  // covered area / area lit by some vantage
  double covered_area = 0.0;
  double visible_area = 0.0;
  double total_area = 0.0;
  std::size_t covered_patches = 0;
  std::size_t visible_patches = 0;
  double max_overexposure = 0.0;   // max fluence / mu_min over covered patches
  double mean_overexposure = 0.0;  // mean fluence / mu_min over covered patches
  std::vector<double> fluence;
  std::vector<bool> covered;
};

/// Patch i counts as covered when its fluence reaches mu_min within 1e-6 J/m^2.
inline CoverageReport evaluate_fluence(const std::vector<double>& dwell, const IrradianceMatrix& irradiance,
                                       std::span<const SurfacePatch> patches, double mu_min) {
  if (patches.size() != irradiance.rows) throw std::invalid_argument("patch count does not match irradiance rows");
  CoverageReport rep;
  rep.fluence = fluence(irradiance, dwell);
  rep.covered.assign(patches.size(), false);
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const double a = patches[i].area;
    rep.total_area += a;
    if (irradiance.row_nonzero(i)) {
      rep.visible_area += a;
      ++rep.visible_patches;
    }
    if (rep.fluence[i] >= mu_min - 1e-6) {
      rep.covered[i] = true;
      rep.covered_area += a;
      ++rep.covered_patches;
      const double ratio = rep.fluence[i] / mu_min;
      ratio_sum += ratio;
      rep.max_overexposure = std::max(rep.max_overexposure, ratio);
    }
  }
  rep.coverage_fraction = rep.total_area > 0.0 ? rep.covered_area / rep.total_area : 0.0;
  rep.visible_coverage_fraction = rep.visible_area > 0.0 ? std::min(1.0, rep.covered_area / rep.visible_area) : 0.0;
  rep.mean_overexposure = rep.covered_patches ? ratio_sum / static_cast<double>(rep.covered_patches) : 0.0;
  return rep;
}

struct Plan {
  std::string method;
  Tour tour;                   // indices into the context's retained vantages
  std::vector<double> dwell;   // s, one per retained vantage
  std::vector<Vec3> path;      // playback polyline
  double total_dwell = 0.0;
  double path_length = 0.0;    // m
  double travel_time = 0.0;    // s
  double total_time = 0.0;     // s
  double solve_seconds = 0.0;  // optimization stages only
  CoverageReport coverage;
  nlohmann::json details = nlohmann::json::object();
};

/// Polyline through the tour stops along roadmap shortest paths.
inline std::vector<Vec3> playback_path(const PlanningContext& ctx, const Tour& tour) {
  std::vector<Vec3> path;
  if (tour.order.empty()) return path;
  path.push_back(ctx.vantages[tour.order.front()]);
  const std::size_t legs = tour.closed && tour.order.size() > 1 ? tour.order.size() : tour.order.size() - 1;
  for (std::size_t i = 0; i < legs; ++i) {
    const auto leg = ctx.paths.path(tour.order[i], tour.order[(i + 1) % tour.order.size()]);
    path.insert(path.end(), leg.begin() + 1, leg.end());
  }
  return path;
}

inline double polyline_length(const std::vector<Vec3>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += norm(path[i] - path[i - 1]);
  return len;
}

namespace detail {

inline void finish_plan(Plan& plan, const PlanningContext& ctx, const PlannerConfig& cfg) {
  plan.path = playback_path(ctx, plan.tour);
  plan.path_length = plan.tour.length;
  plan.total_dwell = std::accumulate(plan.dwell.begin(), plan.dwell.end(), 0.0);
  plan.travel_time = plan.path_length / cfg.v_max;
  plan.total_time = plan.total_dwell + plan.travel_time;
  plan.coverage = evaluate_fluence(plan.dwell, ctx.irradiance, ctx.patches, cfg.mu_min);
}

}  // namespace detail

/// LP for dwell times, then a tour over the vantages with positive dwell.
inline Plan plan_two_stage(const PlanningContext& ctx, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  Plan plan;
  plan.method = "lp-tsp";
  const auto t0 = Clock::now();
  const DosingSolution sol = detail::run_stage("lp", [&] {
    return solve_dwell_times(DosingProblem::uniform(ctx.irradiance, cfg.mu_min, cfg.t_max));
  });
  const double lp_seconds = detail::seconds_since(t0);
  plan.dwell = sol.dwell;
  std::vector<std::size_t> selected;
  for (std::size_t k = 0; k < plan.dwell.size(); ++k) {
    if (plan.dwell[k] > cfg.dwell_threshold) {
      selected.push_back(k);
    } else {
      plan.dwell[k] = 0.0;
    }
  }
  const auto t1 = Clock::now();
  plan.tour = detail::run_stage("tour", [&] { return solve_tsp(selected, ctx.paths.distances(), TspMode::automatic, cfg.closed_tour); });
  const double tsp_seconds = detail::seconds_since(t1);
  plan.solve_seconds = lp_seconds + tsp_seconds;
  detail::finish_plan(plan, ctx, cfg);
  double slack_total = 0.0;
  for (double s : sol.slack) slack_total += s;
  plan.details = {{"lp_status", to_string(sol.status)},
                  {"lp_objective", sol.objective},
                  {"lp_iterations", sol.lp.iterations},
                  {"lp_seconds", lp_seconds},
                  {"tsp_seconds", tsp_seconds},
                  {"slack_total", slack_total},
                  {"certificate_ok", sol.certificate.ok},
                  {"duality_gap", sol.certificate.gap}};
  return plan;
}

/// Single vantage maximizing lit patch area (ties: smallest distance to its
/// farthest lit patch), dwelling until every lit patch reaches mu_min.
inline Plan plan_static_baseline(const PlanningContext& ctx, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const IrradianceMatrix& I = ctx.irradiance;
  if (I.cols == 0) throw StageError("static", "no vantages");
  std::size_t best = 0;
  double best_area = -1.0, best_reach = 0.0;
  for (std::size_t k = 0; k < I.cols; ++k) {
    double area = 0.0, reach = 0.0;
    for (std::size_t i = 0; i < I.rows; ++i) {
      if (I.at(i, k) <= 0.0) continue;
      area += ctx.patches[i].area;
      reach = std::max(reach, norm(ctx.patches[i].centroid - ctx.vantages[k]));
    }
    const double tol = 1e-9 * std::max(1.0, best_area);
    if (area > best_area + tol || (std::abs(area - best_area) <= tol && reach < best_reach)) {
      best = k;
      best_area = area;
      best_reach = reach;
    }
  }
  double dwell = 0.0;
  for (std::size_t i = 0; i < I.rows; ++i) {
    if (I.at(i, best) > 0.0) dwell = std::max(dwell, cfg.mu_min / I.at(i, best));
  }
  Plan plan;
  plan.method = "static";
  plan.dwell.assign(I.cols, 0.0);
  plan.dwell[best] = dwell;
  plan.tour.order = {best};
  plan.tour.closed = cfg.closed_tour;
  plan.tour.length = 0.0;
  plan.solve_seconds = detail::seconds_since(t0);
  detail::finish_plan(plan, ctx, cfg);
  plan.details = {{"vantage", best}, {"lit_area", best_area}};
  return plan;
}

inline constexpr std::size_t kMaxMilpVantages = 12;

struct MilpPlanOptions {
  MilpSolveOptions solve;
  MilpOptions model;
  /// Candidate vantages; empty means the vantages with positive dwell in the dosing LP.
  std::vector<std::size_t> candidates;
};

/// Joint dwell/tour MILP over a candidate set of at most 12 vantages. Patches
/// that no candidate lights are left out, since hard fluence rows for them are infeasible.
inline Plan plan_milp(const PlanningContext& ctx, const PlannerConfig& cfg, MilpPlanOptions opts = {}) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  std::vector<std::size_t> cand = opts.candidates;
  if (cand.empty()) {
    const DosingSolution sol = detail::run_stage("lp", [&] {
      return solve_dwell_times(DosingProblem::uniform(ctx.irradiance, cfg.mu_min, cfg.t_max));
    });
    for (std::size_t k = 0; k < sol.dwell.size(); ++k) {
      if (sol.dwell[k] > cfg.dwell_threshold) cand.push_back(k);
    }
  }
  if (cand.size() > kMaxMilpVantages) {
    throw StageError("milp", std::to_string(cand.size()) + " candidate vantages exceed the limit of " +
                                 std::to_string(kMaxMilpVantages));
  }
  const IrradianceMatrix cols = ctx.irradiance.select_columns(cand);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < cols.rows; ++i) {
    if (cols.row_nonzero(i)) rows.push_back(i);
  }
  const IrradianceMatrix sub = cols.select_rows(rows);
  DistanceMatrix d(cand.size());
  for (std::size_t a = 0; a < cand.size(); ++a) {
    for (std::size_t b = 0; b < cand.size(); ++b) d.at(a, b) = ctx.paths.distances().at(cand[a], cand[b]);
  }
  opts.model.open_path = opts.model.open_path || !cfg.closed_tour;
  opts.model.big_m = std::min(opts.model.big_m, cfg.t_max);
  const MilpModel model = build_milp(sub, d, cfg.mu_min, cfg.v_max, opts.model);
  const MilpSolution sol = detail::run_stage("milp", [&] { return solve_milp(model, opts.solve); });
  if (!sol.has_solution()) throw StageError("milp", std::string("no solution: ") + to_string(sol.status));

  Plan plan;
  plan.method = "milp";
  plan.dwell.assign(ctx.irradiance.cols, 0.0);
  for (std::size_t j = 0; j < cand.size(); ++j) plan.dwell[cand[j]] = sol.t[j];
  plan.tour.closed = !model.dummy_root;
  for (std::size_t v : sol.visits) plan.tour.order.push_back(cand[v]);
  plan.tour.length = tour_length(plan.tour.order, ctx.paths.distances(), plan.tour.closed);
  plan.solve_seconds = detail::seconds_since(t0);
  detail::finish_plan(plan, ctx, cfg);
  plan.details = {{"status", to_string(sol.status)},
                  {"objective", sol.objective},
                  {"gap", sol.gap},
                  {"nodes", sol.node_count},
                  {"lp_failures", sol.lp_failures},
                  {"first_lp_failure", sol.first_lp_failure},
                  {"bound_violations", sol.bound_violations},
                  {"milp_seconds", sol.seconds},
                  {"candidates", cand},
                  {"binaries", model.binary_count()},
                  {"modeled_patches", rows.size()}};
  return plan;
}

inline nlohmann::json coverage_to_json(const CoverageReport& c, bool with_fluence = true) {
  nlohmann::json j = {{"coverage_fraction", c.coverage_fraction},
                      {"visible_coverage_fraction", c.visible_coverage_fraction},
                      {"covered_area", c.covered_area},
                      {"visible_area", c.visible_area},
                      {"total_area", c.total_area},
                      {"covered_patches", c.covered_patches},
                      {"visible_patches", c.visible_patches},
                      {"max_overexposure", c.max_overexposure},
                      {"mean_overexposure", c.mean_overexposure}};
  if (with_fluence) j["fluence"] = c.fluence;
  return j;
}

inline nlohmann::json plan_to_json(const Plan& plan, const PlanningContext& ctx) {
  nlohmann::json stops = nlohmann::json::array();
  for (std::size_t k : plan.tour.order) {
    const Vec3 p = ctx.vantages[k];
    stops.push_back({{"vantage", k}, {"position", {p.x, p.y, p.z}}, {"dwell", plan.dwell[k]}});
  }
  nlohmann::json path = nlohmann::json::array();
  for (Vec3 p : plan.path) path.push_back({p.x, p.y, p.z});
  return {{"format", "uvplan-plan"},
          {"version", 1},
          {"method", plan.method},
          {"units", {{"length", "m"}, {"time", "s"}, {"fluence", "J/m^2"}}},
          {"candidate_vantages", ctx.candidates.positions.size()},
          {"retained_vantages", ctx.vantages.size()},
          {"patches", ctx.patches.size()},
          {"tour", {{"closed", plan.tour.closed}, {"length", plan.tour.length}, {"stops", std::move(stops)}}},
          {"path", std::move(path)},
          {"total_dwell", plan.total_dwell},
          {"path_length", plan.path_length},
          {"travel_time", plan.travel_time},
          {"total_time", plan.total_time},
          {"solve_seconds", plan.solve_seconds},
          {"stage_seconds",
           {{"vantages", ctx.times.vantages},
            {"roadmap", ctx.times.roadmap},
            {"visibility", ctx.times.visibility},
            {"irradiance", ctx.times.irradiance}}},
          {"coverage", coverage_to_json(plan.coverage)},
          {"details", plan.details}};
}

}  // namespace uvplan
