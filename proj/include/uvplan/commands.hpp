#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "uvplan/parallel.hpp"
#include "uvplan/planner.hpp"
#include "uvplan/svg.hpp"
#include "uvplan/world.hpp"
#include "uvplan/world_io.hpp"

namespace uvplan {

/// Parameters shared by the plan, compare and sweep commands. SI units throughout.
struct RunConfig {
  PlannerConfig planner;
  std::optional<double> patch_resolution;  // m; overrides the world file
  std::string method = "lp-tsp";
  double milp_time_limit = 600.0;  // s
};

struct WorldBatchSpec {
  std::uint64_t seed = 1;
  int count = 1;
  std::optional<int> obstacles;  // fixed count; otherwise drawn per room from [min, max]
  int min_obstacles = 7;
  int max_obstacles = 19;
  Rect bounds{{0.0, 0.0}, {5.0, 5.0}};
  double wall_height = 2.0;
  double patch_resolution = 0.125;
};

/// Room i uses seed + i. Returns the generated worlds in order.
inline std::vector<World2p5D> generate_world_batch(const WorldBatchSpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("count must be >= 1");
  if (spec.min_obstacles > spec.max_obstacles) throw std::invalid_argument("min-obstacles exceeds max-obstacles");
  std::vector<World2p5D> worlds;
  for (int i = 0; i < spec.count; ++i) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
    const int n = spec.obstacles ? *spec.obstacles : sample_obstacle_count(seed, spec.min_obstacles, spec.max_obstacles);
    World2p5D w = generate_random_room(seed, spec.bounds, n, spec.wall_height);
    w.patch_resolution = spec.patch_resolution;
    worlds.push_back(std::move(w));
  }
  return worlds;
}

struct PlanOutcome {
  PlanningContext context;
  Plan plan;
};

inline PlanningContext build_any_context(const AnyWorld& world, const RunConfig& cfg) {
  if (const auto* w = std::get_if<World2p5D>(&world)) {
    World2p5D room = *w;
    if (cfg.patch_resolution) room.patch_resolution = *cfg.patch_resolution;
    return build_context(room, cfg.planner);
  }
  return build_context(std::get<TriMeshWorld>(world), cfg.planner);
}

inline Plan run_method(const std::string& method, const PlanningContext& ctx, const RunConfig& cfg) {
  if (method == "lp-tsp") return plan_two_stage(ctx, cfg.planner);
  if (method == "static") return plan_static_baseline(ctx, cfg.planner);
  if (method == "milp") {
    MilpPlanOptions opts;
    opts.solve.time_limit = cfg.milp_time_limit;
    return plan_milp(ctx, cfg.planner, opts);
  }
  throw std::invalid_argument("unknown method '" + method + "' (expected lp-tsp, milp or static)");
}

inline PlanOutcome run_plan(const AnyWorld& world, const RunConfig& cfg) {
  PlanOutcome out{build_any_context(world, cfg), {}};
  out.plan = run_method(cfg.method, out.context, cfg);
  return out;
}

/// Writes `<stem>.json` and, for 2.5D worlds, `<stem>.svg`; meshes get
/// `<stem>_fluence.csv` with one row per triangle. Returns the written paths.
inline std::vector<std::filesystem::path> write_plan_outputs(const AnyWorld& world, const PlanOutcome& out,
                                                             const RunConfig& cfg, const std::filesystem::path& stem) {
  std::vector<std::filesystem::path> written;
  auto with_suffix = [&](const std::string& suffix) { return std::filesystem::path(stem.string() + suffix); };
  const auto json_path = with_suffix(".json");
  write_text_file(json_path, plan_to_json(out.plan, out.context).dump(2) + "\n");
  written.push_back(json_path);
  if (const auto* w = std::get_if<World2p5D>(&world)) {
    World2p5D room = *w;
    if (cfg.patch_resolution) room.patch_resolution = *cfg.patch_resolution;
    const auto svg_path = with_suffix(".svg");
    write_text_file(svg_path, render_plan_svg(room, out.context, out.plan, cfg.planner.mu_min));
    written.push_back(svg_path);
  } else {
    std::string csv = "triangle,area_m2,fluence_j_per_m2,covered\n";
    char buf[128];
    for (std::size_t i = 0; i < out.context.patches.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%d\n", i, out.context.patches[i].area, out.plan.coverage.fluence[i],
                    out.plan.coverage.covered[i] ? 1 : 0);
      csv += buf;
    }
    const auto csv_path = with_suffix("_fluence.csv");
    write_text_file(csv_path, csv);
    written.push_back(csv_path);
  }
  return written;
}

struct MethodSummary {
  std::string status;
  double total_time = 0.0;
  double total_dwell = 0.0;
  double dwell_fraction = 0.0;
  double path_length = 0.0;
  double solve_seconds = 0.0;
  double visible_coverage = 0.0;
  std::size_t stops = 0;
};

inline MethodSummary summarize(const Plan& p) {
  MethodSummary s;
  s.status = p.details.contains("status") ? p.details["status"].get<std::string>() : "optimal";
  s.total_time = p.total_time;
  s.total_dwell = p.total_dwell;
  s.dwell_fraction = p.total_time > 0.0 ? p.total_dwell / p.total_time : 1.0;
  s.path_length = p.path_length;
  s.solve_seconds = p.solve_seconds;
  s.visible_coverage = p.coverage.visible_coverage_fraction;
  s.stops = p.tour.order.size();
  return s;
}

inline nlohmann::json to_json(const MethodSummary& s) {
  return {{"status", s.status},           {"total_time", s.total_time},       {"total_dwell", s.total_dwell},
          {"dwell_fraction", s.dwell_fraction}, {"path_length", s.path_length}, {"solve_seconds", s.solve_seconds},
          {"visible_coverage", s.visible_coverage}, {"stops", s.stops}};
}

struct CompareRow {
  std::string world;
  std::string error;  // empty on success
  MethodSummary a;
  MethodSummary b;
  double percent_difference = 0.0;  // 100 (a - b) / b on total time

  bool ok() const { return error.empty(); }
};

struct CompareReport {
  std::string method_a;
  std::string method_b;
  std::vector<CompareRow> rows;
  double mean_percent_difference = 0.0;
  double mean_dwell_fraction_a = 0.0;
  double mean_dwell_fraction_b = 0.0;
  double mean_speedup = 0.0;  // mean of b.solve_seconds / a.solve_seconds
  std::size_t failures = 0;
};

/// Runs both methods on a shared context per world. A failing world is
/// recorded and the batch continues; means cover the successful rows only.
inline CompareReport compare_methods(const std::vector<std::string>& names, const std::vector<AnyWorld>& worlds,
                                     const RunConfig& cfg, const std::string& method_a, const std::string& method_b) {
  CompareReport rep;
  rep.method_a = method_a;
  rep.method_b = method_b;
  rep.rows.resize(worlds.size());
  parallel_for(worlds.size(), [&](std::size_t i) {
    CompareRow& row = rep.rows[i];
    row.world = names[i];
    try {
      const PlanningContext ctx = build_any_context(worlds[i], cfg);
      row.a = summarize(run_method(method_a, ctx, cfg));
      row.b = summarize(run_method(method_b, ctx, cfg));
      row.percent_difference = 100.0 * (row.a.total_time - row.b.total_time) / row.b.total_time;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::size_t ok = 0;
  for (const CompareRow& row : rep.rows) {
    if (!row.ok()) {
      ++rep.failures;
      continue;
    }
    ++ok;
    rep.mean_percent_difference += row.percent_difference;
    rep.mean_dwell_fraction_a += row.a.dwell_fraction;
    rep.mean_dwell_fraction_b += row.b.dwell_fraction;
    rep.mean_speedup += row.b.solve_seconds / std::max(row.a.solve_seconds, 1e-9);
  }
  if (ok) {
    const double n = static_cast<double>(ok);
    rep.mean_percent_difference /= n;
    rep.mean_dwell_fraction_a /= n;
    rep.mean_dwell_fraction_b /= n;
    rep.mean_speedup /= n;
  }
  return rep;
}

inline nlohmann::json to_json(const CompareReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CompareRow& r : rep.rows) {
    if (!r.ok()) {
      rows.push_back({{"world", r.world}, {"error", r.error}});
      continue;
    }
    rows.push_back({{"world", r.world}, {rep.method_a, to_json(r.a)}, {rep.method_b, to_json(r.b)},
                    {"percent_difference", r.percent_difference}});
  }
  return {{"format", "uvplan-compare"},
          {"version", 1},
          {"methods", {rep.method_a, rep.method_b}},
          {"rows", std::move(rows)},
          {"mean_percent_difference", rep.mean_percent_difference},
          {"mean_dwell_fraction", {{rep.method_a, rep.mean_dwell_fraction_a}, {rep.method_b, rep.mean_dwell_fraction_b}}},
          {"mean_speedup", rep.mean_speedup},
          {"failures", rep.failures}};
}

/// Human-readable table; times in minutes.
inline std::string format_compare_table(const CompareReport& rep) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %12s %12s %8s %10s %10s  %s\n", "world", (rep.method_a + " min").c_str(),
                (rep.method_b + " min").c_str(), "diff %", "a solve s", "b solve s", "status");
  out += buf;
  for (const CompareRow& r : rep.rows) {
    if (!r.ok()) {
      out += r.world + "  FAILED: " + r.error + "\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%-28s %12.2f %12.2f %8.2f %10.3f %10.3f  %s/%s\n", r.world.c_str(),
                  r.a.total_time / 60.0, r.b.total_time / 60.0, r.percent_difference, r.a.solve_seconds, r.b.solve_seconds,
                  r.a.status.c_str(), r.b.status.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mean difference %.2f%%, dwell fraction %.3f / %.3f, solve-time ratio %.2f, failures %zu\n",
                rep.mean_percent_difference, rep.mean_dwell_fraction_a, rep.mean_dwell_fraction_b, rep.mean_speedup,
                rep.failures);
  out += buf;
  return out;
}

enum class SweepKind { grid, patch };

struct SweepLevel {
  double value = 0.0;  // m
  double total_dwell = 0.0;
  double path_length = 0.0;
  double selected = 0.0;
  double common_dwell = 0.0;  // s; LP dwell for the patches lit at the coarsest grid level
};

struct SweepWorld {
  std::string world;
  std::string error;
  std::vector<SweepLevel> raw;
};

struct SweepReport {
  SweepKind kind = SweepKind::grid;
  std::vector<double> levels;              // coarsest first
  std::vector<SweepWorld> worlds;
  std::vector<SweepLevel> mean_normalized;  // per level, normalized by each world's coarsest level
  std::size_t failures = 0;
};

/// Two-stage plans over a list of grid spacings or patch resolutions. Grid
/// levels share an anchor at the room corner plus half the finest spacing, so
/// finer grids contain the coarser ones. A finer grid can also light patches
/// the coarse grid misses, which raises total dwell; common_dwell holds the
/// target set fixed to the patches lit at the coarsest level.
inline SweepReport sweep_resolution(const std::vector<std::string>& names, const std::vector<AnyWorld>& worlds,
                                    const RunConfig& cfg, SweepKind kind, std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("sweep needs at least one level");
  std::sort(levels.begin(), levels.end(), std::greater<>());
  SweepReport rep;
  rep.kind = kind;
  rep.levels = levels;
  rep.worlds.resize(worlds.size());
  parallel_for(worlds.size(), [&](std::size_t i) {
    SweepWorld& sw = rep.worlds[i];
    sw.world = names[i];
    try {
      const auto* room = std::get_if<World2p5D>(&worlds[i]);
      if (!room) throw std::invalid_argument("resolution sweeps need a 2.5D world");
      std::vector<std::size_t> common;
      for (double level : levels) {
        RunConfig run = cfg;
        if (kind == SweepKind::grid) {
          run.planner.grid_spacing = level;
          run.planner.grid_anchor = room->bounds.min + Vec2{levels.back(), levels.back()} * 0.5;
        } else {
          run.patch_resolution = level;
        }
        const PlanningContext ctx = build_any_context(worlds[i], run);
        const Plan plan = plan_two_stage(ctx, run.planner);
        double common_dwell = plan.total_dwell;
        if (kind == SweepKind::grid) {
          if (sw.raw.empty()) {
            for (std::size_t r = 0; r < ctx.irradiance.rows; ++r) {
              if (ctx.irradiance.row_nonzero(r)) common.push_back(r);
            }
          }
          common_dwell = 0.0;
          if (!common.empty()) {
            const DosingSolution sol = solve_dwell_times(
                DosingProblem::uniform(ctx.irradiance.select_rows(common), run.planner.mu_min, run.planner.t_max));
            for (double t : sol.dwell) common_dwell += t;
          }
        }
        sw.raw.push_back(
            {level, plan.total_dwell, plan.path_length, static_cast<double>(plan.tour.order.size()), common_dwell});
      }
    } catch (const std::exception& e) {
      sw.error = e.what();
      sw.raw.clear();
    }
  });
  rep.mean_normalized.assign(levels.size(), {});
  std::size_t ok = 0;
  for (const SweepWorld& sw : rep.worlds) {
    if (!sw.error.empty()) {
      ++rep.failures;
      continue;
    }
    ++ok;
    const SweepLevel& base = sw.raw.front();
    for (std::size_t l = 0; l < levels.size(); ++l) {
      SweepLevel& m = rep.mean_normalized[l];
      m.total_dwell += sw.raw[l].total_dwell / base.total_dwell;
      // A single stop has no path; its normalized length is defined as 1.
      m.path_length += base.path_length > 0.0 ? sw.raw[l].path_length / base.path_length : 1.0;
      m.selected += sw.raw[l].selected / base.selected;
      m.common_dwell += base.common_dwell > 0.0 ? sw.raw[l].common_dwell / base.common_dwell : 1.0;
    }
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    SweepLevel& m = rep.mean_normalized[l];
    m.value = levels[l];
    if (ok) {
      m.total_dwell /= static_cast<double>(ok);
      m.path_length /= static_cast<double>(ok);
      m.selected /= static_cast<double>(ok);
      m.common_dwell /= static_cast<double>(ok);
    }
  }
  return rep;
}

inline nlohmann::json to_json(const SweepReport& rep) {
  auto level_json = [](const SweepLevel& l) {
    return nlohmann::json{{"value", l.value}, {"total_dwell", l.total_dwell}, {"path_length", l.path_length},
                          {"selected", l.selected}, {"common_dwell", l.common_dwell}};
  };
  nlohmann::json worlds = nlohmann::json::array();
  for (const SweepWorld& sw : rep.worlds) {
    nlohmann::json raw = nlohmann::json::array();
    for (const SweepLevel& l : sw.raw) raw.push_back(level_json(l));
    nlohmann::json w = {{"world", sw.world}, {"levels", std::move(raw)}};
    if (!sw.error.empty()) w["error"] = sw.error;
    worlds.push_back(std::move(w));
  }
  nlohmann::json normalized = nlohmann::json::array();
  for (const SweepLevel& l : rep.mean_normalized) normalized.push_back(level_json(l));
  return {{"format", "uvplan-sweep"},
          {"version", 1},
          {"kind", rep.kind == SweepKind::grid ? "grid" : "patch"},
          {"levels", rep.levels},
          {"worlds", std::move(worlds)},
          {"mean_normalized", std::move(normalized)},
          {"failures", rep.failures}};
}

inline std::string format_sweep_table(const SweepReport& rep) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %12s %12s %12s %12s\n", rep.kind == SweepKind::grid ? "grid m" : "patch m",
                "dwell", "common dwell", "path", "selected");
  out += buf;
  for (const SweepLevel& l : rep.mean_normalized) {
    std::snprintf(buf, sizeof buf, "%-10.4g %12.3f %12.3f %12.3f %12.3f\n", l.value, l.total_dwell, l.common_dwell,
                  l.path_length, l.selected);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "normalized by the coarsest level; failures %zu\n", rep.failures);
  out += buf;
  return out;
}

}  // namespace uvplan
