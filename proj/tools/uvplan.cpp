#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uvplan/commands.hpp"

namespace fs = std::filesystem;
using namespace uvplan;

namespace {

struct PlannerFlags {
  double grid = 0.1;
  std::optional<double> patch_resolution;
  double mu_min = 280.0;
  double power = 80.0;
  double v_max = 0.5;
  double t_max = 1e6;
  std::string robot = "disc";
  double radius = 0.1;
  double light_height = 1.0;
  double lamp_length = 0.0;
  int lamp_samples = 10;
  bool open_tour = false;
  std::string roadmap = "grid";
  std::uint64_t prm_seed = 1;
  int raster_resolution = 512;
  double milp_time_limit = 600.0;

  void attach(CLI::App* app) {
    app->add_option("--grid", grid, "vantage grid spacing (m)")->check(CLI::PositiveNumber);
    app->add_option("--patch-resolution", patch_resolution, "wall patch size (m); overrides the world file")
        ->check(CLI::PositiveNumber);
    app->add_option("--mu-min", mu_min, "required fluence (J/m^2)")->check(CLI::PositiveNumber);
    app->add_option("--power", power, "lamp radiant flux (W)")->check(CLI::PositiveNumber);
    app->add_option("--v-max", v_max, "robot speed (m/s)")->check(CLI::PositiveNumber);
    app->add_option("--t-max", t_max, "total dwell budget (s)")->check(CLI::PositiveNumber);
    app->add_option("--robot", robot, "disc or point")->check(CLI::IsMember({"disc", "point"}));
    app->add_option("--radius", radius, "disc robot radius (m)")->check(CLI::NonNegativeNumber);
    app->add_option("--light-height", light_height, "lamp height above the floor (m)");
    app->add_option("--lamp-length", lamp_length, "cylindrical lamp length (m); 0 for a point source")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--lamp-samples", lamp_samples, "point emitters along a cylindrical lamp")->check(CLI::PositiveNumber);
    app->add_flag("--open", open_tour, "open path instead of a closed tour");
    app->add_option("--roadmap", roadmap, "grid or prm")->check(CLI::IsMember({"grid", "prm"}));
    app->add_option("--prm-seed", prm_seed, "PRM sampling seed");
    app->add_option("--raster-resolution", raster_resolution, "cube face resolution for mesh worlds")
        ->check(CLI::Range(8, 4096));
    app->add_option("--milp-time-limit", milp_time_limit, "branch-and-bound time limit (s)")->check(CLI::NonNegativeNumber);
  }

  RunConfig config(const std::string& method) const {
    RunConfig cfg;
    cfg.method = method;
    cfg.patch_resolution = patch_resolution;
    cfg.milp_time_limit = milp_time_limit;
    PlannerConfig& p = cfg.planner;
    p.grid_spacing = grid;
    p.mu_min = mu_min;
    p.t_max = t_max;
    p.v_max = v_max;
    p.closed_tour = !open_tour;
    p.robot = robot == "point" ? RobotModel::point(light_height) : RobotModel::disc(radius, light_height);
    p.light = lamp_length > 0.0
                  ? LightSource::cylinder(power, {0, 0, -0.5 * lamp_length}, {0, 0, 0.5 * lamp_length}, lamp_samples)
                  : LightSource::point(power);
    p.roadmap = roadmap == "prm" ? RoadmapKind::prm : RoadmapKind::grid;
    p.prm.seed = prm_seed;
    p.raster.resolution = raster_resolution;
    return cfg;
  }
};

/// Expands directories into their .json and .obj files, sorted by name.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".json" || ext == ".obj")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  if (out.empty()) throw std::runtime_error("no world files given");
  return out;
}

void load_batch(const std::vector<std::string>& inputs, std::vector<std::string>& names, std::vector<AnyWorld>& worlds) {
  for (const fs::path& p : expand_inputs(inputs)) {
    names.push_back(p.filename().string());
    worlds.push_back(load_world(p));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage planning for a mobile UV disinfection lamp"};
  app.require_subcommand(1);

  // gen-world
  auto* gen = app.add_subcommand("gen-world", "generate random 2.5D rooms as JSON");
  WorldBatchSpec spec;
  std::vector<double> size{5.0, 5.0};
  int obstacles = -1;
  std::string gen_out, gen_dir = ".";
  gen->add_option("--seed", spec.seed, "seed of the first room; room i uses seed + i");
  gen->add_option("--obstacles", obstacles, "fixed obstacle count (default: drawn from [min, max])");
  gen->add_option("--count", spec.count, "number of rooms")->check(CLI::PositiveNumber);
  gen->add_option("--min-obstacles", spec.min_obstacles)->check(CLI::NonNegativeNumber);
  gen->add_option("--max-obstacles", spec.max_obstacles)->check(CLI::NonNegativeNumber);
  gen->add_option("--size", size, "room width and depth (m)")->expected(2);
  gen->add_option("--wall-height", spec.wall_height, "m")->check(CLI::PositiveNumber);
  gen->add_option("--patch-resolution", spec.patch_resolution, "m")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output file (single room)");
  gen->add_option("--out-dir", gen_dir, "output directory (batches write room_<seed>.json)");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "plan one world and write JSON plus SVG (or a fluence CSV for meshes)");
  PlannerFlags plan_flags;
  std::string world_path, method = "lp-tsp", plan_dir = ".", plan_name;
  plan_cmd->add_option("world", world_path, "world file (.json or .obj)")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--method", method)->check(CLI::IsMember({"lp-tsp", "milp", "static"}));
  plan_cmd->add_option("--out-dir", plan_dir);
  plan_cmd->add_option("--name", plan_name, "output file stem (default: <world>_<method>)");
  plan_flags.attach(plan_cmd);

  // compare
  auto* cmp = app.add_subcommand("compare", "run two methods on a batch of worlds");
  PlannerFlags cmp_flags;
  std::vector<std::string> cmp_inputs;
  std::vector<std::string> methods{"lp-tsp", "milp"};
  std::string cmp_out;
  cmp->add_option("worlds", cmp_inputs, "world files or directories")->required();
  cmp->add_option("--methods", methods, "two of lp-tsp, milp, static")
      ->expected(2)
      ->check(CLI::IsMember({"lp-tsp", "milp", "static"}));
  cmp->add_option("--out", cmp_out, "JSON report path");
  cmp_flags.attach(cmp);

  // sweep-resolution
  auto* sweep = app.add_subcommand("sweep-resolution", "two-stage plans over a list of grid or patch resolutions");
  PlannerFlags sweep_flags;
  std::vector<std::string> sweep_inputs;
  std::string kind = "grid", sweep_out;
  std::vector<double> levels{0.5, 0.25, 0.125};
  sweep->add_option("worlds", sweep_inputs, "world files or directories")->required();
  sweep->add_option("--kind", kind)->check(CLI::IsMember({"grid", "patch"}));
  sweep->add_option("--levels", levels, "resolutions (m)")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "JSON report path");
  sweep_flags.attach(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (obstacles >= 0) spec.obstacles = obstacles;
      spec.bounds = {{0.0, 0.0}, {size[0], size[1]}};
      const auto worlds = generate_world_batch(spec);
      for (std::size_t i = 0; i < worlds.size(); ++i) {
        fs::path path;
        if (worlds.size() == 1 && !gen_out.empty()) {
          path = gen_out;
        } else {
          char name[64];
          std::snprintf(name, sizeof name, "room_%03llu.json", static_cast<unsigned long long>(spec.seed + i));
          path = fs::path(gen_dir) / name;
        }
        save_world(worlds[i], path);
        std::cout << path.string() << " (" << worlds[i].obstacles.size() << " obstacles)\n";
      }
    } else if (*plan_cmd) {
      const AnyWorld world = load_world(world_path);
      const RunConfig cfg = plan_flags.config(method);
      const PlanOutcome out = run_plan(world, cfg);
      if (plan_name.empty()) plan_name = fs::path(world_path).stem().string() + "_" + method;
      for (const fs::path& p : write_plan_outputs(world, out, cfg, fs::path(plan_dir) / plan_name)) {
        std::cout << "wrote " << p.string() << "\n";
      }
      const Plan& p = out.plan;
      std::printf("%s: total %.2f min (dwell %.2f min, travel %.2f min over %.2f m), %zu stops, coverage %.1f%% (visible %.1f%%)\n",
                  p.method.c_str(), p.total_time / 60.0, p.total_dwell / 60.0, p.travel_time / 60.0, p.path_length,
                  p.tour.order.size(), 100.0 * p.coverage.coverage_fraction, 100.0 * p.coverage.visible_coverage_fraction);
      if (p.details.contains("gap")) std::printf("milp status %s, gap %g\n", p.details["status"].get<std::string>().c_str(), p.details["gap"].get<double>());
    } else if (*cmp) {
      std::vector<std::string> names;
      std::vector<AnyWorld> worlds;
      load_batch(cmp_inputs, names, worlds);
      const CompareReport rep = compare_methods(names, worlds, cmp_flags.config(methods[0]), methods[0], methods[1]);
      std::cout << format_compare_table(rep);
      if (!cmp_out.empty()) write_text_file(cmp_out, to_json(rep).dump(2) + "\n");
      if (rep.failures) return 1;
    } else if (*sweep) {
      std::vector<std::string> names;
      std::vector<AnyWorld> worlds;
      load_batch(sweep_inputs, names, worlds);
      const SweepReport rep = sweep_resolution(names, worlds, sweep_flags.config("lp-tsp"),
                                               kind == "grid" ? SweepKind::grid : SweepKind::patch, levels);
      std::cout << format_sweep_table(rep);
      if (!sweep_out.empty()) write_text_file(sweep_out, to_json(rep).dump(2) + "\n");
      if (rep.failures) return 1;
    }
  } catch (const std::exception& e) {
    // Stage errors already read "<stage>: <message>".
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
