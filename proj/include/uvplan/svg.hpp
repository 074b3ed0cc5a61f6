#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "uvplan/planner.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// Linear red (0) to green (>= mu_min) ramp, as "#rrggbb".
inline std::string fluence_color(double fluence, double mu_min) {
  const double t = std::clamp(fluence / mu_min, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  const int g = static_cast<int>(std::lround(255.0 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x00", r, g);
  return buf;
}

/// Floorplan with obstacles, one polyline per wall patch colored by fluence,
/// the trajectory as a single path and a marker per dwell stop.
inline std::string render_plan_svg(const World2p5D& world, const PlanningContext& ctx, const Plan& plan, double mu_min,
                                   double pixels_per_meter = 100.0) {
  const double margin = 0.2;
  const double w = world.bounds.width() + 2 * margin;
  const double h = world.bounds.depth() + 2 * margin;
  auto sx = [&](double x) { return (x - world.bounds.min.x + margin) * pixels_per_meter; };
  auto sy = [&](double y) { return (world.bounds.max.y - y + margin) * pixels_per_meter; };

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w * pixels_per_meter << "\" height=\""
      << h * pixels_per_meter << "\" viewBox=\"0 0 " << w * pixels_per_meter << " " << h * pixels_per_meter << "\">\n"
      << "<title>" << plan.method << " plan: total " << plan.total_time / 60.0 << " min, coverage "
      << plan.coverage.coverage_fraction * 100.0 << "%</title>\n"
      << "<g id=\"obstacles\" fill=\"#d9d9d9\" stroke=\"none\">\n";
  for (const Polygon& poly : world.obstacles) {
    out << "<polygon points=\"";
    for (Vec2 p : poly) out << sx(p.x) << "," << sy(p.y) << " ";
    out << "\"/>\n";
  }
  out << "</g>\n<g id=\"patches\" stroke-width=\"4\" fill=\"none\" stroke-linecap=\"butt\">\n";
  for (std::size_t i = 0; i < ctx.patches.size(); ++i) {
    const auto* panel = std::get_if<WallPanel>(&ctx.patches[i].geometry);
    if (!panel) continue;
    out << "<polyline points=\"" << sx(panel->a.x) << "," << sy(panel->a.y) << " " << sx(panel->b.x) << ","
        << sy(panel->b.y) << "\" stroke=\"" << fluence_color(plan.coverage.fluence[i], mu_min) << "\"/>\n";
  }
  out << "</g>\n<path id=\"trajectory\" fill=\"none\" stroke=\"#d00000\" stroke-width=\"2\" d=\"";
  for (std::size_t i = 0; i < plan.path.size(); ++i) {
    out << (i == 0 ? "M" : " L") << sx(plan.path[i].x) << " " << sy(plan.path[i].y);
  }
  if (plan.path.empty()) out << "M0 0";
  out << "\"/>\n<g id=\"stops\" fill=\"#d00000\">\n";
  for (std::size_t k : plan.tour.order) {
    out << "<circle cx=\"" << sx(ctx.vantages[k].x) << "\" cy=\"" << sy(ctx.vantages[k].y) << "\" r=\"3\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace uvplan
