#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvplan/geometry.hpp"
#include "uvplan/rng.hpp"
#include "uvplan/world.hpp"

namespace uvplan {

/// Light-carrying robot. A disc base moves the lamp on a horizontal plane at
/// `light_height`; a free point moves it anywhere (on the same plane in a
/// 2.5D world, through the volume in a mesh world). Collision checks dilate
/// the robot by `dilation`.
struct RobotModel {
  enum class Kind { disc, free_point };

  Kind kind = Kind::disc;
  double radius = 0.1;
  double light_height = 1.0;
  double dilation = 0.05;

  static RobotModel disc(double radius, double light_height = 1.0) { return {Kind::disc, radius, light_height, 0.05}; }
  static RobotModel point(double light_height = 1.0) { return {Kind::free_point, 0.0, light_height, 0.05}; }

  double clearance() const { return radius + dilation; }
};

inline constexpr double kCollisionStep = 0.01;

/// Clearance checks against a 2.5D floorplan. Configurations are lamp
/// positions; only their xy components matter.
class FloorplanCollision {
 public:
  FloorplanCollision(const World2p5D& world, double clearance) : world_(world), clearance_(clearance) {}

  double clearance() const { return clearance_; }
  const World2p5D& world() const { return world_; }

  bool point_free(Vec3 q) const {
    const Vec2 p = q.xy();
    const Rect& b = world_.bounds;
    if (p.x - b.min.x < clearance_ || b.max.x - p.x < clearance_ || p.y - b.min.y < clearance_ ||
        b.max.y - p.y < clearance_) {
      return false;
    }
    for (const Polygon& poly : world_.obstacles) {
      if (point_in_polygon(p, poly)) return false;
      for (std::size_t e = 0; e < poly.size(); ++e) {
        if (point_segment_distance(p, poly[e], poly[(e + 1) % poly.size()]) < clearance_) return false;
      }
    }
    return true;
  }

  /// Interpolated check at kCollisionStep spacing, endpoints included.
  bool segment_free(Vec3 a, Vec3 b) const { return interpolated_free(a, b, [this](Vec3 q) { return point_free(q); }); }

  template <typename PointCheck>
  static bool interpolated_free(Vec3 a, Vec3 b, PointCheck&& check) {
    const double len = norm(b - a);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / kCollisionStep)));
    // Coarse-to-fine order finds collisions early; the sample set is the same.
    if (!check(a) || !check(b)) return false;
    for (int stride = 1 << 20; stride >= 1; stride >>= 1) {
      if (stride >= steps && stride != 1) continue;
      for (int s = stride; s < steps; s += 2 * stride) {
        if (!check(a + (b - a) * (static_cast<double>(s) / steps))) return false;
      }
    }
    return true;
  }

 private:
  World2p5D world_;
  double clearance_;
};

inline double point_triangle_distance(Vec3 p, Vec3 a, Vec3 b, Vec3 c) {
  // Closest point on triangle, from Ericson's Real-Time Collision Detection.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return norm(p - a);
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return norm(p - b);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return norm(p - (a + ab * (d1 / (d1 - d3))));
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return norm(p - c);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return norm(p - (a + ac * (d2 / (d2 - d6))));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return norm(p - (b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)))));
  }
  const double denom = 1.0 / (va + vb + vc);
  return norm(p - (a + ab * (vb * denom) + ac * (vc * denom)));
}

/// Clearance checks for a point robot among mesh triangles.
class MeshCollision {
 public:
  MeshCollision(const TriMeshWorld& mesh, double clearance) : mesh_(mesh), clearance_(clearance) {
    const auto [lo, hi] = mesh_.bounding_box();
    lo_ = lo;
    hi_ = hi;
  }

  double clearance() const { return clearance_; }

  bool point_free(Vec3 q) const {
    if (q.x < lo_.x || q.y < lo_.y || q.z < lo_.z || q.x > hi_.x || q.y > hi_.y || q.z > hi_.z) return false;
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      const auto c = mesh_.corners(t);
      if (point_triangle_distance(q, c[0], c[1], c[2]) < clearance_) return false;
    }
    return true;
  }

  bool segment_free(Vec3 a, Vec3 b) const {
    return FloorplanCollision::interpolated_free(a, b, [this](Vec3 q) { return point_free(q); });
  }

  std::pair<Vec3, Vec3> bounds() const { return {lo_, hi_}; }

 private:
  TriMeshWorld mesh_;
  double clearance_;
  Vec3 lo_, hi_;
};

/// Feasible lamp positions drawn from a uniform grid.
struct VantageSet {
  std::vector<Vec3> positions;
  std::vector<std::array<int, 3>> grid_coords;
  double spacing = 0.0;
  RobotModel robot;
  std::size_t candidate_count = 0;
};

namespace detail {

struct GridAxis {
  double origin = 0.0;
  int count = 0;
};

/// Centered grid when no anchor is given, otherwise every anchor + i * spacing inside [lo, hi].
inline GridAxis grid_axis(double lo, double hi, double spacing, std::optional<double> anchor) {
  if (!anchor) {
    const int n = std::max(1, static_cast<int>(std::floor((hi - lo) / spacing + 1e-9)));
    return {lo + 0.5 * ((hi - lo) - (n - 1) * spacing), n};
  }
  const double first = std::ceil((lo - *anchor) / spacing - 1e-9);
  const double last = std::floor((hi - *anchor) / spacing + 1e-9);
  return {*anchor + first * spacing, std::max(0, static_cast<int>(last - first) + 1)};
}

}  // namespace detail

/// Grid over the floorplan at the robot's light height. Infeasible points are dropped.
inline VantageSet sample_vantage_grid(const World2p5D& world, double spacing, const RobotModel& robot,
                                      std::optional<Vec2> anchor = std::nullopt) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const FloorplanCollision checker(world, robot.clearance());
  const auto ax = detail::grid_axis(world.bounds.min.x, world.bounds.max.x, spacing,
                                    anchor ? std::optional<double>(anchor->x) : std::nullopt);
  const auto ay = detail::grid_axis(world.bounds.min.y, world.bounds.max.y, spacing,
                                    anchor ? std::optional<double>(anchor->y) : std::nullopt);
  VantageSet set;
  set.spacing = spacing;
  set.robot = robot;
  for (int i = 0; i < ax.count; ++i) {
    for (int j = 0; j < ay.count; ++j) {
      const Vec3 p{ax.origin + i * spacing, ay.origin + j * spacing, robot.light_height};
      ++set.candidate_count;
      if (checker.point_free(p)) {
        set.positions.push_back(p);
        set.grid_coords.push_back({i, j, 0});
      }
    }
  }
  if (set.positions.empty()) throw std::runtime_error("vantage grid has no feasible points");
  return set;
}

/// 3D grid over the mesh bounding box for a free-flying lamp.
inline VantageSet sample_vantage_grid(const TriMeshWorld& mesh, double spacing, const RobotModel& robot) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const MeshCollision checker(mesh, robot.clearance());
  const auto [lo, hi] = mesh.bounding_box();
  const auto ax = detail::grid_axis(lo.x, hi.x, spacing, std::nullopt);
  const auto ay = detail::grid_axis(lo.y, hi.y, spacing, std::nullopt);
  const auto az = detail::grid_axis(lo.z, hi.z, spacing, std::nullopt);
  VantageSet set;
  set.spacing = spacing;
  set.robot = robot;
  for (int i = 0; i < ax.count; ++i) {
    for (int j = 0; j < ay.count; ++j) {
      for (int k = 0; k < az.count; ++k) {
        const Vec3 p{ax.origin + i * spacing, ay.origin + j * spacing, az.origin + k * spacing};
        ++set.candidate_count;
        if (checker.point_free(p)) {
          set.positions.push_back(p);
          set.grid_coords.push_back({i, j, k});
        }
      }
    }
  }
  if (set.positions.empty()) throw std::runtime_error("vantage grid has no feasible points");
  return set;
}

class DisjointSets {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    size_.push_back(1);
    return parent_.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct RoadmapEdge {
  std::size_t to = 0;
  double length = 0.0;
};

/// Undirected graph of collision-free straight segments between milestones.
class Roadmap {
 public:
  std::size_t add_milestone(Vec3 q) {
    milestones_.push_back(q);
    adjacency_.emplace_back();
    sets_.add();
    return milestones_.size() - 1;
  }

  void add_edge(std::size_t a, std::size_t b) {
    const double len = norm(milestones_[b] - milestones_[a]);
    adjacency_[a].push_back({b, len});
    adjacency_[b].push_back({a, len});
    sets_.unite(a, b);
    ++edge_count_;
  }

  void set_targets(std::vector<std::size_t> targets) { targets_ = std::move(targets); }

  std::size_t size() const { return milestones_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<Vec3>& milestones() const { return milestones_; }
  const std::vector<RoadmapEdge>& neighbors(std::size_t a) const { return adjacency_[a]; }
  const std::vector<std::size_t>& targets() const { return targets_; }

  bool connected(std::size_t a, std::size_t b) const { return sets_.find(a) == sets_.find(b); }
  std::size_t component_of(std::size_t a) const { return sets_.find(a); }

  /// Dense component labels 0..C-1 per milestone.
  std::vector<int> component_labels() const {
    std::vector<int> labels(milestones_.size(), -1);
    std::map<std::size_t, int> ids;
    for (std::size_t i = 0; i < milestones_.size(); ++i) {
      const auto root = sets_.find(i);
      const auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()));
      labels[i] = it->second;
    }
    return labels;
  }

  /// Positions (into targets()) of the targets sharing the component that holds the most targets.
  std::vector<std::size_t> largest_target_component() const {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < targets_.size(); ++k) groups[sets_.find(targets_[k])].push_back(k);
    std::vector<std::size_t> best;
    for (auto& [root, members] : groups) {
      if (members.size() > best.size()) best = members;
    }
    return best;
  }

  /// Fraction of targets in the majority component.
  double target_connectivity() const {
    if (targets_.empty()) return 1.0;
    return static_cast<double>(largest_target_component().size()) / static_cast<double>(targets_.size());
  }

 private:
  std::vector<Vec3> milestones_;
  std::vector<std::vector<RoadmapEdge>> adjacency_;
  std::vector<std::size_t> targets_;
  mutable DisjointSets sets_;
  std::size_t edge_count_ = 0;
};

/// Grid graph over the vantage set: each vantage is a milestone, joined to its
/// 8 (planar) or 26 (volumetric) grid neighbors when the segment is free.
template <typename Collision>
Roadmap build_grid_roadmap(const VantageSet& vantages, const Collision& checker) {
  Roadmap rm;
  std::map<std::array<int, 3>, std::size_t> index;
  for (std::size_t k = 0; k < vantages.positions.size(); ++k) {
    rm.add_milestone(vantages.positions[k]);
    index[vantages.grid_coords[k]] = k;
  }
  std::vector<std::size_t> targets(vantages.positions.size());
  std::iota(targets.begin(), targets.end(), std::size_t{0});
  rm.set_targets(std::move(targets));
  bool volumetric = false;
  for (const auto& c : vantages.grid_coords) volumetric = volumetric || c[2] != 0;
  const int dz_max = volumetric ? 1 : 0;
  for (std::size_t k = 0; k < vantages.positions.size(); ++k) {
    const auto& c = vantages.grid_coords[k];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -dz_max; dz <= dz_max; ++dz) {
          const std::array<int, 3> n{c[0] + dx, c[1] + dy, c[2] + dz};
          if (n <= c) continue;  // each unordered pair once
          const auto it = index.find(n);
          if (it == index.end()) continue;
          if (checker.segment_free(vantages.positions[k], vantages.positions[it->second])) rm.add_edge(k, it->second);
        }
      }
    }
  }
  return rm;
}

/// Planar configuration space at a fixed lamp height.
struct PlanarSpace {
  FloorplanCollision checker;
  double height = 1.0;

  bool point_free(Vec3 q) const { return checker.point_free(q); }
  bool segment_free(Vec3 a, Vec3 b) const { return checker.segment_free(a, b); }
  Vec3 sample_uniform(Rng& rng) const {
    const Rect& b = checker.world().bounds;
    return {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y), height};
  }
  Vec3 sample_near(Vec3 center, double radius, Rng& rng) const {
    for (;;) {
      const double dx = rng.uniform(-1.0, 1.0);
      const double dy = rng.uniform(-1.0, 1.0);
      if (dx * dx + dy * dy <= 1.0) return {center.x + radius * dx, center.y + radius * dy, height};
    }
  }
};

/// Volumetric configuration space for a free-flying lamp in a mesh world.
struct VolumeSpace {
  MeshCollision checker;

  bool point_free(Vec3 q) const { return checker.point_free(q); }
  bool segment_free(Vec3 a, Vec3 b) const { return checker.segment_free(a, b); }
  Vec3 sample_uniform(Rng& rng) const {
    const auto [lo, hi] = checker.bounds();
    return {rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
  }
  Vec3 sample_near(Vec3 center, double radius, Rng& rng) const {
    for (;;) {
      const Vec3 d{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      if (dot(d, d) <= 1.0) return center + d * radius;
    }
  }
};

struct PrmParams {
  std::uint64_t seed = 1;
  int initial_batch = 4000;
  int increment = 200;
  double phi_threshold = 0.8;
  int bridging_samples = 10;
  double uniform_fraction = 0.3;
  double neighborhood_radius = 0.5;
  double connection_radius = 1.0;
  int max_neighbors = 30;
  /// Budget on feasible samples beyond the targets.
  int max_samples = 24000;
  /// Budget on sampling attempts, feasible or not.
  long long max_attempts = 2'000'000;
};

struct PrmStats {
  int samples = 0;
  long long attempts = 0;
  int increments = 0;
  int bridging_rounds = 0;
  bool all_connected = false;
};

struct PrmResult {
  Roadmap roadmap;
  PrmStats stats;
};

namespace detail {

template <typename Space>
void connect_milestone(Roadmap& rm, std::size_t q, const Space& space, const PrmParams& params) {
  const Vec3 p = rm.milestones()[q];
  std::vector<std::pair<double, std::size_t>> near;
  const double r2 = params.connection_radius * params.connection_radius;
  for (std::size_t m = 0; m < rm.size(); ++m) {
    if (m == q) continue;
    const Vec3 d = rm.milestones()[m] - p;
    const double dd = dot(d, d);
    if (dd <= r2) near.emplace_back(dd, m);
  }
  const std::size_t keep = std::min<std::size_t>(near.size(), static_cast<std::size_t>(params.max_neighbors));
  std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(keep), near.end());
  for (std::size_t n = 0; n < keep; ++n) {
    if (space.segment_free(p, rm.milestones()[near[n].second])) rm.add_edge(q, near[n].second);
  }
}

}  // namespace detail

/// Multi-query roadmap with targeted sampling:
///  1. targets become milestones, wired to nearby targets;
///  2. a batch of samples, `uniform_fraction` uniform and the rest near a random target;
///  3. while the majority component holds less than `phi_threshold` of the targets, add `increment` more;
///  4-5. otherwise pick an unconnected target, find the closest milestone pair between its component
///       and the majority component, and draw `bridging_samples` samples near either end; repeat;
/// stopping when every target shares one component or the budget runs out.
template <typename Space>
PrmResult build_prm(std::span<const Vec3> targets, const Space& space, const PrmParams& params) {
  if (targets.empty()) throw std::invalid_argument("PRM needs at least one target");
  PrmResult result;
  Roadmap& rm = result.roadmap;
  PrmStats& stats = result.stats;
  Rng rng(params.seed);

  std::vector<std::size_t> target_ids;
  for (Vec3 t : targets) target_ids.push_back(rm.add_milestone(t));
  rm.set_targets(target_ids);
  std::set<std::pair<std::size_t, std::size_t>> tried;
  for (std::size_t k = 0; k < target_ids.size(); ++k) {
    // Targets only wire to targets in this step.
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t l = 0; l < target_ids.size(); ++l) {
      if (l == k) continue;
      const double d = norm(targets[l] - targets[k]);
      if (d <= params.connection_radius) near.emplace_back(d, l);
    }
    const std::size_t keep = std::min<std::size_t>(near.size(), static_cast<std::size_t>(params.max_neighbors));
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(keep), near.end());
    for (std::size_t n = 0; n < keep; ++n) {
      const std::size_t l = near[n].second;
      if (!tried.emplace(std::min(k, l), std::max(k, l)).second) continue;
      if (space.segment_free(targets[k], targets[l])) rm.add_edge(target_ids[k], target_ids[l]);
    }
  }

  auto all_connected = [&] { return rm.target_connectivity() >= 1.0; };
  auto budget_left = [&] { return stats.samples < params.max_samples && stats.attempts < params.max_attempts; };

  auto add_sample = [&](const std::function<Vec3()>& draw) {
    while (budget_left()) {
      ++stats.attempts;
      const Vec3 q = draw();
      if (!space.point_free(q)) continue;
      const std::size_t id = rm.add_milestone(q);
      detail::connect_milestone(rm, id, space, params);
      ++stats.samples;
      return true;
    }
    return false;
  };
  auto mixed_draw = [&] {
    if (rng.bernoulli(params.uniform_fraction)) return space.sample_uniform(rng);
    return space.sample_near(targets[rng.index(targets.size())], params.neighborhood_radius, rng);
  };

  if (!all_connected()) {
    for (int s = 0; s < params.initial_batch && add_sample(mixed_draw); ++s) {
    }
  }
  while (!all_connected() && budget_left()) {
    if (rm.target_connectivity() < params.phi_threshold) {
      ++stats.increments;
      for (int s = 0; s < params.increment && add_sample(mixed_draw); ++s) {
      }
      continue;
    }
    ++stats.bridging_rounds;
    const auto major_members = rm.largest_target_component();
    const std::size_t major_root = rm.component_of(target_ids[major_members.front()]);
    std::vector<std::size_t> unconnected;
    for (std::size_t k = 0; k < target_ids.size(); ++k) {
      if (rm.component_of(target_ids[k]) != major_root) unconnected.push_back(k);
    }
    const std::size_t focus = target_ids[unconnected[rng.index(unconnected.size())]];
    const std::size_t focus_root = rm.component_of(focus);
    std::vector<std::size_t> in_focus, in_major;
    for (std::size_t m = 0; m < rm.size(); ++m) {
      const auto root = rm.component_of(m);
      if (root == focus_root) in_focus.push_back(m);
      if (root == major_root) in_major.push_back(m);
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t near_focus = focus, near_major = target_ids[major_members.front()];
    for (std::size_t a : in_focus) {
      for (std::size_t b : in_major) {
        const Vec3 d = rm.milestones()[a] - rm.milestones()[b];
        const double dd = dot(d, d);
        if (dd < best) {
          best = dd;
          near_focus = a;
          near_major = b;
        }
      }
    }
    const Vec3 pa = rm.milestones()[near_focus];
    const Vec3 pb = rm.milestones()[near_major];
    auto bridge_draw = [&] { return space.sample_near(rng.bernoulli(0.5) ? pa : pb, params.neighborhood_radius, rng); };
    for (int s = 0; s < params.bridging_samples && add_sample(bridge_draw); ++s) {
    }
  }
  stats.all_connected = all_connected();
  return result;
}

/// K x K shortest-path distances; infinity where disconnected.
struct DistanceMatrix {
  std::size_t size = 0;
  std::vector<double> d;

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : size(n), d(n * n, std::numeric_limits<double>::infinity()) {
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  }

  double at(std::size_t a, std::size_t b) const { return d[a * size + b]; }
  double& at(std::size_t a, std::size_t b) { return d[a * size + b]; }
};

/// All-pairs shortest paths between roadmap targets, with path playback.
class ShortestPaths {
 public:
  ShortestPaths() = default;

  ShortestPaths(const Roadmap& rm, std::span<const std::size_t> sources) : milestones_(rm.milestones()) {
    sources_.assign(sources.begin(), sources.end());
    distances_ = DistanceMatrix(sources_.size());
    predecessor_.resize(sources_.size());
    for (std::size_t s = 0; s < sources_.size(); ++s) {
      std::vector<double> dist;
      dijkstra(rm, sources_[s], dist, predecessor_[s]);
      for (std::size_t t = 0; t < sources_.size(); ++t) distances_.at(s, t) = dist[sources_[t]];
    }
    // Enforce exact symmetry against rounding in the two sweep directions.
    for (std::size_t a = 0; a < sources_.size(); ++a) {
      for (std::size_t b = a + 1; b < sources_.size(); ++b) {
        const double m = std::min(distances_.at(a, b), distances_.at(b, a));
        distances_.at(a, b) = distances_.at(b, a) = m;
      }
    }
  }

  const DistanceMatrix& distances() const { return distances_; }

  /// Milestone polyline from source a to source b (positions into the sources list).
  std::vector<Vec3> path(std::size_t a, std::size_t b) const {
    std::vector<Vec3> pts;
    if (!std::isfinite(distances_.at(a, b))) return pts;
    const auto& pred = predecessor_[a];
    for (std::size_t m = sources_[b];; m = pred[m]) {
      pts.push_back(milestones_[m]);
      if (m == sources_[a]) break;
    }
    std::reverse(pts.begin(), pts.end());
    return pts;
  }

 private:
  static void dijkstra(const Roadmap& rm, std::size_t source, std::vector<double>& dist, std::vector<std::size_t>& pred) {
    dist.assign(rm.size(), std::numeric_limits<double>::infinity());
    pred.assign(rm.size(), source);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (const RoadmapEdge& e : rm.neighbors(u)) {
        const double nd = d + e.length;
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          pred[e.to] = u;
          heap.emplace(nd, e.to);
        }
      }
    }
  }

  std::vector<Vec3> milestones_;
  std::vector<std::size_t> sources_;
  DistanceMatrix distances_;
  std::vector<std::vector<std::size_t>> predecessor_;
};

inline ShortestPaths shortest_path_matrix(const Roadmap& rm, std::span<const std::size_t> target_milestones) {
  return ShortestPaths(rm, target_milestones);
}

inline nlohmann::json roadmap_to_json(const Roadmap& rm) {
  nlohmann::json milestones = nlohmann::json::array();
  for (Vec3 q : rm.milestones()) milestones.push_back({q.x, q.y, q.z});
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t a = 0; a < rm.size(); ++a) {
    for (const RoadmapEdge& e : rm.neighbors(a)) {
      if (a < e.to) edges.push_back({a, e.to, e.length});
    }
  }
  return {{"format", "uvplan-roadmap"}, {"version", 1},        {"milestones", std::move(milestones)},
          {"edges", std::move(edges)},  {"targets", rm.targets()}, {"components", rm.component_labels()}};
}

inline Roadmap roadmap_from_json(const nlohmann::json& j) {
  if (j.at("format") != "uvplan-roadmap") throw std::invalid_argument("not a uvplan-roadmap document");
  Roadmap rm;
  for (const auto& q : j.at("milestones")) rm.add_milestone({q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>()});
  for (const auto& e : j.at("edges")) rm.add_edge(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  rm.set_targets(j.at("targets").get<std::vector<std::size_t>>());
  return rm;
}

}  // namespace uvplan
