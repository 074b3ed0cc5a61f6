#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uvplan/lp.hpp"
#include "uvplan/radiometry.hpp"
#include "uvplan/roadmap.hpp"
#include "uvplan/tour.hpp"

namespace uvplan {

enum class MilpBlock { dosing, big_m, out_degree, root_degree, balance, flow, capacity, flow_cap };

inline const char* to_string(MilpBlock b) {
  switch (b) {
    case MilpBlock::dosing: return "dosing";
    case MilpBlock::big_m: return "big_m";
    case MilpBlock::out_degree: return "out_degree";
    case MilpBlock::root_degree: return "root_degree";
    case MilpBlock::balance: return "balance";
    case MilpBlock::flow: return "flow";
    case MilpBlock::capacity: return "capacity";
    case MilpBlock::flow_cap: return "flow_cap";
  }
  return "unknown";
}

struct MilpEdge {
  std::size_t from = 0;  // model vertex
  std::size_t to = 0;
  double length = 0.0;   // m
};

struct MilpOptions {
  double big_m = 1e6;  // s; any value >= T_max
  /// Replace M by min(M, max_i mu_i / I_ik) per vertex: dwelling longer than the
  /// time at which vertex k alone covers every patch it sees is never optimal.
  /// With the plain 1e6 constant, z values near 1e-10 already move t by 1e-4,
  /// so node bounds drift by about 1e-6 relative.
  bool tighten_big_m = true;
  /// Insert a zero-distance dummy root so the tour need not return.
  bool open_path = false;
};

/// Joint dwell/tour model. Vertex 0 is the root the loop must pass through; with a
/// dummy root, vertex v >= 1 is vantage v - 1. Variable layout: t (one per vantage),
/// then z and g (one each per edge).
struct MilpModel {
  std::size_t vantage_count = 0;
  std::size_t vertex_count = 0;
  bool dummy_root = false;
  double v_max = 0.5;
  std::vector<double> big_m;  // per vantage
  std::vector<MilpEdge> edges;
  LpProblem relaxation;       // z in [0, 1]
  std::vector<MilpBlock> ge_blocks, le_blocks, eq_blocks;

  std::size_t t_index(std::size_t vantage) const { return vantage; }
  std::size_t z_index(std::size_t edge) const { return vantage_count + edge; }
  std::size_t g_index(std::size_t edge) const { return vantage_count + edges.size() + edge; }
  std::size_t variable_count() const { return vantage_count + 2 * edges.size(); }
  std::size_t binary_count() const { return edges.size(); }
  std::size_t continuous_count() const { return vantage_count + edges.size(); }

  /// Vantage index of a model vertex, or npos for the dummy root.
  std::size_t vantage_of(std::size_t vertex) const {
    if (!dummy_root) return vertex;
    return vertex == 0 ? npos : vertex - 1;
  }
  std::size_t vertex_of(std::size_t vantage) const { return dummy_root ? vantage + 1 : vantage; }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

/// Builds the model. Edges with infinite distance are omitted. A single vantage
/// always gets a dummy root, since a loop needs two vertices.
inline MilpModel build_milp(const IrradianceMatrix& irradiance, const DistanceMatrix& d, const std::vector<double>& mu_min,
                            double v_max, const MilpOptions& options = {}) {
  const std::size_t K = irradiance.cols, N = irradiance.rows;
  if (d.size != K) throw std::invalid_argument("distance matrix does not match vantage count");
  if (mu_min.size() != N) throw std::invalid_argument("mu_min does not match patch count");
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
  if (K == 0) throw std::invalid_argument("MILP needs at least one vantage");

  MilpModel m;
  m.vantage_count = K;
  m.dummy_root = options.open_path || K == 1;
  m.vertex_count = K + (m.dummy_root ? 1 : 0);
  m.v_max = v_max;
  const std::size_t V = m.vertex_count;
  for (std::size_t a = 0; a < V; ++a) {
    for (std::size_t b = 0; b < V; ++b) {
      if (a == b) continue;
      const std::size_t va = m.vantage_of(a), vb = m.vantage_of(b);
      const double len = (va == MilpModel::npos || vb == MilpModel::npos) ? 0.0 : d.at(va, vb);
      if (std::isfinite(len)) m.edges.push_back({a, b, len});
    }
  }
  m.big_m.assign(K, options.big_m);
  if (options.tighten_big_m) {
    for (std::size_t k = 0; k < K; ++k) {
      double need = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        if (irradiance.at(i, k) > 0.0) need = std::max(need, mu_min[i] / irradiance.at(i, k));
      }
      m.big_m[k] = std::min(options.big_m, need);
    }
  }

  const std::size_t nv = m.variable_count();
  LpProblem& lp = m.relaxation;
  lp.c.assign(nv, 0.0);
  for (std::size_t k = 0; k < K; ++k) lp.c[m.t_index(k)] = 1.0;
  for (std::size_t e = 0; e < m.edges.size(); ++e) lp.c[m.z_index(e)] = m.edges[e].length / v_max;
  lp.lower.assign(nv, 0.0);
  lp.upper.assign(nv, std::numeric_limits<double>::infinity());
  // z <= 1 is implied by the in-degree rows, so it is left implicit.

  auto row = [nv] { return std::vector<double>(nv, 0.0); };

  // Fluence: sum_k I_ik t_k >= mu_i.
  for (std::size_t i = 0; i < N; ++i) {
    auto r = row();
    for (std::size_t k = 0; k < K; ++k) r[m.t_index(k)] = irradiance.at(i, k);
    lp.a_ge.push_back(std::move(r));
    lp.b_ge.push_back(mu_min[i]);
    m.ge_blocks.push_back(MilpBlock::dosing);
  }
  // Linking: t_k <= M_k sum_l (z_kl + z_lk).
  for (std::size_t k = 0; k < K; ++k) {
    auto r = row();
    r[m.t_index(k)] = 1.0;
    const std::size_t v = m.vertex_of(k);
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edges[e].from == v || m.edges[e].to == v) r[m.z_index(e)] -= m.big_m[k];
    }
    lp.a_le.push_back(std::move(r));
    lp.b_le.push_back(0.0);
    m.le_blocks.push_back(MilpBlock::big_m);
  }
  // In-degree: at most one for l != root, exactly one for the root.
  for (std::size_t l = 0; l < V; ++l) {
    auto r = row();
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edges[e].to == l) r[m.z_index(e)] = 1.0;
    }
    if (l == 0) {
      lp.a_eq.push_back(std::move(r));
      lp.b_eq.push_back(1.0);
      m.eq_blocks.push_back(MilpBlock::root_degree);
    } else {
      lp.a_le.push_back(std::move(r));
      lp.b_le.push_back(1.0);
      m.le_blocks.push_back(MilpBlock::out_degree);
    }
  }
  // Balance: in-degree equals out-degree.
  for (std::size_t l = 0; l < V; ++l) {
    auto r = row();
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edges[e].to == l) r[m.z_index(e)] += 1.0;
      if (m.edges[e].from == l) r[m.z_index(e)] -= 1.0;
    }
    lp.a_eq.push_back(std::move(r));
    lp.b_eq.push_back(0.0);
    m.eq_blocks.push_back(MilpBlock::balance);
  }
  // Flow: each visited non-root vertex consumes one unit.
  for (std::size_t l = 1; l < V; ++l) {
    auto r = row();
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edges[e].to == l) {
        r[m.g_index(e)] += 1.0;
        r[m.z_index(e)] -= 1.0;
      }
      if (m.edges[e].from == l) r[m.g_index(e)] -= 1.0;
    }
    lp.a_eq.push_back(std::move(r));
    lp.b_eq.push_back(0.0);
    m.eq_blocks.push_back(MilpBlock::flow);
  }
  // Capacity: g_kl <= V z_kl and g_kl <= sum z - 1.
  const double cap = static_cast<double>(V);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    auto r = row();
    r[m.g_index(e)] = 1.0;
    r[m.z_index(e)] = -cap;
    lp.a_le.push_back(std::move(r));
    lp.b_le.push_back(0.0);
    m.le_blocks.push_back(MilpBlock::capacity);
  }
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    auto r = row();
    r[m.g_index(e)] = 1.0;
    for (std::size_t f = 0; f < m.edges.size(); ++f) r[m.z_index(f)] -= 1.0;
    lp.a_le.push_back(std::move(r));
    lp.b_le.push_back(-1.0);
    m.le_blocks.push_back(MilpBlock::flow_cap);
  }
  return m;
}

inline MilpModel build_milp(const IrradianceMatrix& irradiance, const DistanceMatrix& d, double mu_min, double v_max,
                            const MilpOptions& options = {}) {
  return build_milp(irradiance, d, std::vector<double>(irradiance.rows, mu_min), v_max, options);
}

enum class MilpStatus { optimal, time_limit, no_incumbent, infeasible };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::time_limit: return "time_limit";
    case MilpStatus::no_incumbent: return "no_incumbent";
    case MilpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct MilpSolution {
  MilpStatus status = MilpStatus::no_incumbent;
  std::vector<double> t;            // per vantage
  std::vector<int> z;               // per edge
  std::vector<double> g;            // per edge
  std::vector<std::size_t> loop;    // model vertices from the root, root not repeated
  std::vector<std::size_t> visits;  // vantages in loop order (dummy omitted)
  double objective = std::numeric_limits<double>::infinity();
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double total_dwell = 0.0;
  double travel_length = 0.0;
  long node_count = 0;
  long lp_failures = 0;
  std::string first_lp_failure;
  long bound_violations = 0;  // child relaxation below its parent
  double worst_bound_violation = 0.0;
  double seconds = 0.0;

  bool has_solution() const { return status == MilpStatus::optimal || status == MilpStatus::time_limit; }
};

struct MilpSolveOptions {
  double time_limit = 60.0;  // s
  double integrality_tolerance = 1e-6;
  double absolute_gap = 1e-7;
  /// Seed the incumbent with a tour over the vertices dwelled on by the root relaxation.
  bool root_heuristic = true;
  /// Invoked with the full variable vector of every integral solution found.
  std::function<void(const std::vector<double>&)> on_integral;
  LpOptions lp;
};

namespace detail {

inline std::vector<std::size_t> follow_loop(const MilpModel& m, const std::vector<int>& z) {
  std::vector<std::size_t> next(m.vertex_count, MilpModel::npos);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    if (z[e]) next[m.edges[e].from] = m.edges[e].to;
  }
  std::vector<std::size_t> loop{0};
  for (std::size_t v = next[0]; v != MilpModel::npos && v != 0 && loop.size() <= m.vertex_count; v = next[v]) {
    loop.push_back(v);
  }
  return loop;
}

}  // namespace detail

/// Branch-and-bound over z on LP relaxations: depth-first until the first
/// incumbent, best-bound afterwards, branching on the most fractional z.
inline MilpSolution solve_milp(const MilpModel& model, const MilpSolveOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  MilpSolution best;
  LpProblem work = model.relaxation;
  const std::vector<double> base_lower = work.lower, base_upper = work.upper;
  const std::size_t E = model.edges.size();

  struct Node {
    std::vector<std::pair<std::size_t, double>> fixings;  // (edge, 0 or 1)
    double parent_bound;
  };

  auto solve_with = [&](const std::vector<std::pair<std::size_t, double>>& fix) {
    work.lower = base_lower;
    work.upper = base_upper;
    for (const auto& [e, v] : fix) {
      work.lower[model.z_index(e)] = v;
      work.upper[model.z_index(e)] = v;
    }
    return solve_lp(work, options.lp);
  };

  auto consider_integral = [&](const LpResult& r) {
    if (options.on_integral) options.on_integral(r.x);
    if (r.objective >= best.objective) return;
    best.objective = r.objective;
    best.t.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(model.vantage_count));
    best.z.assign(E, 0);
    best.g.assign(E, 0.0);
    for (std::size_t e = 0; e < E; ++e) {
      best.z[e] = r.x[model.z_index(e)] > 0.5 ? 1 : 0;
      best.g[e] = r.x[model.g_index(e)];
    }
  };

  // Fix every z to its rounded value and re-solve, so big-M leakage from
  // near-integral values cannot distort the incumbent objective.
  auto try_rounded = [&](const LpResult& r) {
    std::vector<std::pair<std::size_t, double>> fix;
    for (std::size_t e = 0; e < E; ++e) fix.emplace_back(e, r.x[model.z_index(e)] > 0.5 ? 1.0 : 0.0);
    const LpResult fixed = solve_with(fix);
    if (fixed.optimal()) consider_integral(fixed);
    return fixed.optimal();
  };

  std::vector<Node> open;
  open.push_back({{}, -std::numeric_limits<double>::infinity()});
  bool have_incumbent = false;
  bool timed_out = false;
  bool root = true;

  while (!open.empty()) {
    if (elapsed() > options.time_limit) {
      timed_out = true;
      break;
    }
    std::size_t pick = open.size() - 1;
    if (have_incumbent) {
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (open[i].parent_bound < open[pick].parent_bound) pick = i;
      }
    }
    Node node = std::move(open[pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    if (have_incumbent && node.parent_bound >= best.objective - options.absolute_gap) continue;

    ++best.node_count;
    const LpResult r = solve_with(node.fixings);
    if (r.status == LpStatus::infeasible) continue;
    if (!r.optimal()) {
      if (best.lp_failures++ == 0) best.first_lp_failure = std::string(to_string(r.status)) + ": " + r.diagnostics;
      continue;
    }
    if (r.objective < node.parent_bound - 1e-9 * (1.0 + std::abs(node.parent_bound))) {
      ++best.bound_violations;
      best.worst_bound_violation = std::max(best.worst_bound_violation, node.parent_bound - r.objective);
    }
    if (have_incumbent && r.objective >= best.objective - options.absolute_gap) continue;

    if (root && options.root_heuristic) {
      root = false;
      // Loop through the root and every vertex the relaxation dwells on.
      std::vector<std::size_t> chosen{0};
      for (std::size_t k = 0; k < model.vantage_count; ++k) {
        const std::size_t v = model.vertex_of(k);
        if (v != 0 && r.x[model.t_index(k)] > 1e-9) chosen.push_back(v);
      }
      if (chosen.size() >= 2) {
        DistanceMatrix vd(model.vertex_count);
        for (const MilpEdge& e : model.edges) vd.at(e.from, e.to) = e.length;
        try {
          const Tour tour = solve_tsp(chosen, vd, TspMode::automatic, true);
          std::vector<std::pair<std::size_t, double>> fix;
          for (std::size_t e = 0; e < E; ++e) {
            bool used = false;
            for (std::size_t i = 0; i < tour.order.size(); ++i) {
              used = used || (model.edges[e].from == tour.order[i] &&
                              model.edges[e].to == tour.order[(i + 1) % tour.order.size()]);
            }
            fix.emplace_back(e, used ? 1.0 : 0.0);
          }
          const LpResult seeded = solve_with(fix);
          if (seeded.optimal()) {
            consider_integral(seeded);
            have_incumbent = true;
          }
        } catch (const UnreachableError&) {
        }
      }
      if (have_incumbent && r.objective >= best.objective - options.absolute_gap) continue;
    }
    root = false;

    std::size_t branch = E;
    double most = options.integrality_tolerance;
    for (std::size_t e = 0; e < E; ++e) {
      const double v = r.x[model.z_index(e)];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > most) {
        most = frac;
        branch = e;
      }
    }
    if (branch == E) {
      if (try_rounded(r)) {
        have_incumbent = true;
        continue;
      }
      // Rounding broke feasibility: branch on any z that is not exactly integral.
      for (std::size_t e = 0; e < E && branch == E; ++e) {
        const double v = r.x[model.z_index(e)];
        if (v != 0.0 && v != 1.0) branch = e;
      }
      if (branch == E) continue;
    }
    Node zero{node.fixings, r.objective};
    zero.fixings.emplace_back(branch, 0.0);
    Node one{std::move(node.fixings), r.objective};
    one.fixings.emplace_back(branch, 1.0);
    open.push_back(std::move(zero));
    open.push_back(std::move(one));  // explored first while diving
  }

  best.seconds = elapsed();
  if (!have_incumbent) {
    best.status = timed_out ? MilpStatus::no_incumbent : MilpStatus::infeasible;
    return best;
  }
  double lower = best.objective;
  for (const Node& n : open) lower = std::min(lower, n.parent_bound);
  best.bound = lower;
  best.gap = (best.objective - lower) / std::max(1e-9, std::abs(best.objective));
  if (best.gap < 1e-12) best.gap = 0.0;
  // Nodes whose relaxation failed were dropped unexplored, so optimality is then unproven.
  best.status = !timed_out && best.lp_failures == 0 ? MilpStatus::optimal : MilpStatus::time_limit;
  best.loop = detail::follow_loop(model, best.z);
  for (std::size_t v : best.loop) {
    if (model.vantage_of(v) != MilpModel::npos) best.visits.push_back(model.vantage_of(v));
  }
  best.total_dwell = 0.0;
  for (double t : best.t) best.total_dwell += t;
  best.travel_length = 0.0;
  for (std::size_t e = 0; e < E; ++e) best.travel_length += best.z[e] ? model.edges[e].length : 0.0;
  return best;
}

/// Model in CPLEX LP text format, for cross-checking with an external solver.
inline std::string export_lp_format(const MilpModel& m) {
  auto name = [&m](std::size_t j) {
    if (j < m.vantage_count) return "t" + std::to_string(j);
    const bool is_z = j < m.vantage_count + m.edges.size();
    const MilpEdge& e = m.edges[is_z ? j - m.vantage_count : j - m.vantage_count - m.edges.size()];
    return std::string(is_z ? "z" : "g") + "_" + std::to_string(e.from) + "_" + std::to_string(e.to);
  };
  auto terms = [&](const std::vector<double>& row) {
    std::ostringstream out;
    out.precision(17);
    bool first = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0) continue;
      out << (row[j] < 0 ? " - " : (first ? " " : " + ")) << std::abs(row[j]) << " " << name(j);
      first = false;
    }
    if (first) out << " 0 " << name(0);
    return out.str();
  };
  std::ostringstream out;
  out.precision(17);
  const LpProblem& lp = m.relaxation;
  out << "\\ uvplan joint dwell and tour model\nMinimize\n obj:" << terms(lp.c) << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.a_ge.size(); ++i) {
    out << " " << to_string(m.ge_blocks[i]) << "_ge" << i << ":" << terms(lp.a_ge[i]) << " >= " << lp.b_ge[i] << "\n";
  }
  for (std::size_t i = 0; i < lp.a_le.size(); ++i) {
    out << " " << to_string(m.le_blocks[i]) << "_le" << i << ":" << terms(lp.a_le[i]) << " <= " << lp.b_le[i] << "\n";
  }
  for (std::size_t i = 0; i < lp.a_eq.size(); ++i) {
    out << " " << to_string(m.eq_blocks[i]) << "_eq" << i << ":" << terms(lp.a_eq[i]) << " = " << lp.b_eq[i] << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < m.variable_count(); ++j) out << " " << name(j) << " >= 0\n";
  out << "Binaries\n";
  for (std::size_t e = 0; e < m.edges.size(); ++e) out << " " << name(m.z_index(e)) << "\n";
  out << "End\n";
  return out.str();
}

}  // namespace uvplan
