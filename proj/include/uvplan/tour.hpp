#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvplan/roadmap.hpp"

namespace uvplan {

struct Tour {
  std::vector<std::size_t> order;  // vantage indices, each selected index exactly once
  double length = 0.0;             // m
  bool closed = true;
};

enum class TspMode { automatic, exact, heuristic };

inline constexpr std::size_t kExactTspLimit = 13;

class UnreachableError : public std::runtime_error {
 public:
  explicit UnreachableError(std::vector<std::size_t> indices)
      : std::runtime_error(describe(indices)), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  static std::string describe(const std::vector<std::size_t>& idx) {
    std::string s = "selected vantages unreachable from the first selected vantage:";
    for (std::size_t i : idx) s += " " + std::to_string(i);
    return s;
  }
  std::vector<std::size_t> indices_;
};

/// Sum of consecutive distances, plus the return edge when closed.
inline double tour_length(std::span<const std::size_t> order, const DistanceMatrix& d, bool closed) {
  double len = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) len += d.at(order[i - 1], order[i]);
  if (closed && order.size() > 1) len += d.at(order.back(), order.front());
  return len;
}

namespace detail {

/// Local dense matrix over positions 0..n-1 of a selection, with an optional trailing zero-distance dummy.
struct LocalMatrix {
  std::size_t n = 0;
  std::vector<double> d;
  double at(std::size_t a, std::size_t b) const { return d[a * n + b]; }
};

inline LocalMatrix local_matrix(std::span<const std::size_t> selected, const DistanceMatrix& dm, bool with_dummy) {
  LocalMatrix m;
  m.n = selected.size() + (with_dummy ? 1 : 0);
  m.d.assign(m.n * m.n, 0.0);
  for (std::size_t a = 0; a < selected.size(); ++a) {
    for (std::size_t b = 0; b < selected.size(); ++b) m.d[a * m.n + b] = dm.at(selected[a], selected[b]);
  }
  return m;
}

inline double cycle_length(const std::vector<std::size_t>& cyc, const LocalMatrix& m) {
  double len = 0.0;
  for (std::size_t i = 0; i < cyc.size(); ++i) len += m.at(cyc[i], cyc[(i + 1) % cyc.size()]);
  return len;
}

/// Optimal Hamiltonian cycle through all local nodes, starting at node 0.
inline std::vector<std::size_t> held_karp_cycle(const LocalMatrix& m) {
  const std::size_t n = m.n;
  if (n <= 2) {
    std::vector<std::size_t> cyc(n);
    for (std::size_t i = 0; i < n; ++i) cyc[i] = i;
    return cyc;
  }
  // dp[S][j]: shortest path from 0 through set S (over nodes 1..n-1) ending at j in S.
  const std::size_t rest = n - 1;
  const std::size_t full = std::size_t{1} << rest;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full * rest, inf);
  std::vector<std::uint8_t> parent(full * rest, 0xFF);
  for (std::size_t j = 0; j < rest; ++j) dp[(std::size_t{1} << j) * rest + j] = m.at(0, j + 1);
  for (std::size_t s = 1; s < full; ++s) {
    for (std::size_t j = 0; j < rest; ++j) {
      if (!(s & (std::size_t{1} << j))) continue;
      const double base = dp[s * rest + j];
      if (base == inf) continue;
      for (std::size_t k = 0; k < rest; ++k) {
        if (s & (std::size_t{1} << k)) continue;
        const std::size_t ns = s | (std::size_t{1} << k);
        const double cand = base + m.at(j + 1, k + 1);
        if (cand < dp[ns * rest + k]) {
          dp[ns * rest + k] = cand;
          parent[ns * rest + k] = static_cast<std::uint8_t>(j);
        }
      }
    }
  }
  double best = inf;
  std::size_t last = 0;
  for (std::size_t j = 0; j < rest; ++j) {
    const double cand = dp[(full - 1) * rest + j] + m.at(j + 1, 0);
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  std::vector<std::size_t> cyc;
  std::size_t s = full - 1;
  std::size_t j = last;
  while (j != 0xFF) {
    cyc.push_back(j + 1);
    const std::uint8_t p = parent[s * rest + j];
    s &= ~(std::size_t{1} << j);
    j = p;
  }
  cyc.push_back(0);
  std::reverse(cyc.begin(), cyc.end());
  return cyc;
}

inline std::vector<std::size_t> nearest_neighbor_cycle(const LocalMatrix& m) {
  if (m.n == 0) return {};
  std::vector<std::size_t> cyc{0};
  std::vector<bool> used(m.n, false);
  used[0] = true;
  for (std::size_t step = 1; step < m.n; ++step) {
    const std::size_t cur = cyc.back();
    std::size_t best = m.n;
    for (std::size_t j = 0; j < m.n; ++j) {
      if (!used[j] && (best == m.n || m.at(cur, j) < m.at(cur, best))) best = j;
    }
    used[best] = true;
    cyc.push_back(best);
  }
  return cyc;
}

/// First-improvement 2-opt on a symmetric cycle until no move gains more than 1e-12.
inline void two_opt(std::vector<std::size_t>& cyc, const LocalMatrix& m) {
  const std::size_t n = cyc.size();
  if (n < 4) return;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i + 2 < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        const std::size_t a = cyc[i], b = cyc[i + 1], c = cyc[j], d = cyc[(j + 1) % n];
        const double delta = m.at(a, c) + m.at(b, d) - m.at(a, b) - m.at(c, d);
        if (delta < -1e-12) {
          std::reverse(cyc.begin() + static_cast<std::ptrdiff_t>(i + 1), cyc.begin() + static_cast<std::ptrdiff_t>(j + 1));
          improved = true;
        }
      }
    }
  }
}

}  // namespace detail

/// Nearest-neighbor tour and its 2-opt refinement, both reported so callers can compare.
struct HeuristicTours {
  Tour nearest_neighbor;
  Tour refined;
};

inline void check_reachable(std::span<const std::size_t> selected, const DistanceMatrix& d) {
  std::vector<std::size_t> bad;
  for (std::size_t a = 1; a < selected.size(); ++a) {
    if (!std::isfinite(d.at(selected[0], selected[a]))) bad.push_back(selected[a]);
  }
  if (!bad.empty()) throw UnreachableError(std::move(bad));
}

namespace detail {

inline Tour to_tour(const std::vector<std::size_t>& cyc, std::span<const std::size_t> selected, const DistanceMatrix& d,
                    bool closed) {
  Tour tour;
  tour.closed = closed;
  const std::size_t m = selected.size();
  if (closed) {
    // Rotate to start at the lowest selected index.
    std::size_t start = 0;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      if (selected[cyc[i]] < selected[cyc[start]]) start = i;
    }
    for (std::size_t i = 0; i < cyc.size(); ++i) tour.order.push_back(selected[cyc[(start + i) % cyc.size()]]);
  } else {
    // Cut the cycle at the dummy node m.
    const auto it = std::find(cyc.begin(), cyc.end(), m);
    const std::size_t pos = static_cast<std::size_t>(it - cyc.begin());
    for (std::size_t i = 1; i < cyc.size(); ++i) tour.order.push_back(selected[cyc[(pos + i) % cyc.size()]]);
  }
  tour.length = tour_length(tour.order, d, closed);
  return tour;
}

}  // namespace detail

inline HeuristicTours heuristic_tours(std::span<const std::size_t> selected, const DistanceMatrix& d, bool closed = true) {
  check_reachable(selected, d);
  const auto m = detail::local_matrix(selected, d, !closed);
  auto cyc = detail::nearest_neighbor_cycle(m);
  HeuristicTours out;
  out.nearest_neighbor = detail::to_tour(cyc, selected, d, closed);
  detail::two_opt(cyc, m);
  out.refined = detail::to_tour(cyc, selected, d, closed);
  return out;
}

/// Exact (Held-Karp) for up to 13 points in automatic mode, otherwise nearest neighbor + 2-opt.
/// Open tours add a zero-distance dummy node and cut the cycle there.
inline Tour solve_tsp(std::span<const std::size_t> selected, const DistanceMatrix& d, TspMode mode = TspMode::automatic,
                      bool closed = true) {
  Tour tour;
  tour.closed = closed;
  if (selected.empty()) return tour;
  check_reachable(selected, d);
  const bool exact = mode == TspMode::exact || (mode == TspMode::automatic && selected.size() <= kExactTspLimit);
  if (!exact) return heuristic_tours(selected, d, closed).refined;
  if (selected.size() > 16) throw std::invalid_argument("exact TSP limited to 16 points");
  const auto m = detail::local_matrix(selected, d, !closed);
  return detail::to_tour(detail::held_karp_cycle(m), selected, d, closed);
}

}  // namespace uvplan
