#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvplan/radiometry.hpp"

namespace uvplan {

using DenseRows = std::vector<std::vector<double>>;

/// min c.x  s.t.  A_ge x >= b_ge,  A_le x <= b_le,  A_eq x = b_eq,  lower <= x <= upper.
/// Empty `lower` means all zeros, empty `upper` means all +inf. Lower bounds must be finite.
struct LpProblem {
  std::vector<double> c;
  DenseRows a_ge;
  std::vector<double> b_ge;
  DenseRows a_le;
  std::vector<double> b_le;
  DenseRows a_eq;
  std::vector<double> b_eq;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t variable_count() const { return c.size(); }
  double lower_bound(std::size_t j) const { return lower.empty() ? 0.0 : lower[j]; }
  double upper_bound(std::size_t j) const {
    return upper.empty() ? std::numeric_limits<double>::infinity() : upper[j];
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_error };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

/// Dual values follow the Lagrangian c.x - y.(Ax - b): y_ge >= 0, y_le <= 0, y_eq free.
/// y_ub holds multipliers of finite, non-fixing upper bounds (<= 0).
struct LpResult {
  LpStatus status = LpStatus::numerical_error;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> y_ge;
  std::vector<double> y_le;
  std::vector<double> y_eq;
  std::vector<double> y_ub;
  long iterations = 0;
  std::string diagnostics;

  bool optimal() const { return status == LpStatus::optimal; }
};

struct LpOptions {
  long max_iterations = 200000;
  int degenerate_limit = 1000;
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
};

namespace detail {

/// Dense two-phase tableau simplex on the bound-shifted standard form.
class Tableau {
 public:
  Tableau(const LpProblem& p, const LpOptions& opt) : p_(p), opt_(opt) {}

  LpResult run() {
    LpResult res;
    validate();
    build();
    res.iterations = 0;
    if (art_count_ > 0) {
      const LpStatus s1 = iterate(phase1_row_, true, res);
      if (s1 != LpStatus::optimal) {
        res.status = s1;
        return res;
      }
      const double infeas = -t(phase1_row_, rhs_col_);
      if (infeas > opt_.feasibility_tolerance * (1.0 + b_scale_)) {
        res.status = LpStatus::infeasible;
        std::ostringstream msg;
        msg << "phase 1 ended with infeasibility " << infeas;
        res.diagnostics = msg.str();
        return res;
      }
      drive_out_artificials();
    }
    const LpStatus s2 = iterate(phase2_row_, false, res);
    res.status = s2;
    if (s2 != LpStatus::optimal) return res;
    extract(res);
    return res;
  }

 private:
  double& t(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  double t(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }

  void validate() const {
    const std::size_t n = p_.c.size();
    auto check_block = [n](const DenseRows& a, const std::vector<double>& b, const char* name) {
      if (a.size() != b.size()) throw std::invalid_argument(std::string("LP block ") + name + ": row/rhs count mismatch");
      for (const auto& row : a) {
        if (row.size() != n) throw std::invalid_argument(std::string("LP block ") + name + ": row width mismatch");
        for (double v : row) {
          if (!std::isfinite(v)) throw std::invalid_argument(std::string("LP block ") + name + ": non-finite coefficient");
        }
      }
      for (double v : b) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string("LP block ") + name + ": non-finite rhs");
      }
    };
    check_block(p_.a_ge, p_.b_ge, "ge");
    check_block(p_.a_le, p_.b_le, "le");
    check_block(p_.a_eq, p_.b_eq, "eq");
    for (double v : p_.c) {
      if (!std::isfinite(v)) throw std::invalid_argument("LP objective has a non-finite coefficient");
    }
    if (!p_.lower.empty() && p_.lower.size() != n) throw std::invalid_argument("LP lower bounds size mismatch");
    if (!p_.upper.empty() && p_.upper.size() != n) throw std::invalid_argument("LP upper bounds size mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(p_.lower_bound(j))) throw std::invalid_argument("LP lower bounds must be finite");
      if (p_.upper_bound(j) < p_.lower_bound(j)) throw std::invalid_argument("LP upper bound below lower bound");
    }
  }

  enum class Kind { ge, le, eq, ub };

  struct Row {
    Kind kind;
    std::size_t source;  // index within its block, or variable index for ub rows
    double sign;         // internal row = sign * (original row shifted by lower bounds)
    std::size_t identity_col;
    double identity_coef;
  };

  void build() {
    const std::size_t n = p_.c.size();
    // Free structural columns; fixed variables are substituted out.
    col_of_var_.assign(n, kNone);
    for (std::size_t j = 0; j < n; ++j) {
      if (p_.upper_bound(j) > p_.lower_bound(j)) {
        col_of_var_[j] = vars_.size();
        vars_.push_back(j);
      }
    }
    const std::size_t ns = vars_.size();

    // Assemble rows as (dense coefficients over structural columns, rhs, kind).
    struct Raw {
      std::vector<double> a;
      double b;
      Kind kind;
      std::size_t source;
    };
    std::vector<Raw> raw;
    auto add_block = [&](const DenseRows& a, const std::vector<double>& b, Kind kind) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        Raw r{std::vector<double>(ns, 0.0), b[i], kind, i};
        for (std::size_t j = 0; j < n; ++j) {
          const double v = a[i][j];
          if (v == 0.0) continue;
          r.b -= v * p_.lower_bound(j);
          if (col_of_var_[j] != kNone) r.a[col_of_var_[j]] = v;
        }
        raw.push_back(std::move(r));
      }
    };
    add_block(p_.a_ge, p_.b_ge, Kind::ge);
    add_block(p_.a_le, p_.b_le, Kind::le);
    add_block(p_.a_eq, p_.b_eq, Kind::eq);
    for (std::size_t j = 0; j < n; ++j) {
      const double ub = p_.upper_bound(j);
      if (col_of_var_[j] == kNone || !std::isfinite(ub)) continue;
      Raw r{std::vector<double>(ns, 0.0), ub - p_.lower_bound(j), Kind::ub, j};
      r.a[col_of_var_[j]] = 1.0;
      raw.push_back(std::move(r));
    }
    m_ = raw.size();

    // Slack columns for inequalities.
    std::size_t slack_count = 0;
    for (const Raw& r : raw) slack_count += r.kind != Kind::eq ? 1 : 0;
    rows_.resize(m_);
    std::vector<double> row_sign(m_, 1.0);
    std::vector<double> slack_coef(m_, 0.0);
    std::vector<std::size_t> slack_col(m_, kNone);
    std::size_t next = ns;
    for (std::size_t i = 0; i < m_; ++i) {
      const Raw& r = raw[i];
      if (r.kind != Kind::eq) {
        slack_col[i] = next++;
        slack_coef[i] = r.kind == Kind::ge ? -1.0 : 1.0;
      }
      if (r.b < 0.0) row_sign[i] = -1.0;
    }
    // Basis candidates: a slack with coefficient +1 after the sign flip, else a
    // structural column that is nonzero only in this row with positive sign, else an artificial.
    std::vector<std::size_t> nnz(ns, 0);
    std::vector<std::size_t> only_row(ns, kNone);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < ns; ++j) {
        if (raw[i].a[j] != 0.0) {
          ++nnz[j];
          only_row[j] = i;
        }
      }
    }
    std::vector<bool> used(ns, false);
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m_; ++i) {
      Row& row = rows_[i];
      row.kind = raw[i].kind;
      row.source = raw[i].source;
      row.sign = row_sign[i];
      row.identity_col = kNone;
      if (slack_col[i] != kNone && slack_coef[i] * row.sign > 0.0) {
        row.identity_col = slack_col[i];
        row.identity_coef = 1.0;
        continue;
      }
      for (std::size_t j = 0; j < ns; ++j) {
        if (!used[j] && nnz[j] == 1 && only_row[j] == i && raw[i].a[j] * row.sign > 0.0) {
          row.identity_col = j;
          row.identity_coef = raw[i].a[j] * row.sign;
          used[j] = true;
          break;
        }
      }
      if (row.identity_col == kNone) art_rows.push_back(i);
    }
    art_begin_ = ns + slack_count;
    art_count_ = art_rows.size();
    for (std::size_t a = 0; a < art_rows.size(); ++a) {
      rows_[art_rows[a]].identity_col = art_begin_ + a;
      rows_[art_rows[a]].identity_coef = 1.0;
    }
    cols_ = art_begin_ + art_count_;
    rhs_col_ = cols_;
    width_ = cols_ + 1;
    phase2_row_ = m_;
    phase1_row_ = m_ + 1;
    data_.assign((m_ + 2) * width_, 0.0);
    cost_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < ns; ++j) cost_[j] = p_.c[vars_[j]];

    basis_.assign(m_, kNone);
    b_scale_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double s = rows_[i].sign;
      for (std::size_t j = 0; j < ns; ++j) t(i, j) = s * raw[i].a[j];
      if (slack_col[i] != kNone) t(i, slack_col[i]) = s * slack_coef[i];
      if (rows_[i].identity_col >= art_begin_) t(i, rows_[i].identity_col) = 1.0;
      t(i, rhs_col_) = s * raw[i].b;
      b_scale_ = std::max(b_scale_, std::abs(raw[i].b));
      // Normalize so the basic column is a unit vector.
      const double inv = 1.0 / rows_[i].identity_coef;
      if (inv != 1.0) {
        for (std::size_t c = 0; c < width_; ++c) t(i, c) *= inv;
      }
      basis_[i] = rows_[i].identity_col;
    }
    // Reduced-cost rows: d = c - c_B B^-1 A, with the objective value (negated) in the rhs slot.
    for (std::size_t j = 0; j < cols_; ++j) t(phase2_row_, j) = cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) t(phase2_row_, c) -= cb * t(i, c);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      for (std::size_t c = 0; c < width_; ++c) t(phase1_row_, c) -= t(i, c);
    }
    for (std::size_t a = 0; a < art_count_; ++a) t(phase1_row_, art_begin_ + a) = 0.0;
    c_scale_ = 1.0;
    for (double v : cost_) c_scale_ = std::max(c_scale_, std::abs(v));
  }

  void pivot(std::size_t r, std::size_t e) {
    const double inv = 1.0 / t(r, e);
    double* prow = &data_[r * width_];
    nz_.clear();
    for (std::size_t c = 0; c < width_; ++c) {
      if (prow[c] == 0.0) continue;
      prow[c] *= inv;
      nz_.push_back(c);
    }
    prow[e] = 1.0;
    const std::size_t last = (art_count_ > 0 ? phase1_row_ : phase2_row_) + 1;
    for (std::size_t i = 0; i < last; ++i) {
      if (i == r) continue;
      double* row = &data_[i * width_];
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t c : nz_) row[c] -= f * prow[c];
      row[e] = 0.0;
    }
    basis_[r] = e;
  }

  LpStatus iterate(std::size_t obj_row, bool phase1, LpResult& res) {
    const double dtol = opt_.optimality_tolerance * (phase1 ? 1.0 : c_scale_);
    int degenerate_run = 0;
    for (;;) {
      if (res.iterations >= opt_.max_iterations) {
        res.diagnostics = "iteration limit reached";
        return LpStatus::iteration_limit;
      }
      const bool bland = degenerate_run >= opt_.degenerate_limit;
      std::size_t enter = kNone;
      double best = -dtol;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        const double d = t(obj_row, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == kNone) return LpStatus::optimal;

      // Two-pass ratio test: bound the step with a small feasibility relaxation,
      // then take the largest pivot among rows inside that bound. Bland mode
      // uses the exact minimum ratio with lowest basis index instead.
      const double ptol = opt_.pivot_tolerance;
      bool tiny_only = false;
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t(i, enter);
        if (a <= ptol) {
          tiny_only = tiny_only || a > 1e-12;
          continue;
        }
        const double rhs = std::max(0.0, t(i, rhs_col_));
        bound = std::min(bound, bland ? rhs / a : (rhs + kHarrisDelta) / a);
      }
      std::size_t leave = kNone;
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_ && std::isfinite(bound); ++i) {
        const double a = t(i, enter);
        if (a <= ptol) continue;
        const double ratio = std::max(0.0, t(i, rhs_col_)) / a;
        if (ratio > bound) continue;
        const bool take = leave == kNone || (bland ? basis_[i] < basis_[leave] : a > t(leave, enter));
        if (take) leave = i;
        min_ratio = std::min(min_ratio, ratio);
      }
      if (leave == kNone) {
        if (tiny_only) {
          res.diagnostics = "only pivot candidates below " + std::to_string(ptol) + " in column " + std::to_string(enter);
          return LpStatus::numerical_error;
        }
        if (phase1) {
          res.diagnostics = "phase 1 reported unbounded";
          return LpStatus::numerical_error;
        }
        res.diagnostics = "unbounded direction in column " + std::to_string(enter);
        return LpStatus::unbounded;
      }
      degenerate_run = min_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++res.iterations;
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      std::size_t best = kNone;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(t(i, j)) > best_abs) {
          best = j;
          best_abs = std::abs(t(i, j));
        }
      }
      if (best != kNone) pivot(i, best);
    }
  }

  void extract(LpResult& res) const {
    const std::size_t n = p_.c.size();
    res.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) res.x[j] = p_.lower_bound(j);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < vars_.size()) res.x[vars_[basis_[i]]] += std::max(0.0, t(i, rhs_col_));
    }
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += p_.c[j] * res.x[j];

    res.y_ge.assign(p_.a_ge.size(), 0.0);
    res.y_le.assign(p_.a_le.size(), 0.0);
    res.y_eq.assign(p_.a_eq.size(), 0.0);
    res.y_ub.assign(n, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& row = rows_[i];
      const std::size_t j = row.identity_col;
      const double y_internal = (cost_[j] - t(phase2_row_, j)) / row.identity_coef;
      const double y = row.sign * y_internal;
      switch (row.kind) {
        case Kind::ge: res.y_ge[row.source] = y; break;
        case Kind::le: res.y_le[row.source] = y; break;
        case Kind::eq: res.y_eq[row.source] = y; break;
        case Kind::ub: res.y_ub[row.source] = y; break;
      }
    }
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr double kHarrisDelta = 1e-9;

  const LpProblem& p_;
  LpOptions opt_;
  std::vector<std::size_t> vars_;
  std::vector<std::size_t> col_of_var_;
  std::vector<Row> rows_;
  std::vector<double> data_;
  std::vector<double> cost_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
  std::size_t m_ = 0, cols_ = 0, width_ = 0, rhs_col_ = 0;
  std::size_t art_begin_ = 0, art_count_ = 0;
  std::size_t phase1_row_ = 0, phase2_row_ = 0;
  double b_scale_ = 0.0, c_scale_ = 1.0;
};

}  // namespace detail

inline LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {}) {
  return detail::Tableau(problem, options).run();
}

inline LpResult solve_lp(std::vector<double> c, DenseRows a_ge, std::vector<double> b_ge, DenseRows a_le,
                         std::vector<double> b_le, std::vector<double> lower_bounds, const LpOptions& options = {}) {
  LpProblem p;
  p.c = std::move(c);
  p.a_ge = std::move(a_ge);
  p.b_ge = std::move(b_ge);
  p.a_le = std::move(a_le);
  p.b_le = std::move(b_le);
  p.lower = std::move(lower_bounds);
  return solve_lp(p, options);
}

struct CertificateCheck {
  double primal_residual = 0.0;  // worst constraint or bound violation
  double dual_residual = 0.0;    // worst sign violation of multipliers or reduced costs
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;              // |primal - dual| / (1 + |primal|)
  bool ok = false;
};

/// Independent check of an optimal result: primal feasibility, dual feasibility
/// of (y, c - A^T y) and the duality gap.
inline CertificateCheck verify_certificate(const LpProblem& p, const LpResult& r, double tolerance = 1e-5) {
  CertificateCheck chk;
  const std::size_t n = p.c.size();
  if (r.x.size() != n || r.y_ge.size() != p.a_ge.size() || r.y_le.size() != p.a_le.size() ||
      r.y_eq.size() != p.a_eq.size() || r.y_ub.size() != n) {
    return chk;
  }
  auto row_dot = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[j] * r.x[j];
    return s;
  };
  for (std::size_t i = 0; i < p.a_ge.size(); ++i) chk.primal_residual = std::max(chk.primal_residual, p.b_ge[i] - row_dot(p.a_ge[i]));
  for (std::size_t i = 0; i < p.a_le.size(); ++i) chk.primal_residual = std::max(chk.primal_residual, row_dot(p.a_le[i]) - p.b_le[i]);
  for (std::size_t i = 0; i < p.a_eq.size(); ++i) chk.primal_residual = std::max(chk.primal_residual, std::abs(row_dot(p.a_eq[i]) - p.b_eq[i]));
  for (std::size_t j = 0; j < n; ++j) {
    chk.primal_residual = std::max(chk.primal_residual, p.lower_bound(j) - r.x[j]);
    chk.primal_residual = std::max(chk.primal_residual, r.x[j] - p.upper_bound(j));
  }

  std::vector<double> reduced(p.c);
  double dual = 0.0;
  for (std::size_t i = 0; i < p.a_ge.size(); ++i) {
    chk.dual_residual = std::max(chk.dual_residual, -r.y_ge[i]);
    dual += r.y_ge[i] * p.b_ge[i];
    for (std::size_t j = 0; j < n; ++j) reduced[j] -= r.y_ge[i] * p.a_ge[i][j];
  }
  for (std::size_t i = 0; i < p.a_le.size(); ++i) {
    chk.dual_residual = std::max(chk.dual_residual, r.y_le[i]);
    dual += r.y_le[i] * p.b_le[i];
    for (std::size_t j = 0; j < n; ++j) reduced[j] -= r.y_le[i] * p.a_le[i][j];
  }
  for (std::size_t i = 0; i < p.a_eq.size(); ++i) {
    dual += r.y_eq[i] * p.b_eq[i];
    for (std::size_t j = 0; j < n; ++j) reduced[j] -= r.y_eq[i] * p.a_eq[i][j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    const bool fixed = p.upper_bound(j) <= p.lower_bound(j);
    if (!fixed && std::isfinite(p.upper_bound(j))) {
      chk.dual_residual = std::max(chk.dual_residual, r.y_ub[j]);
      dual += r.y_ub[j] * p.upper_bound(j);
      reduced[j] -= r.y_ub[j];
    }
    if (!fixed) chk.dual_residual = std::max(chk.dual_residual, -reduced[j]);
    dual += reduced[j] * p.lower_bound(j);
  }
  double primal = 0.0;
  for (std::size_t j = 0; j < n; ++j) primal += p.c[j] * r.x[j];
  chk.primal_objective = primal;
  chk.dual_objective = dual;
  chk.gap = std::abs(primal - dual) / (1.0 + std::abs(primal));
  const double scale = 1.0 + std::abs(primal);
  chk.ok = r.optimal() && chk.primal_residual <= 1e-6 &&
           chk.dual_residual <= tolerance * scale && chk.gap <= tolerance;
  return chk;
}

// ---------------------------------------------------------------------------
// Dosing LP

struct DosingProblem {
  IrradianceMatrix irradiance;
  std::vector<double> mu_min;     // J/m^2 per patch
  std::vector<double> penalties;  // per patch
  double t_max = 1e6;             // s

  /// Uniform requirement with the default penalty of 10x the Frobenius norm.
  static DosingProblem uniform(IrradianceMatrix irradiance, double mu_min, double t_max = 1e6,
                               double penalty_factor = 10.0) {
    DosingProblem p;
    const std::size_t n = irradiance.rows;
    // Floor at 1 so an all-zero matrix still gets positive penalties.
    const double norm = std::max(irradiance.frobenius_norm(), 1.0);
    p.irradiance = std::move(irradiance);
    p.mu_min.assign(n, mu_min);
    p.penalties.assign(n, penalty_factor * norm);
    p.t_max = t_max;
    return p;
  }

  void validate() const {
    const std::size_t n = irradiance.rows;
    if (mu_min.size() != n || penalties.size() != n) throw std::invalid_argument("dosing vectors do not match patch count");
    const double norm = irradiance.frobenius_norm();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mu_min[i] > 0.0)) throw std::invalid_argument("mu_min must be positive");
      if (!(penalties[i] > norm)) throw std::invalid_argument("penalty must exceed the irradiance Frobenius norm");
    }
    if (!(t_max > 0.0)) throw std::invalid_argument("T_max must be positive");
    if (irradiance.cols == 0) throw std::invalid_argument("dosing problem has no vantage columns");
  }
};

enum class DosingStatus { optimal, budget_bound };

inline const char* to_string(DosingStatus s) { return s == DosingStatus::optimal ? "optimal" : "budget-bound"; }

struct DosingSolution {
  std::vector<double> dwell;  // s per vantage
  std::vector<double> slack;  // J/m^2 per patch
  std::vector<double> fluence;
  double objective = 0.0;
  DosingStatus status = DosingStatus::optimal;
  LpResult lp;
  CertificateCheck certificate;

  double total_dwell() const { return std::accumulate(dwell.begin(), dwell.end(), 0.0); }
};

/// Variables [t_1..t_K, sigma_1..sigma_N].
inline LpProblem dosing_lp(const DosingProblem& problem) {
  const IrradianceMatrix& I = problem.irradiance;
  const std::size_t K = I.cols, N = I.rows;
  LpProblem lp;
  lp.c.assign(K + N, 1.0);
  for (std::size_t i = 0; i < N; ++i) lp.c[K + i] = problem.penalties[i];
  lp.a_ge.assign(N, std::vector<double>(K + N, 0.0));
  lp.b_ge = problem.mu_min;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < K; ++k) lp.a_ge[i][k] = I.at(i, k);
    lp.a_ge[i][K + i] = 1.0;
  }
  std::vector<double> budget(K + N, 0.0);
  std::fill(budget.begin(), budget.begin() + static_cast<std::ptrdiff_t>(K), 1.0);
  lp.a_le.push_back(std::move(budget));
  lp.b_le.push_back(problem.t_max);
  return lp;
}

inline std::vector<double> fluence(const IrradianceMatrix& I, const std::vector<double>& dwell) {
  if (dwell.size() != I.cols) throw std::invalid_argument("dwell vector does not match vantage count");
  std::vector<double> mu(I.rows, 0.0);
  for (std::size_t i = 0; i < I.rows; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < I.cols; ++k) s += I.at(i, k) * dwell[k];
    mu[i] = s;
  }
  return mu;
}

inline DosingSolution solve_dwell_times(const DosingProblem& problem, const LpOptions& options = {}) {
  problem.validate();
  const std::size_t K = problem.irradiance.cols;
  const LpProblem lp = dosing_lp(problem);
  DosingSolution sol;
  sol.lp = solve_lp(lp, options);
  if (!sol.lp.optimal()) {
    throw std::runtime_error(std::string("dosing LP failed: ") + to_string(sol.lp.status) + " " + sol.lp.diagnostics);
  }
  sol.certificate = verify_certificate(lp, sol.lp);
  sol.dwell.assign(sol.lp.x.begin(), sol.lp.x.begin() + static_cast<std::ptrdiff_t>(K));
  sol.slack.assign(sol.lp.x.begin() + static_cast<std::ptrdiff_t>(K), sol.lp.x.end());
  sol.objective = sol.lp.objective;
  sol.fluence = fluence(problem.irradiance, sol.dwell);
  sol.status = sol.total_dwell() >= problem.t_max * (1.0 - 1e-9) ? DosingStatus::budget_bound : DosingStatus::optimal;
  return sol;
}

inline nlohmann::json dosing_problem_to_json(const DosingProblem& p) {
  return {{"format", "uvplan-dosing-problem"},
          {"version", 1},
          {"patches", p.irradiance.rows},
          {"vantages", p.irradiance.cols},
          {"mu_min", p.mu_min},
          {"penalties", p.penalties},
          {"t_max", p.t_max}};
}

inline nlohmann::json dosing_solution_to_json(const DosingSolution& s) {
  return {{"format", "uvplan-dosing-solution"},
          {"version", 1},
          {"status", to_string(s.status)},
          {"objective", s.objective},
          {"total_dwell", s.total_dwell()},
          {"dwell", s.dwell},
          {"slack", s.slack},
          {"fluence", s.fluence},
          {"lp_iterations", s.lp.iterations},
          {"certificate",
           {{"primal_residual", s.certificate.primal_residual},
            {"dual_residual", s.certificate.dual_residual},
            {"gap", s.certificate.gap},
            {"ok", s.certificate.ok}}}};
}

}  // namespace uvplan
