#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "uvplan/lp.hpp"
#include "oracles.hpp"

using namespace uvplan;

TEST(Lp, SingleVariableGe) {
  const LpResult r = solve_lp({1.0}, {{2.0}}, {4.0}, {}, {}, {0.0});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
}

TEST(Lp, InfeasibleBox) {
  const LpResult r = solve_lp({1.0}, {{1.0}}, {2.0}, {{1.0}}, {1.0}, {0.0});
  EXPECT_EQ(r.status, LpStatus::infeasible);
}

TEST(Lp, Unbounded) {
  const LpResult r = solve_lp({-1.0, 0.0}, {{1.0, -1.0}}, {0.0}, {}, {}, {0.0, 0.0});
  EXPECT_EQ(r.status, LpStatus::unbounded);
}

TEST(Lp, DimensionMismatchThrows) {
  EXPECT_THROW(solve_lp({1.0, 1.0}, {{1.0}}, {1.0}, {}, {}, {}), std::invalid_argument);
  EXPECT_THROW(solve_lp({1.0}, {{1.0}}, {1.0, 2.0}, {}, {}, {}), std::invalid_argument);
}

TEST(Lp, EqualityAndBounds) {
  LpProblem p;
  p.c = {1.0, 2.0, -1.0};
  p.a_eq = {{1.0, 1.0, 1.0}};
  p.b_eq = {4.0};
  p.lower = {1.0, 0.0, 0.0};
  p.upper = {10.0, 10.0, 2.5};
  const LpResult r = solve_lp(p);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.objective, 1.5 - 2.5, 1e-9);
  EXPECT_TRUE(verify_certificate(p, r).ok);
}

TEST(Lp, FixedVariableIsEliminated) {
  LpProblem p;
  p.c = {1.0, 1.0};
  p.a_ge = {{1.0, 1.0}};
  p.b_ge = {5.0};
  p.lower = {3.0, 0.0};
  p.upper = {3.0, 100.0};
  const LpResult r = solve_lp(p);
  ASSERT_TRUE(r.optimal());
  EXPECT_DOUBLE_EQ(r.x[0], 3.0);
  EXPECT_NEAR(r.x[1], 2.0, 1e-12);
  EXPECT_TRUE(verify_certificate(p, r).ok);
}

TEST(Lp, DegenerateCyclingExample) {
  // Beale's cycling instance; Dantzig pricing cycles on it without a fallback.
  LpProblem p;
  p.c = {-0.75, 150.0, -0.02, 6.0};
  p.a_le = {{0.25, -60.0, -0.04, 9.0}, {0.5, -90.0, -0.02, 3.0}, {0.0, 0.0, 1.0, 0.0}};
  p.b_le = {0.0, 0.0, 1.0};
  LpOptions opt;
  opt.degenerate_limit = 5;
  const LpResult r = solve_lp(p, opt);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.objective, -0.05, 1e-9);
}

TEST(Lp, RandomInstancesMatchVertexEnumeration) {
  std::mt19937_64 gen(20240611);
  for (int inst = 0; inst < 50; ++inst) {
    const oracle::RandomLp lp = oracle::random_bounded_lp(gen);
    const LpResult r = solve_lp(lp.problem);
    const double expected = oracle::vertex_enumeration_min(lp.problem);
    ASSERT_TRUE(r.optimal()) << "instance " << inst << ": " << r.diagnostics;
    EXPECT_NEAR(r.objective, expected, 1e-6) << "instance " << inst;
    EXPECT_TRUE(verify_certificate(lp.problem, r).ok) << "instance " << inst;
  }
}

TEST(Lp, CertificateRejectsPerturbedDuals) {
  LpProblem p;
  p.c = {1.0, 1.0};
  p.a_ge = {{1.0, 2.0}, {3.0, 1.0}};
  p.b_ge = {4.0, 6.0};
  LpResult r = solve_lp(p);
  ASSERT_TRUE(verify_certificate(p, r).ok);
  r.y_ge[0] += 0.5;
  EXPECT_FALSE(verify_certificate(p, r).ok);
}

namespace {

IrradianceMatrix matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  IrradianceMatrix m(rows, cols);
  m.values = std::move(values);
  return m;
}

}  // namespace

TEST(Dosing, SinglePatchSingleVantage) {
  const auto sol = solve_dwell_times(DosingProblem::uniform(matrix(1, 1, {6.3662}), 280.0));
  EXPECT_NEAR(sol.dwell[0], 280.0 / 6.3662, 1e-9);
  EXPECT_NEAR(sol.dwell[0], 43.98, 5e-3);
  EXPECT_NEAR(sol.slack[0], 0.0, 1e-9);
  EXPECT_EQ(sol.status, DosingStatus::optimal);
  EXPECT_TRUE(sol.certificate.ok);
}

TEST(Dosing, InvisiblePatchTakesFullSlack) {
  const auto sol = solve_dwell_times(DosingProblem::uniform(matrix(2, 1, {5.0, 0.0}), 280.0));
  EXPECT_NEAR(sol.slack[1], 280.0, 1e-9);
  EXPECT_NEAR(sol.dwell[0], 56.0, 1e-9);
  EXPECT_NEAR(sol.slack[0], 0.0, 1e-9);
}

TEST(Dosing, BudgetBound) {
  const auto sol = solve_dwell_times(DosingProblem::uniform(matrix(1, 1, {1.0}), 280.0, 100.0));
  EXPECT_NEAR(sol.total_dwell(), 100.0, 1e-9);
  EXPECT_NEAR(sol.slack[0], 180.0, 1e-9);
  EXPECT_EQ(sol.status, DosingStatus::budget_bound);
}

TEST(Dosing, PenaltyBelowNormRejected) {
  DosingProblem p = DosingProblem::uniform(matrix(1, 1, {10.0}), 280.0);
  p.penalties = {5.0};
  EXPECT_THROW(solve_dwell_times(p), std::invalid_argument);
}

TEST(Dosing, RandomSolvesAreFeasibleAndCertified) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = 5 + inst % 20, k = 2 + inst % 9;
    std::vector<double> v(n * k);
    for (double& x : v) x = u(gen) < 0.3 ? 0.0 : 10.0 * u(gen);
    const DosingProblem p = DosingProblem::uniform(matrix(n, k, v), 280.0, inst % 3 == 0 ? 50.0 : 1e6);
    const auto sol = solve_dwell_times(p);
    EXPECT_TRUE(sol.certificate.ok) << inst;
    EXPECT_LE(sol.total_dwell(), p.t_max + 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(sol.fluence[i] + sol.slack[i], 280.0 - 1e-6);
      EXPECT_GE(sol.slack[i], -1e-6);
    }
    for (double t : sol.dwell) EXPECT_GE(t, -1e-6);
  }
}

TEST(Dosing, Monotonicity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<double> v(12 * 5);
    for (double& x : v) x = u(gen);
    const IrradianceMatrix full = matrix(12, 5, v);
    const double base = solve_dwell_times(DosingProblem::uniform(full, 280.0)).objective;
    EXPECT_GE(solve_dwell_times(DosingProblem::uniform(full, 300.0)).objective, base - 1e-9);
    // Dropping a column (with the same penalties) can only raise the optimum.
    DosingProblem fewer = DosingProblem::uniform(full.select_columns(std::vector<std::size_t>{0, 1, 2, 3}), 280.0);
    fewer.penalties = DosingProblem::uniform(full, 280.0).penalties;
    EXPECT_GE(solve_dwell_times(fewer).objective, base - 1e-9);
  }
}

TEST(Dosing, JsonCarriesCertificate) {
  const auto sol = solve_dwell_times(DosingProblem::uniform(matrix(1, 1, {2.0}), 10.0));
  const auto j = dosing_solution_to_json(sol);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_TRUE(j["certificate"]["ok"].get<bool>());
  EXPECT_NEAR(j["total_dwell"].get<double>(), 5.0, 1e-12);
}
