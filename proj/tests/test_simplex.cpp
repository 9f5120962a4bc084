#include <gtest/gtest.h>

#include <random>

#include "dtnlab/simplex.hpp"
#include "oracles.hpp"

using namespace dtnlab;
using namespace dtnlab::lp;

namespace {

double row_value(const Row& row, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : row.terms) v += t.coef * x[t.var];
  return v;
}

void expect_feasible(const Program& p, const Result& r) {
  ASSERT_EQ(r.x.size(), p.variable_count());
  for (std::size_t j = 0; j < p.variable_count(); ++j) {
    EXPECT_GE(r.x[j], p.lower[j] - 1e-7);
    EXPECT_LE(r.x[j], p.upper[j] + 1e-7);
  }
  for (const auto& row : p.rows) {
    const double v = row_value(row, r.x);
    if (row.sense == Sense::le) EXPECT_LE(v, row.rhs + 1e-7);
    if (row.sense == Sense::ge) EXPECT_GE(v, row.rhs - 1e-7);
    if (row.sense == Sense::eq) EXPECT_NEAR(v, row.rhs, 1e-7);
  }
}

}  // namespace

TEST(Simplex, SmallTextbookProblem) {
  // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  x=2, y=6, 36.
  Program p;
  const int x = p.add_variable(-3, 0, kInfinity);
  const int y = p.add_variable(-5, 0, kInfinity);
  p.rows.push_back({{{x, 1}}, Sense::le, 4});
  p.rows.push_back({{{y, 2}}, Sense::le, 12});
  p.rows.push_back({{{x, 3}, {y, 2}}, Sense::le, 18});
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::optimal);
  EXPECT_NEAR(r.objective, -36, 1e-9);
  EXPECT_NEAR(r.x[x], 2, 1e-9);
  EXPECT_NEAR(r.x[y], 6, 1e-9);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  Program inf;
  const int a = inf.add_variable(1, 0, 1);
  const int b = inf.add_variable(1, 0, 1);
  inf.rows.push_back({{{a, 1}, {b, 1}}, Sense::ge, 5});
  EXPECT_EQ(solve(inf).status, Status::infeasible);

  Program unb;
  const int x = unb.add_variable(-1, 0, kInfinity);
  const int y = unb.add_variable(0, 0, kInfinity);
  unb.rows.push_back({{{x, 1}, {y, -1}}, Sense::le, 1});
  EXPECT_EQ(solve(unb).status, Status::unbounded);

  Program eq;
  const int z = eq.add_variable(0, 2, 2);
  eq.rows.push_back({{{z, 1}}, Sense::eq, 3});
  EXPECT_EQ(solve(eq).status, Status::infeasible);
}

TEST(Simplex, BealeCyclingExample) {
  // Cycles under textbook Dantzig pricing without anti-cycling.
  Program p;
  const int x1 = p.add_variable(-0.75, 0, kInfinity);
  const int x2 = p.add_variable(150, 0, kInfinity);
  const int x3 = p.add_variable(-0.02, 0, kInfinity);
  const int x4 = p.add_variable(6, 0, kInfinity);
  p.rows.push_back({{{x1, 0.25}, {x2, -60}, {x3, -0.04}, {x4, 9}}, Sense::le, 0});
  p.rows.push_back({{{x1, 0.5}, {x2, -90}, {x3, -0.02}, {x4, 3}}, Sense::le, 0});
  p.rows.push_back({{{x3, 1}}, Sense::le, 1});
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::optimal);
  EXPECT_NEAR(r.objective, -0.05, 1e-9);
}

TEST(Simplex, FixedVariablesAndEmptyPrograms) {
  Program p;
  const int a = p.add_variable(2, 3, 3);
  const int b = p.add_variable(1, 0, 5);
  p.rows.push_back({{{a, 1}, {b, 1}}, Sense::ge, 4});
  p.rows.push_back(Row{});
  p.rows.back().sense = Sense::le;
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::optimal);
  EXPECT_NEAR(r.objective, 7, 1e-9);
  EXPECT_NEAR(r.x[b], 1, 1e-9);

  Program empty;
  const auto e = solve(empty);
  EXPECT_EQ(e.status, Status::optimal);
  EXPECT_EQ(e.objective, 0.0);

  Program bad_empty_row;
  bad_empty_row.add_variable(1, 0, 1);
  bad_empty_row.rows.push_back({{}, Sense::eq, 1});
  EXPECT_EQ(solve(bad_empty_row).status, Status::infeasible);
}

TEST(Simplex, NegativeLowerBounds) {
  Program p;
  const int x = p.add_variable(1, -4, 2);
  const int y = p.add_variable(-1, -1, 3);
  p.rows.push_back({{{x, 1}, {y, 1}}, Sense::ge, -2});
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::optimal);
  EXPECT_NEAR(r.objective, -7, 1e-9);
  expect_feasible(p, r);
}

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> coef(-3, 3);
  int optimal = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 600; ++trial) {
    Program p;
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = static_cast<int>(rng() % 4);
    for (int j = 0; j < n; ++j) {
      const double lo = static_cast<double>(coef(rng));
      const double hi = lo + static_cast<double>(rng() % 6);
      p.add_variable(coef(rng), lo, hi);
    }
    for (int i = 0; i < m; ++i) {
      Row row;
      for (int j = 0; j < n; ++j) {
        const int c = coef(rng);
        if (c != 0) row.terms.push_back({j, static_cast<double>(c)});
      }
      row.sense = static_cast<Sense>(rng() % 3);
      row.rhs = coef(rng) * 2;
      p.rows.push_back(row);
    }
    const auto want = oracle::vertex_enumeration(p);
    const auto got = solve(p);
    ASSERT_EQ(got.status, want.status) << "trial " << trial;
    if (got.status == Status::optimal) {
      EXPECT_NEAR(got.objective, want.objective, 1e-7) << "trial " << trial;
      expect_feasible(p, got);
      ++optimal;
    } else {
      ++infeasible;
    }
  }
  EXPECT_GT(optimal, 100);
  EXPECT_GT(infeasible, 20);
}

TEST(Simplex, StatusNames) {
  EXPECT_EQ(to_string(Status::optimal), "optimal");
  EXPECT_EQ(to_string(Status::numerical_failure), "numerical_failure");
}
