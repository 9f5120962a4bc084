#include <gtest/gtest.h>

#include <random>

#include "dtnlab/experiments.hpp"
#include "dtnlab/lp_oracle.hpp"
#include "oracles.hpp"

using namespace dtnlab;

namespace {

const char* kTriangle =
    "plan 3 10\nnode 1 inf\nnode 2 inf\nnode 3 inf\n"
    "contact 1 1 2 0 10 10\ncontact 2 2 3 10 20 10\ncontact 3 1 3 20 30 10\n";

ContactPlan triangle() { return parse_contact_plan(kTriangle); }

std::vector<Commodity> triangle_commodities(double ttl1 = 30, double ttl2 = 30, double amount = 10) {
  return {{NodeId{1}, NodeId{3}, 0.0, ttl1, amount}, {NodeId{2}, NodeId{3}, 0.0, ttl2, amount}};
}

double flow_on(const LpProblem& p, const LpSolution& s, int contact, std::size_t commodity) {
  double v = 0.0;
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    if (value(p.arcs[a].contact) == contact) v += s.values[p.flow_var(a, commodity)];
  }
  return v;
}

}  // namespace

TEST(LpOracle, TriangleModelSize) {
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  EXPECT_EQ(p.arcs.size(), 3u);
  EXPECT_EQ(p.flow_variable_count(), 6u);
  EXPECT_EQ(p.buffer_variable_count(), 24u);
  EXPECT_EQ(p.program.variable_count(), 30u);
}

TEST(LpOracle, TriangleOptimum) {
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, 50.0, 1e-9);
  EXPECT_NEAR(flow_on(p, s, 3, 0), 10.0, 1e-9);
  EXPECT_NEAR(flow_on(p, s, 1, 0), 0.0, 1e-9);
  EXPECT_NEAR(flow_on(p, s, 2, 1), 10.0, 1e-9);
  EXPECT_TRUE(verify_solution(p, s, 1e-6).empty());
  const auto m = lp_metrics(p, s);
  EXPECT_DOUBLE_EQ(*m.delivery_ratio, 1.0);
  EXPECT_NEAR(*m.mean_hops, 1.0, 1e-12);
  EXPECT_NEAR(*m.energy_efficiency, 1.0, 1e-12);
  EXPECT_NEAR(*m.mean_delay, 25.0, 1e-12);
}

TEST(LpOracle, DeadlineForcesTwoHopRoute) {
  const auto p = build_lp(triangle(), triangle_commodities(20, 30, 5), StateWeights::linear(3));
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, 25.0, 1e-9);
  EXPECT_NEAR(flow_on(p, s, 1, 0), 5.0, 1e-9);
  EXPECT_NEAR(flow_on(p, s, 3, 0), 0.0, 1e-9);
  EXPECT_NEAR(*lp_metrics(p, s).mean_hops, 1.5, 1e-9);
}

TEST(LpOracle, OverloadIsInfeasibleInHardModeAndPricedInSoftMode) {
  const auto hard = build_lp(triangle(), triangle_commodities(20, 30, 10), StateWeights::linear(3));
  EXPECT_EQ(solve_lp(hard).status, lp::Status::infeasible);
  const auto unpruned = build_lp(triangle(), triangle_commodities(20, 30, 10), StateWeights::linear(3), {false, false});
  EXPECT_EQ(solve_lp(unpruned).status, lp::Status::infeasible);

  const auto soft = build_lp(triangle(), triangle_commodities(20, 30, 10), StateWeights::linear(3), {true, true});
  EXPECT_DOUBLE_EQ(soft.drop_penalty, 90.0);
  const auto s = solve_lp(soft);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, 920.0, 1e-9);
  EXPECT_NEAR(s.values[soft.drop_var(0)], 10.0, 1e-9);
  EXPECT_NEAR(*lp_metrics(soft, s).delivery_ratio, 0.5, 1e-12);
  EXPECT_TRUE(verify_solution(soft, s, 1e-6).empty());
}

TEST(LpOracle, PrecedenceBlocksEarlyArcs) {
  const std::vector<Commodity> c{{NodeId{1}, NodeId{3}, 10.0, kInfinity, 4}};
  const auto p = build_lp(triangle(), c, StateWeights::linear(3), {false, false});
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    if (p.arcs[a].state <= 1) EXPECT_EQ(p.program.upper[p.flow_var(a, 0)], 0.0);
  }
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(flow_on(p, s, 3, 0), 4.0, 1e-9);
}

TEST(LpOracle, BufferCapacity) {
  auto plan = triangle();
  plan.nodes[1].buffer_capacity = 5;
  EXPECT_EQ(solve_lp(build_lp(plan, triangle_commodities(), StateWeights::linear(3))).status, lp::Status::infeasible);
  plan.nodes[1].buffer_capacity = 10;
  const auto p = build_lp(plan, triangle_commodities(), StateWeights::linear(3));
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, 50.0, 1e-9);
}

TEST(LpOracle, DestinationDoesNotReemit) {
  const auto plan = parse_contact_plan(
      "plan 2 10\nnode 1 inf\nnode 2 inf\nnode 3 inf\ncontact 1 1 2 0 10 5\ncontact 2 2 3 10 20 5\n");
  const std::vector<Commodity> c{{NodeId{1}, NodeId{2}, 0.0, kInfinity, 3}};
  const auto p = build_lp(plan, c, StateWeights::linear(2), {false, false});
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    if (p.arcs[a].from == NodeId{2}) EXPECT_EQ(p.program.upper[p.flow_var(a, 0)], 0.0);
  }
}

TEST(LpOracle, VerifierCatchesEveryUnitMutation) {
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  for (std::size_t j = 0; j < s.values.size(); ++j) {
    for (double delta : {-1.0, 1.0}) {
      auto m = s;
      m.values[j] += delta;
      EXPECT_FALSE(verify_solution(p, m, 1e-6).empty()) << "variable " << j << " delta " << delta;
    }
  }
  auto short_vec = s;
  short_vec.values.pop_back();
  EXPECT_THROW(verify_solution(p, short_vec, 1e-6), Error);
}

TEST(LpOracle, VerifierNamesTheBrokenConstraint) {
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  auto s = solve_lp(p);
  // Ten extra packets on the second arc push it past its capacity.
  s.values[p.flow_var(1, 0)] += 10;
  bool capacity = false;
  for (const auto& v : verify_solution(p, s, 1e-6)) capacity = capacity || v.tag == ConstraintTag::arc_capacity;
  EXPECT_TRUE(capacity);
}

TEST(LpOracle, PruningKeepsTheOptimum) {
  std::mt19937_64 rng(5);
  int feasible = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int nodes = 3 + static_cast<int>(rng() % 3);
    const int states = 2 + static_cast<int>(rng() % 4);
    auto plan = oracle::random_small_plan(rng, nodes, states, 12);
    std::vector<Commodity> cs;
    const int count = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < count; ++i) {
      const int src = 1 + static_cast<int>(rng() % nodes);
      int dst = 1 + static_cast<int>(rng() % nodes);
      while (dst == src) dst = 1 + static_cast<int>(rng() % nodes);
      const double t_gen = 10.0 * static_cast<double>(rng() % states);
      const double ttl = rng() % 2 ? kInfinity : 10.0 * static_cast<double>(1 + rng() % states);
      cs.push_back({NodeId{src}, NodeId{dst}, t_gen, ttl, static_cast<double>(1 + rng() % 3)});
    }
    for (bool soft : {false, true}) {
      const auto a = solve_lp(build_lp(plan, cs, StateWeights::linear(states), {true, soft}));
      const auto b = solve_lp(build_lp(plan, cs, StateWeights::linear(states), {false, soft}));
      ASSERT_EQ(a.status, b.status) << serialize_contact_plan(plan);
      ASSERT_NE(a.status, lp::Status::numerical_failure);
      if (a.status == lp::Status::optimal) {
        EXPECT_NEAR(a.objective, b.objective, 1e-6);
        if (!soft) ++feasible;
      }
    }
  }
  EXPECT_GT(feasible, 10);
}

TEST(LpOracle, ScalingWeightsScalesObjectiveOnly) {
  const auto sc = build_scenario(default_scenario(), 4, 3);
  const auto cs = demands_to_commodities(sc.demands);
  const auto w = StateWeights::linear(10);
  const auto p1 = build_lp(sc.plan, cs, w);
  const auto p2 = build_lp(sc.plan, cs, w.scaled(2.0));
  const auto s1 = solve_lp(p1);
  const auto s2 = solve_lp(p2);
  ASSERT_EQ(s1.status, lp::Status::optimal);
  ASSERT_EQ(s2.status, lp::Status::optimal);
  EXPECT_NEAR(s2.objective, 2 * s1.objective, 1e-6);
  for (std::size_t j = 0; j < p1.flow_variable_count(); ++j) EXPECT_NEAR(s1.values[j], s2.values[j], 1e-9);
}

// Objectives obtained by exporting the model in LP format and solving it
// with an independent solver (HiGHS).
TEST(LpOracle, MatchesReferenceSolverObjectives) {
  struct Case {
    std::uint64_t seed;
    std::int64_t load;
    bool soft;
    std::optional<double> objective;
  };
  const std::vector<Case> cases = {
      {1, 1, false, 21.0},     {1, 4, false, 96.0},    {1, 8, false, 258.0},        {2, 1, false, 31.0},
      {2, 4, false, 166.0},    {2, 8, false, {}},      {2, 8, true, 464246.0},      {3, 4, false, 126.0},
      {3, 8, false, {}},       {3, 8, true, 259444.0}, {5, 4, false, 166.0},        {5, 8, true, 408268.0},
  };
  for (const auto& c : cases) {
    const auto sc = build_scenario(default_scenario(), c.seed, c.load);
    const auto p = build_lp(sc.plan, demands_to_commodities(sc.demands), StateWeights::linear(10), {true, c.soft});
    const auto s = solve_lp(p);
    if (!c.objective) {
      EXPECT_EQ(s.status, lp::Status::infeasible) << c.seed << "/" << c.load;
      continue;
    }
    ASSERT_EQ(s.status, lp::Status::optimal) << c.seed << "/" << c.load;
    EXPECT_NEAR(s.objective, *c.objective, 1e-6 * std::max(1.0, *c.objective)) << c.seed << "/" << c.load;
  }
}

TEST(LpOracle, SolutionCsvRoundTrip) {
  for (bool soft : {false, true}) {
    const auto p = build_lp(triangle(), triangle_commodities(20, 30, 10), StateWeights::linear(3), {true, soft});
    const auto s = solve_lp(p);
    if (!soft) {
      EXPECT_EQ(s.status, lp::Status::infeasible);
      continue;
    }
    const auto csv = solution_to_csv(p, s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "state,contact,from,to,commodity,value");
    EXPECT_NE(csv.find(",drop,,,0,10\n"), std::string::npos);
    const auto back = solution_from_csv(p, csv);
    EXPECT_TRUE(verify_solution(p, back, 1e-9).empty());
    EXPECT_NEAR(back.objective, s.objective, 1e-9);
  }
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  const auto s = solve_lp(p);
  EXPECT_EQ(solution_to_csv(p, s), "state,contact,from,to,commodity,value\n3,3,1,3,0,10\n2,2,2,3,1,10\n");
  EXPECT_THROW(solution_from_csv(p, "h\n1,9,1,2,0,1\n"), Error);
  EXPECT_THROW(solution_from_csv(p, "h\n1,1,1,2,7,1\n"), Error);
  EXPECT_THROW(solution_from_csv(p, "h\n1,1,1,2,0\n"), Error);
  EXPECT_THROW(solution_from_csv(p, "h\n,drop,,,0,1\n"), Error);
  // Half of node 1's traffic missing: rebuilt buffers break the final state.
  const auto partial = solution_from_csv(p, "h\n3,3,1,3,0,5\n2,2,2,3,1,10\n");
  EXPECT_FALSE(verify_solution(p, partial, 1e-6).empty());
}

TEST(LpOracle, LpFormatExport) {
  const auto p = build_lp(triangle(), triangle_commodities(), StateWeights::linear(3));
  const auto text = to_lp_format(p);
  EXPECT_EQ(text.find("Minimize"), text.find('\n') + 1);
  EXPECT_NE(text.find("Subject To\n"), std::string::npos);
  EXPECT_NE(text.find("Bounds\n"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 4), "End\n");
  EXPECT_NE(text.find("+ 3 x_c0_k3_s3"), std::string::npos);
  EXPECT_NE(text.find("r20_arc_capacity: + 1 x_c0_k3_s3 + 1 x_c1_k3_s3 <= 10"), std::string::npos);
  EXPECT_NE(text.find(" b_c0_n1_t0 = 10\n"), std::string::npos);
}

TEST(LpOracle, RejectsBadInput) {
  const auto plan = triangle();
  EXPECT_THROW(build_lp(plan, {{{NodeId{1}, NodeId{9}, 0, kInfinity, 1}}}, StateWeights::linear(3)), Error);
  EXPECT_THROW(build_lp(plan, {{{NodeId{1}, NodeId{1}, 0, kInfinity, 1}}}, StateWeights::linear(3)), Error);
  EXPECT_THROW(build_lp(plan, {{{NodeId{1}, NodeId{3}, 5, kInfinity, 1}}}, StateWeights::linear(3)), Error);
  EXPECT_THROW(build_lp(plan, {{{NodeId{1}, NodeId{3}, 30, kInfinity, 1}}}, StateWeights::linear(3)), Error);
  EXPECT_THROW(build_lp(plan, {{{NodeId{1}, NodeId{3}, 0, kInfinity, -1}}}, StateWeights::linear(3)), Error);
  EXPECT_THROW(build_lp(plan, triangle_commodities(), StateWeights::linear(2)), Error);
  EXPECT_THROW(StateWeights({1.0, 1.0, 2.0}), Error);
  EXPECT_THROW(StateWeights({0.0, 1.0}), Error);
  const auto hard = build_lp(plan, triangle_commodities(20, 30, 10), StateWeights::linear(3));
  EXPECT_THROW(lp_metrics(hard, solve_lp(hard)), Error);
}

TEST(LpOracle, CommoditiesMergeIdenticalKeys) {
  const std::vector<Demand> d{{NodeId{1}, NodeId{3}, 0.0, 30.0, 4},
                              {NodeId{1}, NodeId{3}, 0.0, 30.0, 6},
                              {NodeId{1}, NodeId{3}, 0.0, kInfinity, 2},
                              {NodeId{2}, NodeId{3}, 0.0, 30.0, 1}};
  const auto c = demands_to_commodities(d);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[0].amount, 10.0);
  EXPECT_TRUE(std::isinf(c[1].ttl));
}

TEST(LpOracle, CustomWeightsChangeTheTradeOff) {
  // Flat weights make the direct contact as cheap as the relay path per arc,
  // so the single-arc route wins even for a ttl that allows both.
  const std::vector<Commodity> c{{NodeId{1}, NodeId{3}, 0.0, 30.0, 10}};
  const auto steep = build_lp(triangle(), c, StateWeights({1.0, 2.0, 30.0}));
  const auto flat = build_lp(triangle(), c, StateWeights({1.0, 1.01, 1.02}));
  EXPECT_NEAR(*lp_metrics(steep, solve_lp(steep)).mean_hops, 2.0, 1e-9);
  EXPECT_NEAR(*lp_metrics(flat, solve_lp(flat)).mean_hops, 1.0, 1e-9);
}
