#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive: exhaustive enumeration instead of search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dtnlab/contact_graph.hpp"
#include "dtnlab/contact_plan.hpp"
#include "dtnlab/simplex.hpp"
#include "dtnlab/simulator.hpp"

namespace oracle {

using namespace dtnlab;

/// Every node-simple contact sequence from `src` to `dst` that can be
/// scheduled from `t_now`, with its attributes, sorted by delivery order.
inline std::vector<Route> all_routes(const ContactPlan& plan, NodeId src, NodeId dst, double t_now) {
  const double dur = plan.grid.state_duration;
  const double t0 = std::ceil(t_now / dur - 1e-9) * dur;
  std::vector<Route> out;
  std::vector<ContactId> seq;
  std::vector<NodeId> visited{src};
  std::function<void(NodeId, double, double, double, std::int64_t)> dfs = [&](NodeId at, double ready, double first,
                                                                              double expiration, std::int64_t vol) {
    for (const auto& c : plan.contacts) {
      if (c.from != at) continue;
      if (std::find(visited.begin(), visited.end(), c.to) != visited.end()) continue;
      const double send = std::max(ready, c.start);
      if (send >= c.end - 1e-9) continue;
      const double arrive = send + dur;
      const auto states_left = static_cast<std::int64_t>(std::llround((c.end - std::max(c.start, t0)) / dur));
      const std::int64_t v = std::min(vol, c.capacity * states_left);
      const double exp = std::min(expiration, c.end);
      const double dep = seq.empty() ? send : first;
      seq.push_back(c.id);
      if (c.to == dst) {
        Route r;
        r.contacts = seq;
        r.source = src;
        r.destination = dst;
        r.departure_time = dep;
        r.delivery_time = arrive;
        r.hops = static_cast<int>(seq.size());
        r.expiration = exp;
        r.max_volume = v;
        out.push_back(r);
      } else {
        visited.push_back(c.to);
        dfs(c.to, arrive, dep, exp, v);
        visited.pop_back();
      }
      seq.pop_back();
    }
  };
  dfs(src, t0, t0, kInfinity, INT64_MAX);
  std::sort(out.begin(), out.end(), [](const Route& a, const Route& b) {
    if (a.delivery_time != b.delivery_time) return a.delivery_time < b.delivery_time;
    if (a.hops != b.hops) return a.hops < b.hops;
    return std::lexicographical_compare(a.contacts.begin(), a.contacts.end(), b.contacts.begin(), b.contacts.end(),
                                        [](ContactId x, ContactId y) { return value(x) < value(y); });
  });
  return out;
}

/// Small random plan on a grid of `states` states of 10 s.
inline ContactPlan random_small_plan(std::mt19937_64& rng, int nodes, int states, int max_contacts) {
  ContactPlan plan;
  plan.grid = StateGrid{states, 10.0};
  for (int i = 1; i <= nodes; ++i) plan.nodes.push_back({NodeId{i}, std::nullopt});
  std::uniform_int_distribution<int> count_d(1, max_contacts);
  std::uniform_int_distribution<int> node_d(1, nodes);
  std::uniform_int_distribution<int> state_d(0, states - 1);
  std::uniform_int_distribution<int> cap_d(0, 4);
  const int count = count_d(rng);
  for (int i = 1; i <= count; ++i) {
    const int a = node_d(rng);
    int b = node_d(rng);
    while (b == a) b = node_d(rng);
    int s = state_d(rng);
    int e = state_d(rng);
    if (s > e) std::swap(s, e);
    plan.contacts.push_back({ContactId{i}, NodeId{a}, NodeId{b}, 10.0 * s, 10.0 * (e + 1), cap_d(rng)});
  }
  plan.normalize();
  return plan;
}

struct VertexResult {
  lp::Status status = lp::Status::infeasible;
  double objective = 0.0;
};

/// Brute-force LP solver for tiny programs with finite bounds: evaluates every
/// basic solution (n active constraints out of rows and bounds).
inline VertexResult vertex_enumeration(const lp::Program& p) {
  const int n = static_cast<int>(p.variable_count());
  struct Hyper {
    std::vector<double> a;
    double b;
  };
  // Any vertex is the unique solution of n linearly independent active
  // constraints; equality rows are enforced by the feasibility check.
  std::vector<Hyper> optional;
  for (const auto& row : p.rows) {
    Hyper h{std::vector<double>(n, 0.0), row.rhs};
    for (const auto& t : row.terms) h.a[t.var] += t.coef;
    optional.push_back(h);
  }
  for (int j = 0; j < n; ++j) {
    Hyper lo{std::vector<double>(n, 0.0), p.lower[j]};
    lo.a[j] = 1.0;
    optional.push_back(lo);
    Hyper hi{std::vector<double>(n, 0.0), p.upper[j]};
    hi.a[j] = 1.0;
    optional.push_back(hi);
  }
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < p.lower[j] - 1e-7 || x[j] > p.upper[j] + 1e-7) return false;
    }
    for (const auto& row : p.rows) {
      double lhs = 0.0;
      for (const auto& t : row.terms) lhs += t.coef * x[t.var];
      if (row.sense == lp::Sense::le && lhs > row.rhs + 1e-7) return false;
      if (row.sense == lp::Sense::ge && lhs < row.rhs - 1e-7) return false;
      if (row.sense == lp::Sense::eq && std::abs(lhs - row.rhs) > 1e-7) return false;
    }
    return true;
  };
  auto solve = [&](std::vector<Hyper> sys) -> std::optional<std::vector<double>> {
    for (int col = 0; col < n; ++col) {
      int piv = -1;
      double best = 1e-9;
      for (int r = col; r < n; ++r) {
        if (std::abs(sys[r].a[col]) > best) {
          best = std::abs(sys[r].a[col]);
          piv = r;
        }
      }
      if (piv < 0) return std::nullopt;
      std::swap(sys[col], sys[piv]);
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = sys[r].a[col] / sys[col].a[col];
        for (int k = 0; k < n; ++k) sys[r].a[k] -= f * sys[col].a[k];
        sys[r].b -= f * sys[col].b;
      }
    }
    std::vector<double> x(n);
    for (int r = 0; r < n; ++r) x[r] = sys[r].b / sys[r].a[r];
    return x;
  };
  VertexResult best;
  const int need = n;
  std::vector<int> pick(need);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == need) {
      std::vector<Hyper> sys;
      for (int i : pick) sys.push_back(optional[i]);
      auto x = solve(sys);
      if (!x || !feasible(*x)) return;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += p.cost[j] * (*x)[j];
      if (best.status != lp::Status::optimal || obj < best.objective) {
        best.status = lp::Status::optimal;
        best.objective = obj;
      }
      return;
    }
    for (int i = start; i < static_cast<int>(optional.size()); ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}


struct SimCase {
  ContactPlan plan;
  std::vector<Demand> demands;
  Policy policy = Policy::deltime;
  int k = 1;
};

/// Random plan with random bounded buffers, capacities and demands.
inline SimCase random_sim_case(std::mt19937_64& rng) {
  SimCase c;
  const int nodes = 2 + static_cast<int>(rng() % 6);
  const int states = 1 + static_cast<int>(rng() % 6);
  c.plan = random_small_plan(rng, nodes, states, 4 + static_cast<int>(rng() % 20));
  for (auto& n : c.plan.nodes) {
    if (rng() % 3 == 0) n.buffer_capacity = static_cast<std::int64_t>(rng() % 6);
  }
  const int demand_count = static_cast<int>(rng() % 8);
  for (int i = 0; i < demand_count; ++i) {
    Demand d;
    d.src = NodeId{1 + static_cast<int>(rng() % nodes)};
    do {
      d.dst = NodeId{1 + static_cast<int>(rng() % nodes)};
    } while (d.dst == d.src);
    d.t_gen = 10.0 * static_cast<double>(rng() % states);
    d.ttl = rng() % 2 ? kInfinity : 10.0 * static_cast<double>(rng() % (states + 1));
    d.count = static_cast<std::int64_t>(rng() % 7);
    c.demands.push_back(d);
  }
  c.policy = rng() % 2 ? Policy::hops : Policy::deltime;
  c.k = 1 + static_cast<int>(rng() % 4);
  return c;
}

/// Empty when the result satisfies conservation, per-(contact, state)
/// capacity and deadline soundness; otherwise a description of the first
/// violation.
inline std::string check_sim_invariants(const ContactPlan& plan, std::span<const Demand> demands,
                                        const SimResult& r) {
  std::int64_t generated = 0;
  for (const auto& d : demands) generated += d.count;
  if (static_cast<std::int64_t>(r.packets.size()) != generated) return "record count differs from demand total";
  const auto counts = count_outcomes(r);
  if (counts.delivered_on_time + counts.delivered_late + counts.dropped + counts.stranded != counts.generated) {
    return "outcome counts do not add up";
  }
  std::int64_t used = 0;
  std::set<std::pair<int, int>> seen;
  for (const auto& u : r.utilization) {
    if (!seen.insert({value(u.contact), u.state}).second) return "duplicate utilization entry";
    const auto& c = plan.contact(u.contact);
    if (u.transmitted > c.capacity) return "contact over capacity in a state";
    const auto g = plan.grid_contact(c);
    if (u.state <= g.start_index || u.state > g.end_index) return "transmission outside the contact window";
    used += u.transmitted;
  }
  if (used != counts.transmissions) return "utilization disagrees with per-packet transmissions";
  for (const auto& p : r.packets) {
    if (static_cast<std::size_t>(p.transmissions) != p.path.size()) return "path length differs from transmissions";
    if (p.outcome == Outcome::delivered_on_time) {
      if (!p.delivery_time) return "on-time delivery without a time";
      if (*p.delivery_time - p.t_gen > p.ttl + 1e-9) return "on-time delivery after its deadline";
      if (p.path.empty()) return "delivered without transmissions";
      if (plan.contact(p.path.back()).to != p.dst) return "last hop does not reach the destination";
    }
    for (std::size_t i = 0; i + 1 < p.path.size(); ++i) {
      if (plan.contact(p.path[i]).to != plan.contact(p.path[i + 1]).from) return "path is not a chain";
    }
  }
  return {};
}

}  // namespace oracle
