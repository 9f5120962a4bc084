#include "dtnlab/lp_oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace dtnlab {

namespace {

struct Layout {
  // Per state (1-based), per node slot: arcs entering / leaving.
  std::vector<std::vector<std::vector<std::size_t>>> in;
  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::vector<std::size_t>> by_state;
};

Layout layout_of(const LpProblem& p) {
  const int f = p.grid.state_count;
  Layout l;
  l.in.assign(f + 1, std::vector<std::vector<std::size_t>>(p.nodes.size()));
  l.out.assign(f + 1, std::vector<std::vector<std::size_t>>(p.nodes.size()));
  l.by_state.assign(f + 1, {});
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    const auto& arc = p.arcs[a];
    l.in[arc.state][p.node_slot(arc.to)].push_back(a);
    l.out[arc.state][p.node_slot(arc.from)].push_back(a);
    l.by_state[arc.state].push_back(a);
  }
  return l;
}

int generation_index(const StateGrid& grid, const Commodity& c) {
  const auto g = grid.index_of(c.t_gen);
  if (!g || *g < 0) throw Error(fmt::format("commodity generation time {} is not a grid timestamp", c.t_gen));
  if (*g >= grid.state_count) {
    throw Error(fmt::format("commodity generated at {} is not before the horizon {}", c.t_gen, grid.horizon()));
  }
  return *g;
}

std::string format_value(double v) { return fmt::format("{}", v); }

}  // namespace

std::string_view to_string(ConstraintTag tag) {
  switch (tag) {
    case ConstraintTag::buffer_recursion:
      return "buffer_recursion";
    case ConstraintTag::buffer_capacity:
      return "buffer_capacity";
    case ConstraintTag::arc_capacity:
      return "arc_capacity";
    case ConstraintTag::initial_buffer:
      return "initial_buffer";
    case ConstraintTag::precedence:
      return "precedence";
    case ConstraintTag::deadline:
      return "deadline";
    case ConstraintTag::final_buffer:
      return "final_buffer";
    case ConstraintTag::destination_outflow:
      return "destination_outflow";
    case ConstraintTag::drop_bound:
      return "drop_bound";
    case ConstraintTag::nonnegativity:
      return "nonnegativity";
  }
  return "?";
}

std::vector<Commodity> demands_to_commodities(std::span<const Demand> demands) {
  std::vector<Commodity> out;
  for (const auto& d : demands) {
    auto it = std::find_if(out.begin(), out.end(), [&d](const Commodity& c) {
      return c.source == d.src && c.destination == d.dst && c.t_gen == d.t_gen && c.ttl == d.ttl;
    });
    if (it == out.end()) {
      out.push_back({d.src, d.dst, d.t_gen, d.ttl, static_cast<double>(d.count)});
    } else {
      it->amount += static_cast<double>(d.count);
    }
  }
  return out;
}

StateWeights StateWeights::linear(int state_count) {
  std::vector<double> w;
  for (int q = 1; q <= state_count; ++q) w.push_back(q);
  return StateWeights(std::move(w));
}

StateWeights::StateWeights(std::vector<double> per_state) : weights_(std::move(per_state)) {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0) || !std::isfinite(weights_[i])) throw Error("state weights must be positive and finite");
    if (i > 0 && !(weights_[i] > weights_[i - 1])) throw Error("state weights must be strictly increasing");
  }
}

StateWeights StateWeights::scaled(double factor) const {
  std::vector<double> w = weights_;
  for (auto& x : w) x *= factor;
  return StateWeights(std::move(w));
}

std::size_t LpProblem::node_slot(NodeId id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  throw Error(fmt::format("unknown node {}", value(id)));
}

int LpProblem::deadline_index(const Commodity& c) const {
  if (std::isinf(c.ttl)) return grid.state_count;
  return std::min(grid.state_count, grid.floor_index(c.t_gen + c.ttl));
}

LpProblem build_lp(const ContactPlan& plan, std::span<const Commodity> commodities, const StateWeights& weights,
                   const BuildOptions& options) {
  const int f = plan.grid.state_count;
  if (weights.state_count() < f) throw Error("state weights do not cover every state");

  LpProblem p;
  p.grid = plan.grid;
  p.nodes = plan.nodes;
  p.commodities.assign(commodities.begin(), commodities.end());
  p.options = options;
  for (int q = 1; q <= f; ++q) p.weights.push_back(weights(q));

  for (const auto& c : plan.contacts) {
    const auto g = plan.grid_contact(c);
    for (int q = std::max(1, g.start_index + 1); q <= std::min(f, g.end_index); ++q) {
      p.arcs.push_back({c.id, c.from, c.to, q, c.capacity});
    }
  }
  for (const auto& c : p.commodities) {
    if (c.source == c.destination) throw Error("commodity source and destination must differ");
    p.node_slot(c.source);
    p.node_slot(c.destination);
    if (c.amount < 0) throw Error("commodity amount must be >= 0");
    generation_index(p.grid, c);
  }
  p.drop_penalty = p.grid.horizon() * static_cast<double>(std::max<std::size_t>(1, p.arcs.size()));

  const std::size_t nn = p.nodes.size();
  const std::size_t nc = p.commodities.size();
  auto& prog = p.program;
  for (std::size_t c = 0; c < nc; ++c) {
    for (const auto& arc : p.arcs) prog.add_variable(p.weights[arc.state - 1], 0.0, kInfinity);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t v = 0; v < nn; ++v) {
      for (int q = 0; q <= f; ++q) prog.add_variable(0.0, 0.0, kInfinity);
    }
  }
  if (options.soft) {
    for (std::size_t c = 0; c < nc; ++c) prog.add_variable(p.drop_penalty, 0.0, p.commodities[c].amount);
  }

  const Layout layout = layout_of(p);
  auto fix_zero = [&prog](int var) { prog.upper[var] = 0.0; };

  for (std::size_t c = 0; c < nc; ++c) {
    const Commodity& com = p.commodities[c];
    const int g = generation_index(p.grid, com);
    const std::size_t y = p.node_slot(com.source);
    const std::size_t z = p.node_slot(com.destination);
    const int dl = p.deadline_index(com);

    for (std::size_t a = 0; a < p.arcs.size(); ++a) {
      const auto& arc = p.arcs[a];
      if (arc.state <= g) fix_zero(p.flow_var(a, c));
      if (arc.from == com.destination) fix_zero(p.flow_var(a, c));
    }

    // Initial buffers.
    for (std::size_t v = 0; v < nn; ++v) {
      const int var = p.buffer_var(0, v, c);
      if (v == y && g == 0) {
        if (options.soft) {
          prog.upper[var] = com.amount;
          prog.rows.push_back({{{var, 1.0}, {p.drop_var(c), 1.0}}, lp::Sense::eq, com.amount});
          p.row_tags.push_back(ConstraintTag::initial_buffer);
        } else {
          prog.lower[var] = prog.upper[var] = com.amount;
        }
      } else {
        fix_zero(var);
      }
    }
    // Final buffers.
    for (std::size_t v = 0; v < nn; ++v) {
      const int var = p.buffer_var(f, v, c);
      if (v != z) {
        fix_zero(var);
      } else if (options.soft) {
        prog.rows.push_back({{{var, 1.0}, {p.drop_var(c), 1.0}}, lp::Sense::eq, com.amount});
        p.row_tags.push_back(ConstraintTag::final_buffer);
      } else {
        prog.lower[var] = prog.upper[var] = com.amount;
      }
    }
    // Deadline: the whole commodity sits at the destination from the
    // deadline timestamp on.
    if (!std::isinf(com.ttl)) {
      for (int q = std::max(0, dl); q < f; ++q) {
        const int var = p.buffer_var(q, z, c);
        if (options.soft) {
          prog.rows.push_back({{{var, 1.0}, {p.drop_var(c), 1.0}}, lp::Sense::ge, com.amount});
          p.row_tags.push_back(ConstraintTag::deadline);
        } else {
          prog.lower[var] = std::max(prog.lower[var], com.amount);
        }
      }
    }

    if (options.prune_unreachable) {
      // hold[q][v]: v may store this commodity at t_q; reach[q][v]: v may
      // send during state q. need[q][v]: from v at t_q the destination is
      // still reachable by the deadline.
      const int last = std::max(g, std::min(dl, f));
      std::vector<std::vector<char>> hold(f + 1, std::vector<char>(nn, 0));
      std::vector<std::vector<char>> send(f + 1, std::vector<char>(nn, 0));
      hold[g][y] = 1;
      for (int q = g + 1; q <= f; ++q) {
        std::vector<char> cur = hold[q - 1];
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t a : layout.by_state[q]) {
            const auto from = p.node_slot(p.arcs[a].from);
            const auto to = p.node_slot(p.arcs[a].to);
            if (cur[from] && from != z && !cur[to]) {
              cur[to] = 1;
              changed = true;
            }
          }
        }
        send[q] = cur;
        hold[q] = cur;
      }
      std::vector<std::vector<char>> need(f + 1, std::vector<char>(nn, 0));
      std::vector<std::vector<char>> receive(f + 1, std::vector<char>(nn, 0));
      for (int q = last; q <= f; ++q) need[q][z] = 1;
      for (int q = last; q > g; --q) {
        std::vector<char> cur = need[q];
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t a : layout.by_state[q]) {
            const auto from = p.node_slot(p.arcs[a].from);
            const auto to = p.node_slot(p.arcs[a].to);
            if (cur[to] && from != z && !cur[from]) {
              cur[from] = 1;
              changed = true;
            }
          }
        }
        receive[q] = cur;
        need[q - 1] = cur;
      }
      for (std::size_t a = 0; a < p.arcs.size(); ++a) {
        const auto& arc = p.arcs[a];
        const int q = arc.state;
        const bool usable = q > g && q <= last && send[q][p.node_slot(arc.from)] && receive[q][p.node_slot(arc.to)];
        if (!usable) fix_zero(p.flow_var(a, c));
      }
      for (int q = 0; q <= f; ++q) {
        for (std::size_t v = 0; v < nn; ++v) {
          if (q < g || !hold[q][v] || !need[q][v]) fix_zero(p.buffer_var(q, v, c));
        }
      }
    }

    // Storage recursion.
    for (int q = 1; q <= f; ++q) {
      for (std::size_t v = 0; v < nn; ++v) {
        lp::Row row;
        row.sense = lp::Sense::eq;
        row.terms.push_back({p.buffer_var(q, v, c), 1.0});
        row.terms.push_back({p.buffer_var(q - 1, v, c), -1.0});
        for (std::size_t a : layout.in[q][v]) row.terms.push_back({p.flow_var(a, c), -1.0});
        for (std::size_t a : layout.out[q][v]) row.terms.push_back({p.flow_var(a, c), 1.0});
        if (v == y && q == g) {
          row.rhs = com.amount;
          if (options.soft) row.terms.push_back({p.drop_var(c), 1.0});
        }
        prog.rows.push_back(std::move(row));
        p.row_tags.push_back(ConstraintTag::buffer_recursion);
      }
    }
  }

  for (std::size_t v = 0; v < nn; ++v) {
    const auto& cap = p.nodes[v].buffer_capacity;
    if (!cap) continue;
    for (int q = 0; q <= f; ++q) {
      lp::Row row;
      row.sense = lp::Sense::le;
      row.rhs = static_cast<double>(*cap);
      for (std::size_t c = 0; c < nc; ++c) row.terms.push_back({p.buffer_var(q, v, c), 1.0});
      prog.rows.push_back(std::move(row));
      p.row_tags.push_back(ConstraintTag::buffer_capacity);
    }
  }
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    lp::Row row;
    row.sense = lp::Sense::le;
    row.rhs = static_cast<double>(p.arcs[a].capacity);
    for (std::size_t c = 0; c < nc; ++c) row.terms.push_back({p.flow_var(a, c), 1.0});
    prog.rows.push_back(std::move(row));
    p.row_tags.push_back(ConstraintTag::arc_capacity);
  }
  return p;
}

LpSolution solve_lp(const LpProblem& problem) {
  const auto r = lp::solve(problem.program);
  LpSolution s;
  s.status = r.status;
  s.values = r.x;
  s.objective = r.objective;
  s.iterations = r.iterations;
  if (s.status == lp::Status::optimal && !verify_solution(problem, s, 1e-6).empty()) {
    s.status = lp::Status::numerical_failure;
  }
  return s;
}

std::vector<Violation> verify_solution(const LpProblem& p, const LpSolution& s, double tol) {
  if (s.values.size() != p.program.variable_count()) {
    throw Error(fmt::format("solution has {} values, problem has {} variables", s.values.size(),
                            p.program.variable_count()));
  }
  const int f = p.grid.state_count;
  const std::size_t nn = p.nodes.size();
  const Layout layout = layout_of(p);
  const auto& x = s.values;
  std::vector<Violation> out;
  auto flag = [&out](ConstraintTag tag, std::string where, double excess) {
    out.push_back({tag, std::move(where), excess});
  };
  auto flow = [&](std::size_t a, std::size_t c) { return x[p.flow_var(a, c)]; };
  auto buffer = [&](int q, std::size_t v, std::size_t c) { return x[p.buffer_var(q, v, c)]; };

  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) flag(ConstraintTag::nonnegativity, fmt::format("variable {} is not finite", i), kInfinity);
    if (x[i] < -tol) flag(ConstraintTag::nonnegativity, fmt::format("variable {} = {}", i, x[i]), -x[i]);
  }

  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    const auto& com = p.commodities[c];
    const int g = generation_index(p.grid, com);
    const std::size_t y = p.node_slot(com.source);
    const std::size_t z = p.node_slot(com.destination);
    const double dropped = p.options.soft ? x[p.drop_var(c)] : 0.0;
    const double injected = com.amount - dropped;
    if (p.options.soft && (dropped < -tol || dropped > com.amount + tol)) {
      flag(ConstraintTag::drop_bound, fmt::format("commodity {} drop {}", c, dropped), std::abs(dropped));
    }

    for (std::size_t v = 0; v < nn; ++v) {
      const double expected = v == y && g == 0 ? injected : 0.0;
      const double diff = std::abs(buffer(0, v, c) - expected);
      if (diff > tol) {
        flag(ConstraintTag::initial_buffer, fmt::format("commodity {} node {} t0", c, value(p.nodes[v].id)), diff);
      }
    }
    for (int q = 1; q <= f; ++q) {
      for (std::size_t v = 0; v < nn; ++v) {
        double balance = buffer(q - 1, v, c);
        for (std::size_t a : layout.in[q][v]) balance += flow(a, c);
        for (std::size_t a : layout.out[q][v]) balance -= flow(a, c);
        if (v == y && q == g) balance += injected;
        const double diff = std::abs(buffer(q, v, c) - balance);
        if (diff > tol) {
          flag(ConstraintTag::buffer_recursion,
               fmt::format("commodity {} node {} state {}", c, value(p.nodes[v].id), q), diff);
        }
      }
    }
    for (std::size_t a = 0; a < p.arcs.size(); ++a) {
      const auto& arc = p.arcs[a];
      if (arc.state <= g && std::abs(flow(a, c)) > tol) {
        flag(ConstraintTag::precedence, fmt::format("commodity {} sent on contact {} in state {} before generation", c,
                                                    value(arc.contact), arc.state),
             std::abs(flow(a, c)));
      }
      if (arc.from == com.destination && std::abs(flow(a, c)) > tol) {
        flag(ConstraintTag::destination_outflow,
             fmt::format("commodity {} leaves its destination on contact {}", c, value(arc.contact)),
             std::abs(flow(a, c)));
      }
    }
    if (!std::isinf(com.ttl)) {
      for (int q = std::max(0, p.deadline_index(com)); q <= f; ++q) {
        const double shortfall = injected - buffer(q, z, c);
        if (shortfall > tol) {
          flag(ConstraintTag::deadline, fmt::format("commodity {} short at destination at t{}", c, q), shortfall);
        }
      }
    }
    for (std::size_t v = 0; v < nn; ++v) {
      const double expected = v == z ? injected : 0.0;
      const double diff = std::abs(buffer(f, v, c) - expected);
      if (diff > tol) {
        flag(ConstraintTag::final_buffer, fmt::format("commodity {} node {} at horizon", c, value(p.nodes[v].id)),
             diff);
      }
    }
  }

  for (std::size_t v = 0; v < nn; ++v) {
    const auto& cap = p.nodes[v].buffer_capacity;
    if (!cap) continue;
    for (int q = 0; q <= f; ++q) {
      double total = 0.0;
      for (std::size_t c = 0; c < p.commodities.size(); ++c) total += buffer(q, v, c);
      if (total > static_cast<double>(*cap) + tol) {
        flag(ConstraintTag::buffer_capacity, fmt::format("node {} at t{}", value(p.nodes[v].id), q),
             total - static_cast<double>(*cap));
      }
    }
  }
  for (std::size_t a = 0; a < p.arcs.size(); ++a) {
    double total = 0.0;
    for (std::size_t c = 0; c < p.commodities.size(); ++c) total += flow(a, c);
    if (total > static_cast<double>(p.arcs[a].capacity) + tol) {
      flag(ConstraintTag::arc_capacity, fmt::format("contact {} state {}", value(p.arcs[a].contact), p.arcs[a].state),
           total - static_cast<double>(p.arcs[a].capacity));
    }
  }
  return out;
}

Metrics lp_metrics(const LpProblem& p, const LpSolution& s) {
  if (s.status != lp::Status::optimal) throw Error("LP metrics need an optimal solution");
  double generated = 0.0;
  double delivered = 0.0;
  double transmissions = 0.0;
  double delay = 0.0;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    const auto& com = p.commodities[c];
    generated += com.amount;
    delivered += com.amount - (p.options.soft ? s.values[p.drop_var(c)] : 0.0);
    for (std::size_t a = 0; a < p.arcs.size(); ++a) {
      const double v = s.values[p.flow_var(a, c)];
      transmissions += v;
      if (p.arcs[a].to == com.destination) delay += (p.grid.timestamp(p.arcs[a].state) - com.t_gen) * v;
    }
  }
  Metrics m;
  if (generated > 0) m.delivery_ratio = delivered / generated;
  if (delivered > 0) {
    m.mean_hops = transmissions / delivered;
    m.mean_delay = delay / delivered;
  }
  if (transmissions > 0) m.energy_efficiency = delivered / transmissions;
  return m;
}

std::string to_lp_format(const LpProblem& p) {
  const std::size_t nn = p.nodes.size();
  const int f = p.grid.state_count;
  std::vector<std::string> names(p.program.variable_count());
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    for (std::size_t a = 0; a < p.arcs.size(); ++a) {
      names[p.flow_var(a, c)] = fmt::format("x_c{}_k{}_s{}", c, value(p.arcs[a].contact), p.arcs[a].state);
    }
    for (std::size_t v = 0; v < nn; ++v) {
      for (int q = 0; q <= f; ++q) names[p.buffer_var(q, v, c)] = fmt::format("b_c{}_n{}_t{}", c, value(p.nodes[v].id), q);
    }
    if (p.options.soft) names[p.drop_var(c)] = fmt::format("d_c{}", c);
  }

  auto terms = [&names](const std::vector<std::pair<int, double>>& t) {
    std::string s;
    int on_line = 0;
    for (const auto& [var, coef] : t) {
      s += fmt::format(" {} {} {}", coef < 0 ? '-' : '+', format_value(std::abs(coef)), names[var]);
      if (++on_line == 8) {
        s += "\n   ";
        on_line = 0;
      }
    }
    return s;
  };

  std::string out = "\\ time-expanded multi-commodity flow\nMinimize\n obj:";
  std::vector<std::pair<int, double>> objective;
  for (std::size_t j = 0; j < p.program.variable_count(); ++j) {
    if (p.program.cost[j] != 0.0) objective.emplace_back(static_cast<int>(j), p.program.cost[j]);
  }
  out += objective.empty() ? " 0 " + names.front() : terms(objective);
  out += "\nSubject To\n";
  for (std::size_t i = 0; i < p.program.rows.size(); ++i) {
    const auto& row = p.program.rows[i];
    std::vector<std::pair<int, double>> t;
    for (const auto& term : row.terms) t.emplace_back(term.var, term.coef);
    const char* sense = row.sense == lp::Sense::le ? "<=" : row.sense == lp::Sense::ge ? ">=" : "=";
    out += fmt::format(" r{}_{}:{} {} {}\n", i, to_string(p.row_tags[i]), terms(t), sense, format_value(row.rhs));
  }
  out += "Bounds\n";
  for (std::size_t j = 0; j < p.program.variable_count(); ++j) {
    const double lo = p.program.lower[j];
    const double hi = p.program.upper[j];
    if (lo == hi) {
      out += fmt::format(" {} = {}\n", names[j], format_value(lo));
    } else if (std::isinf(hi)) {
      if (lo != 0.0) out += fmt::format(" {} >= {}\n", names[j], format_value(lo));
    } else {
      out += fmt::format(" {} <= {} <= {}\n", format_value(lo), names[j], format_value(hi));
    }
  }
  out += "End\n";
  return out;
}

std::string solution_to_csv(const LpProblem& p, const LpSolution& s) {
  std::string out = "state,contact,from,to,commodity,value\n";
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    for (std::size_t a = 0; a < p.arcs.size(); ++a) {
      const double v = s.values.at(p.flow_var(a, c));
      if (v == 0.0) continue;
      const auto& arc = p.arcs[a];
      out += fmt::format("{},{},{},{},{},{}\n", arc.state, value(arc.contact), value(arc.from), value(arc.to), c,
                         format_value(v));
    }
    if (p.options.soft) {
      const double d = s.values.at(p.drop_var(c));
      if (d != 0.0) out += fmt::format(",drop,,,{},{}\n", c, format_value(d));
    }
  }
  return out;
}

LpSolution solution_from_csv(const LpProblem& p, std::string_view csv) {
  std::map<std::pair<std::int32_t, int>, std::size_t> arc_index;
  for (std::size_t a = 0; a < p.arcs.size(); ++a) arc_index[{value(p.arcs[a].contact), p.arcs[a].state}] = a;

  LpSolution s;
  s.status = lp::Status::optimal;
  s.values.assign(p.program.variable_count(), 0.0);

  auto fields_of = [](std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return f;
  };
  auto number = [](std::string_view text, int line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(fmt::format("solution line {}: bad number '{}'", line, text));
    }
    return v;
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line_no == 1) continue;
    const auto f = fields_of(line);
    if (f.size() != 6) throw Error(fmt::format("solution line {}: expected 6 fields", line_no));
    const auto c = static_cast<std::size_t>(number(f[4], line_no));
    if (c >= p.commodities.size()) throw Error(fmt::format("solution line {}: unknown commodity", line_no));
    if (f[1] == "drop") {
      if (!p.options.soft) throw Error(fmt::format("solution line {}: drop row for a hard problem", line_no));
      s.values[p.drop_var(c)] = number(f[5], line_no);
      continue;
    }
    const int state = static_cast<int>(number(f[0], line_no));
    const auto contact = static_cast<std::int32_t>(number(f[1], line_no));
    auto it = arc_index.find({contact, state});
    if (it == arc_index.end()) {
      throw Error(fmt::format("solution line {}: contact {} is not active in state {}", line_no, contact, state));
    }
    s.values[p.flow_var(it->second, c)] = number(f[5], line_no);
  }

  const Layout layout = layout_of(p);
  const int f = p.grid.state_count;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    const auto& com = p.commodities[c];
    const int g = generation_index(p.grid, com);
    const std::size_t y = p.node_slot(com.source);
    const double injected = com.amount - (p.options.soft ? s.values[p.drop_var(c)] : 0.0);
    for (std::size_t v = 0; v < p.nodes.size(); ++v) {
      double b = v == y && g == 0 ? injected : 0.0;
      s.values[p.buffer_var(0, v, c)] = b;
      for (int q = 1; q <= f; ++q) {
        for (std::size_t a : layout.in[q][v]) b += s.values[p.flow_var(a, c)];
        for (std::size_t a : layout.out[q][v]) b -= s.values[p.flow_var(a, c)];
        if (v == y && q == g) b += injected;
        s.values[p.buffer_var(q, v, c)] = b;
      }
    }
  }
  s.objective = 0.0;
  for (std::size_t j = 0; j < s.values.size(); ++j) s.objective += p.program.cost[j] * s.values[j];
  return s;
}

}  // namespace dtnlab
