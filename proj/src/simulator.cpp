#include "dtnlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace dtnlab {

namespace {

constexpr double kTimeTolerance = 1e-9;

struct PacketState {
  Packet packet;
  PacketRecord record;
  bool settled = false;
};

struct NodeRuntime {
  NodeId id{};
  std::optional<std::int64_t> buffer_capacity;
  std::deque<std::size_t> stored;
  std::int64_t held = 0;
  std::optional<CapacityLedger> ledger;
};

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::delivered_on_time:
      return "delivered_on_time";
    case Outcome::delivered_late:
      return "delivered_late";
    case Outcome::dropped:
      return "dropped";
    case Outcome::stranded:
      return "stranded";
  }
  return "?";
}

RouteTableCache::RouteTableCache(const ContactPlan& plan, int k) : graph_(plan), k_(k) {
  if (k < 1) throw Error("K must be >= 1");
}

const RouteTable& RouteTableCache::table(NodeId owner, int state, NodeId dest) {
  auto [it, inserted] = tables_.try_emplace({value(owner), state});
  RouteTable& t = it->second;
  if (inserted) {
    t.owner = owner;
    t.k_routes = k_;
  }
  if (!t.routes.contains(dest) && dest != owner) {
    t.routes[dest] = graph_.k_best_routes(owner, dest, graph_.plan().grid.timestamp(state - 1), k_);
  }
  return t;
}

SimResult run_simulation(const ContactPlan& plan, std::span<const Demand> demands, Policy policy, int k) {
  RouteTableCache cache(plan, k);
  return run_simulation(cache, demands, policy);
}

SimResult run_simulation(RouteTableCache& cache, std::span<const Demand> demands, Policy policy) {
  const ContactPlan& plan = cache.plan();
  const StateGrid& grid = plan.grid;

  std::vector<NodeRuntime> nodes;
  std::unordered_map<std::int32_t, std::size_t> node_slot;
  for (const auto& n : plan.nodes) {
    node_slot.emplace(value(n.id), nodes.size());
    NodeRuntime rt;
    rt.id = n.id;
    rt.buffer_capacity = n.buffer_capacity;
    nodes.push_back(std::move(rt));
  }
  auto slot_of = [&](NodeId id) {
    auto it = node_slot.find(value(id));
    if (it == node_slot.end()) throw Error(fmt::format("demand references unknown node {}", value(id)));
    return it->second;
  };

  std::unordered_map<std::int32_t, std::size_t> contact_slot;
  std::vector<GridContact> contact_grid;
  for (std::size_t i = 0; i < plan.contacts.size(); ++i) {
    contact_slot.emplace(value(plan.contacts[i].id), i);
    contact_grid.push_back(plan.grid_contact(plan.contacts[i]));
  }
  std::vector<std::deque<std::size_t>> queues(plan.contacts.size());

  // Validate and materialize packets in demand order.
  std::vector<PacketState> packets;
  std::vector<std::vector<std::size_t>> injections(grid.state_count + 1);
  for (const auto& d : demands) {
    if (d.count < 0) throw Error("demand count must be >= 0");
    if (d.src == d.dst) throw Error(fmt::format("demand from node {} to itself", value(d.src)));
    slot_of(d.src);
    slot_of(d.dst);
    const auto q = grid.index_of(d.t_gen);
    if (!q || *q < 0 || *q >= grid.state_count) {
      throw Error(fmt::format("demand generation time {} is not a state start within the horizon", d.t_gen));
    }
    if (!(d.ttl >= 0)) throw Error("demand ttl must be >= 0");
    for (std::int64_t i = 0; i < d.count; ++i) {
      PacketState ps;
      ps.packet = {static_cast<std::int64_t>(packets.size()), d.src, d.dst, grid.timestamp(*q), d.ttl};
      ps.record.packet_id = ps.packet.id;
      ps.record.src = d.src;
      ps.record.dst = d.dst;
      ps.record.t_gen = ps.packet.t_gen;
      ps.record.ttl = d.ttl;
      injections[*q + 1].push_back(packets.size());
      packets.push_back(std::move(ps));
    }
  }

  auto settle = [&](std::size_t p, Outcome outcome, std::optional<double> when = std::nullopt) {
    packets[p].settled = true;
    packets[p].record.outcome = outcome;
    packets[p].record.delivery_time = when;
  };
  auto accept = [&](NodeRuntime& node, std::size_t p) {
    if (node.buffer_capacity && node.held >= *node.buffer_capacity) {
      settle(p, Outcome::dropped);
      return;
    }
    ++node.held;
    node.stored.push_back(p);
  };

  SimResult result;
  for (int q = 1; q <= grid.state_count; ++q) {
    const double t_start = grid.timestamp(q - 1);
    const double t_end = grid.timestamp(q);

    for (std::size_t p : injections[q]) accept(nodes[slot_of(packets[p].packet.src)], p);

    for (auto& node : nodes) {
      if (node.stored.empty()) continue;
      if (!node.ledger) node.ledger.emplace(plan);
      std::deque<std::size_t> pending;
      pending.swap(node.stored);
      for (std::size_t p : pending) {
        const Packet& pkt = packets[p].packet;
        const RouteTable& table = cache.table(node.id, q, pkt.dst);
        const auto decision = forward_or_drop(pkt, table, t_start, *node.ledger, policy);
        if (decision.kind == ForwardDecision::Kind::drop) {
          --node.held;
          settle(p, Outcome::dropped);
        } else {
          queues[contact_slot.at(value(*decision.contact))].push_back(p);
        }
      }
    }

    std::vector<std::pair<std::size_t, std::size_t>> arrivals;  // (packet, receiving node slot)
    for (std::size_t ci = 0; ci < plan.contacts.size(); ++ci) {
      const auto& g = contact_grid[ci];
      if (q <= g.start_index || q > g.end_index) continue;
      auto& queue = queues[ci];
      const auto& c = plan.contacts[ci];
      std::int64_t sent = 0;
      NodeRuntime& sender = nodes[slot_of(c.from)];
      while (!queue.empty() && sent < c.capacity) {
        const std::size_t p = queue.front();
        queue.pop_front();
        // Held back past its planned state, the packet can no longer make
        // its deadline on this hop.
        const Packet& pkt = packets[p].packet;
        if (t_end - pkt.t_gen > pkt.ttl + kTimeTolerance) {
          --sender.held;
          settle(p, Outcome::dropped);
          continue;
        }
        ++sent;
        --sender.held;
        packets[p].record.transmissions += 1;
        packets[p].record.path.push_back(c.id);
        arrivals.emplace_back(p, slot_of(c.to));
      }
      if (sent > 0) result.utilization.push_back({c.id, q, sent});
    }

    // Packets left on contacts that end with this state go back to storage.
    for (std::size_t ci = 0; ci < plan.contacts.size(); ++ci) {
      if (contact_grid[ci].end_index != q || queues[ci].empty()) continue;
      NodeRuntime& sender = nodes[slot_of(plan.contacts[ci].from)];
      for (std::size_t p : queues[ci]) sender.stored.push_back(p);
      queues[ci].clear();
    }

    for (auto [p, slot] : arrivals) {
      NodeRuntime& receiver = nodes[slot];
      const Packet& pkt = packets[p].packet;
      if (receiver.id == pkt.dst) {
        const bool on_time = t_end - pkt.t_gen <= pkt.ttl + kTimeTolerance;
        settle(p, on_time ? Outcome::delivered_on_time : Outcome::delivered_late, t_end);
      } else {
        accept(receiver, p);
      }
    }
  }

  result.packets.reserve(packets.size());
  for (auto& ps : packets) {
    if (!ps.settled) ps.record.outcome = Outcome::stranded;
    result.packets.push_back(std::move(ps.record));
  }
  return result;
}

OutcomeCounts count_outcomes(const SimResult& result) {
  OutcomeCounts c;
  for (const auto& r : result.packets) {
    ++c.generated;
    c.transmissions += r.transmissions;
    switch (r.outcome) {
      case Outcome::delivered_on_time:
        ++c.delivered_on_time;
        break;
      case Outcome::delivered_late:
        ++c.delivered_late;
        break;
      case Outcome::dropped:
        ++c.dropped;
        break;
      case Outcome::stranded:
        ++c.stranded;
        break;
    }
  }
  return c;
}

Metrics compute_metrics(const SimResult& result) {
  const auto counts = count_outcomes(result);
  Metrics m;
  if (counts.generated > 0) {
    m.delivery_ratio = static_cast<double>(counts.delivered_on_time) / static_cast<double>(counts.generated);
  }
  if (counts.delivered_on_time > 0) {
    m.mean_hops = static_cast<double>(counts.transmissions) / static_cast<double>(counts.delivered_on_time);
    double delay = 0.0;
    for (const auto& r : result.packets) {
      if (r.outcome == Outcome::delivered_on_time) delay += *r.delivery_time - r.t_gen;
    }
    m.mean_delay = delay / static_cast<double>(counts.delivered_on_time);
  }
  if (counts.transmissions > 0) {
    m.energy_efficiency = static_cast<double>(counts.delivered_on_time) / static_cast<double>(counts.transmissions);
  }
  return m;
}

std::string records_to_csv(const SimResult& result) {
  std::string out = "packet_id,src,dst,t_gen,ttl,outcome,delivery_time,transmissions,path\n";
  for (const auto& r : result.packets) {
    std::string path;
    for (std::size_t i = 0; i < r.path.size(); ++i) {
      if (i) path += ' ';
      path += std::to_string(value(r.path[i]));
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.packet_id, value(r.src), value(r.dst), r.t_gen,
                       std::isinf(r.ttl) ? std::string("inf") : fmt::format("{}", r.ttl), to_string(r.outcome),
                       r.delivery_time ? fmt::format("{}", *r.delivery_time) : std::string(), r.transmissions, path);
  }
  return out;
}

std::string metrics_to_json(const Metrics& m) {
  auto field = [](const std::optional<double>& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::json j;
  j["delivery_ratio"] = field(m.delivery_ratio);
  j["mean_hops"] = field(m.mean_hops);
  j["mean_delay"] = field(m.mean_delay);
  j["energy_efficiency"] = field(m.energy_efficiency);
  return j.dump();
}

std::vector<Demand> parse_demands(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("demands are not valid JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("demands") || !j["demands"].is_array()) {
    throw Error("demands document needs a \"demands\" array");
  }
  std::vector<Demand> out;
  try {
    for (const auto& d : j["demands"]) {
      Demand dm;
      dm.src = NodeId{d.at("src").get<std::int32_t>()};
      dm.dst = NodeId{d.at("dst").get<std::int32_t>()};
      dm.t_gen = d.value("t_gen", 0.0);
      dm.count = d.at("count").get<std::int64_t>();
      if (d.contains("ttl") && !d["ttl"].is_null()) {
        const auto& ttl = d["ttl"];
        if (ttl.is_string()) {
          if (ttl.get<std::string>() != "inf") throw Error("ttl must be a number, null or \"inf\"");
        } else {
          dm.ttl = ttl.get<double>();
        }
      }
      out.push_back(dm);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("bad demand: {}", e.what()));
  }
  return out;
}

std::string demands_to_json(std::span<const Demand> demands) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : demands) {
    nlohmann::json o;
    o["src"] = value(d.src);
    o["dst"] = value(d.dst);
    o["t_gen"] = d.t_gen;
    o["ttl"] = std::isinf(d.ttl) ? nlohmann::json("inf") : nlohmann::json(d.ttl);
    o["count"] = d.count;
    arr.push_back(o);
  }
  return nlohmann::json{{"demands", arr}}.dump(2) + "\n";
}

}  // namespace dtnlab
