#include "dtnlab/contact_graph.hpp"

#include <algorithm>
#include <climits>

#include <fmt/format.h>

namespace dtnlab {

namespace {

constexpr int kUnreached = INT_MAX;
constexpr int kImpossible = INT_MIN;

std::vector<std::int32_t> id_sequence(const Route& r) {
  std::vector<std::int32_t> ids;
  ids.reserve(r.contacts.size());
  for (auto c : r.contacts) ids.push_back(value(c));
  return ids;
}

}  // namespace

bool delivery_order(const Route& a, const Route& b) {
  if (a.delivery_time != b.delivery_time) return a.delivery_time < b.delivery_time;
  if (a.hops != b.hops) return a.hops < b.hops;
  return id_sequence(a) < id_sequence(b);
}

std::span<const Route> RouteTable::to(NodeId dest) const {
  auto it = routes.find(dest);
  if (it == routes.end()) return {};
  return it->second;
}

ContactGraph::ContactGraph(const ContactPlan& plan) : plan_(plan) {
  for (const auto& n : plan.nodes) {
    const int idx = static_cast<int>(node_lookup_.size());
    node_lookup_.emplace(value(n.id), idx);
  }
  out_.resize(node_lookup_.size());
  for (std::size_t i = 0; i < plan.contacts.size(); ++i) {
    const auto& c = plan.contacts[i];
    const auto g = plan.grid_contact(c);
    Edge e{static_cast<int>(i), node_index(c.from), node_index(c.to), std::max(0, g.start_index), g.end_index};
    out_[e.from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back(e);
  }
  for (auto& list : out_) {
    std::sort(list.begin(), list.end(), [this](int a, int b) {
      return value(plan_.contacts[edges_[a].contact].id) < value(plan_.contacts[edges_[b].contact].id);
    });
  }
}

int ContactGraph::node_index(NodeId id) const {
  auto it = node_lookup_.find(value(id));
  if (it == node_lookup_.end()) throw Error(fmt::format("unknown node {}", value(id)));
  return it->second;
}

std::optional<std::vector<int>> ContactGraph::search(int source, int dest, int q0,
                                                     const std::vector<char>& contact_blocked,
                                                     const std::vector<char>& node_blocked) const {
  const int n = static_cast<int>(out_.size());
  const int max_hops = std::max(1, n - 1);
  auto usable = [&](const Edge& e) {
    return !contact_blocked[e.contact] && !node_blocked[e.from] && !node_blocked[e.to];
  };

  // Forward: earliest availability index per (exact hop count, node).
  std::vector<std::vector<int>> earliest(max_hops + 1, std::vector<int>(n, kUnreached));
  earliest[0][source] = q0;
  int best_time = kUnreached;
  int best_hops = 0;
  for (int h = 1; h <= max_hops; ++h) {
    bool any = false;
    for (const auto& e : edges_) {
      const int a = earliest[h - 1][e.from];
      if (a == kUnreached || !usable(e)) continue;
      const int s = std::max(a, e.start);
      if (s >= e.end) continue;
      if (s + 1 < earliest[h][e.to]) {
        earliest[h][e.to] = s + 1;
        any = true;
      }
    }
    if (earliest[h][dest] < best_time) {
      best_time = earliest[h][dest];
      best_hops = h;
    }
    if (!any) break;
  }
  if (best_time == kUnreached) return std::nullopt;

  // Backward: latest availability index from which dest is reached by
  // best_time with exactly r more hops.
  std::vector<std::vector<int>> latest(best_hops, std::vector<int>(n, kImpossible));
  latest[0][dest] = best_time;
  for (int r = 1; r < best_hops; ++r) {
    for (const auto& e : edges_) {
      const int next = latest[r - 1][e.to];
      if (next == kImpossible || !usable(e)) continue;
      const int hi = std::min(e.end - 1, next - 1);
      if (hi >= e.start) latest[r][e.from] = std::max(latest[r][e.from], hi);
    }
  }

  std::vector<int> path;
  int v = source;
  int q = q0;
  for (int r = best_hops; r >= 1; --r) {
    bool advanced = false;
    for (int ei : out_[v]) {
      const auto& e = edges_[ei];
      if (!usable(e)) continue;
      const int s = std::max(q, e.start);
      if (s >= e.end) continue;
      const int bound = latest[r - 1][e.to];
      if (bound == kImpossible || s + 1 > bound) continue;
      path.push_back(ei);
      v = e.to;
      q = s + 1;
      advanced = true;
      break;
    }
    if (!advanced) throw Error("route reconstruction failed");
  }
  return path;
}

Route ContactGraph::make_route(const std::vector<int>& path, double t_now) const {
  const auto& grid = plan_.grid;
  const int q0 = std::max(0, grid.ceil_index(t_now));
  Route r;
  r.hops = static_cast<int>(path.size());
  r.expiration = kInfinity;
  r.max_volume = std::numeric_limits<std::int64_t>::max();
  int q = q0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& e = edges_[path[i]];
    const auto& c = plan_.contacts[e.contact];
    const int s = std::max(q, e.start);
    if (i == 0) r.departure_time = grid.timestamp(s);
    q = s + 1;
    r.contacts.push_back(c.id);
    r.expiration = std::min(r.expiration, c.end);
    const std::int64_t remaining = c.capacity * std::max(0, e.end - std::max(e.start, q0));
    r.max_volume = std::min(r.max_volume, remaining);
  }
  r.source = plan_.contacts[edges_[path.front()].contact].from;
  r.destination = plan_.contacts[edges_[path.back()].contact].to;
  r.delivery_time = grid.timestamp(q);
  return r;
}

std::optional<Route> ContactGraph::earliest_delivery_route(NodeId source, NodeId dest, double t_now,
                                                           const Suppression& suppressed) const {
  const int s = node_index(source);
  const int d = node_index(dest);
  if (s == d) throw Error("source and destination must differ");
  if (t_now < 0) throw Error("t_now must be >= 0");

  std::vector<char> contact_blocked(plan_.contacts.size(), 0);
  for (auto id : suppressed.contacts) {
    if (auto i = plan_.find_contact(id)) contact_blocked[*i] = 1;
  }
  std::vector<char> node_blocked(out_.size(), 0);
  for (auto id : suppressed.nodes) {
    if (auto it = node_lookup_.find(value(id)); it != node_lookup_.end()) node_blocked[it->second] = 1;
  }
  if (node_blocked[s] || node_blocked[d]) return std::nullopt;

  auto path = search(s, d, std::max(0, plan_.grid.ceil_index(t_now)), contact_blocked, node_blocked);
  if (!path) return std::nullopt;
  return make_route(*path, t_now);
}

std::vector<Route> ContactGraph::k_best_routes(NodeId source, NodeId dest, double t_now, int k) const {
  if (k < 1) throw Error("K must be >= 1");
  const int s = node_index(source);
  const int d = node_index(dest);
  if (s == d) throw Error("source and destination must differ");
  if (t_now < 0) throw Error("t_now must be >= 0");
  const int q0 = std::max(0, plan_.grid.ceil_index(t_now));

  struct Found {
    std::vector<int> path;
    Route route;
    int deviation;
  };

  std::vector<char> contact_blocked(plan_.contacts.size(), 0);
  std::vector<char> node_blocked(out_.size(), 0);

  std::vector<Found> accepted;
  std::vector<Found> candidates;
  std::set<std::vector<int>> known;

  auto first = search(s, d, q0, contact_blocked, node_blocked);
  if (!first) return {};
  accepted.push_back({*first, make_route(*first, t_now), 0});
  known.insert(*first);

  while (static_cast<int>(accepted.size()) < k) {
    const Found parent = accepted.back();
    // Availability index at each node along the parent's schedule.
    std::vector<int> avail{q0};
    for (int ei : parent.path) avail.push_back(std::max(avail.back(), edges_[ei].start) + 1);

    for (int i = parent.deviation; i < static_cast<int>(parent.path.size()); ++i) {
      const int spur_node = i == 0 ? s : edges_[parent.path[i - 1]].to;
      std::fill(contact_blocked.begin(), contact_blocked.end(), 0);
      std::fill(node_blocked.begin(), node_blocked.end(), 0);
      for (const auto& f : accepted) {
        if (static_cast<int>(f.path.size()) > i && std::equal(f.path.begin(), f.path.begin() + i, parent.path.begin())) {
          contact_blocked[edges_[f.path[i]].contact] = 1;
        }
      }
      node_blocked[s] = 1;
      for (int j = 0; j < i; ++j) node_blocked[edges_[parent.path[j]].to] = 1;
      node_blocked[spur_node] = 0;

      auto spur = search(spur_node, d, avail[i], contact_blocked, node_blocked);
      if (!spur) continue;
      std::vector<int> path(parent.path.begin(), parent.path.begin() + i);
      path.insert(path.end(), spur->begin(), spur->end());
      if (!known.insert(path).second) continue;
      candidates.push_back({path, make_route(path, t_now), i});
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const Found& a, const Found& b) { return delivery_order(a.route, b.route); });
    accepted.push_back(std::move(*best));
    candidates.erase(best);
  }

  std::vector<Route> out;
  out.reserve(accepted.size());
  for (auto& f : accepted) out.push_back(std::move(f.route));
  return out;
}

RouteTable ContactGraph::build_route_table(NodeId owner, double t_now, int k,
                                           const std::set<NodeId>& destinations) const {
  node_index(owner);
  RouteTable table;
  table.owner = owner;
  table.k_routes = k;
  for (NodeId dest : destinations) {
    if (dest == owner) continue;
    table.routes[dest] = k_best_routes(owner, dest, t_now, k);
  }
  return table;
}

Route ContactGraph::route_attributes(std::span<const ContactId> contacts, double t_now) const {
  if (contacts.empty()) throw Error("route needs at least one contact");
  std::vector<int> path;
  std::set<int> visited;
  int q = std::max(0, plan_.grid.ceil_index(t_now));
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto pos = plan_.find_contact(contacts[i]);
    if (!pos) throw Error(fmt::format("unknown contact {}", value(contacts[i])));
    const auto& c = plan_.contacts[*pos];
    const auto& e = edges_[*pos];
    if (i == 0) {
      visited.insert(e.from);
    } else if (e.from != edges_[path.back()].to) {
      throw Error(fmt::format("broken chain at contact {}", value(c.id)));
    }
    if (!visited.insert(e.to).second) throw Error(fmt::format("contact {} revisits a node", value(c.id)));
    if (c.end <= t_now) throw Error(fmt::format("contact {} already ended at t={}", value(c.id), t_now));
    const int s = std::max(q, e.start);
    if (s >= e.end) throw Error(fmt::format("contact {} ends before the route reaches it", value(c.id)));
    q = s + 1;
    path.push_back(*pos);
  }
  return make_route(path, t_now);
}

std::optional<Route> earliest_delivery_route(const ContactPlan& plan, NodeId source, NodeId dest, double t_now,
                                             const Suppression& suppressed) {
  return ContactGraph(plan).earliest_delivery_route(source, dest, t_now, suppressed);
}

std::vector<Route> k_best_routes(const ContactPlan& plan, NodeId source, NodeId dest, double t_now, int k) {
  return ContactGraph(plan).k_best_routes(source, dest, t_now, k);
}

RouteTable build_route_table(const ContactPlan& plan, NodeId owner, double t_now, int k,
                             const std::set<NodeId>& destinations) {
  return ContactGraph(plan).build_route_table(owner, t_now, k, destinations);
}

Route route_attributes(const ContactPlan& plan, std::span<const ContactId> contacts, double t_now) {
  return ContactGraph(plan).route_attributes(contacts, t_now);
}

}  // namespace dtnlab
