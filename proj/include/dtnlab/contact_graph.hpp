#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "dtnlab/contact_plan.hpp"

namespace dtnlab {

/// An ordered contact sequence from `source` to `destination`, scheduled as
/// early as possible: each hop is transmitted in the first state of its
/// contact that starts at or after the packet's arrival at the sending node,
/// and the packet reaches the receiver at the end of that state.
struct Route {
  std::vector<ContactId> contacts;
  NodeId source{};
  NodeId destination{};
  /// Start of the state in which the first contact transmits.
  double departure_time = 0.0;
  double delivery_time = 0.0;
  int hops = 0;
  /// Earliest end among the route's contacts.
  double expiration = 0.0;
  /// Smallest remaining contact volume along the route.
  std::int64_t max_volume = 0;

  bool operator==(const Route&) const = default;
};

/// Sort key shared by route search, route tables and the earliest-delivery
/// policy: (delivery_time, hops, contact ids lexicographically).
bool delivery_order(const Route& a, const Route& b);

struct Suppression {
  std::set<ContactId> contacts;
  std::set<NodeId> nodes;
};

struct RouteTable {
  NodeId owner{};
  int k_routes = 1;
  std::map<NodeId, std::vector<Route>> routes;

  /// Routes towards `dest`; empty when the destination is not in the table.
  std::span<const Route> to(NodeId dest) const;
};

/// Contact graph view of a plan used by the route searches.
///
/// Search works on grid indices. A label records, for a node and an exact hop
/// count, the earliest timestamp index at which the node can hold the packet.
/// Because waiting at a node is always allowed and arrival times are monotone
/// in departure times, the minimum over hop counts gives the earliest delivery
/// and the smallest hop count achieving it; the contact sequence is then
/// rebuilt front to back taking the smallest usable contact id at each step,
/// guided by backward "latest usable time" labels. Any minimum-hop route at the
/// earliest delivery time visits no node twice, so no explicit loop check is
/// needed there.
class ContactGraph {
 public:
  explicit ContactGraph(const ContactPlan& plan);

  const ContactPlan& plan() const { return plan_; }

  std::optional<Route> earliest_delivery_route(NodeId source, NodeId dest, double t_now,
                                               const Suppression& suppressed = {}) const;

  /// K best loop-free routes under delivery_order, via Yen's spur scheme with
  /// Lawler's restriction to spurs at or after the parent's deviation index.
  std::vector<Route> k_best_routes(NodeId source, NodeId dest, double t_now, int k) const;

  RouteTable build_route_table(NodeId owner, double t_now, int k, const std::set<NodeId>& destinations) const;

  Route route_attributes(std::span<const ContactId> contacts, double t_now) const;

 private:
  struct Edge {
    int contact;  // index into plan_.contacts
    int from;     // node index
    int to;
    int start;    // grid index
    int end;
  };

  int node_index(NodeId id) const;
  std::optional<std::vector<int>> search(int source, int dest, int q0, const std::vector<char>& contact_blocked,
                                         const std::vector<char>& node_blocked) const;
  Route make_route(const std::vector<int>& edges, double t_now) const;

  const ContactPlan& plan_;
  std::map<std::int32_t, int> node_lookup_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;  // per node, edge indices sorted by contact id
};

std::optional<Route> earliest_delivery_route(const ContactPlan& plan, NodeId source, NodeId dest, double t_now,
                                             const Suppression& suppressed = {});
std::vector<Route> k_best_routes(const ContactPlan& plan, NodeId source, NodeId dest, double t_now, int k);
RouteTable build_route_table(const ContactPlan& plan, NodeId owner, double t_now, int k,
                             const std::set<NodeId>& destinations);
Route route_attributes(const ContactPlan& plan, std::span<const ContactId> contacts, double t_now);

}  // namespace dtnlab
