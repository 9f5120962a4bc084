#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dtnlab/contact_graph.hpp"
#include "dtnlab/contact_plan.hpp"

namespace dtnlab {

struct Packet {
  std::int64_t id = 0;
  NodeId src{};
  NodeId dst{};
  double t_gen = 0.0;
  /// kInfinity when the packet has no latency requirement.
  double ttl = kInfinity;

  double deadline() const { return t_gen + ttl; }
};

enum class Policy { deltime, hops };

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view text);

/// Residual volume per contact as seen by a single node.
class CapacityLedger {
 public:
  explicit CapacityLedger(const ContactPlan& plan);

  std::int64_t residual(ContactId id) const;
  /// Full volume of the contact (capacity times covered states).
  std::int64_t volume(ContactId id) const;
  /// Decrements every contact of the route by n.
  void book(const Route& route, std::int64_t n);

 private:
  std::size_t slot(ContactId id) const;

  std::unordered_map<std::int32_t, std::size_t> slots_;
  std::vector<std::int64_t> residual_;
  std::vector<std::int64_t> volume_;
};

/// Routes to pkt.dst that are still usable at t_now and meet the packet's
/// deadline, in table order.
std::vector<Route> filter_routes(const RouteTable& table, const Packet& pkt, double t_now,
                                 const CapacityLedger& ledger);

std::optional<Route> select_route(std::span<const Route> feasible, Policy policy);

void book_capacity(CapacityLedger& ledger, const Route& route, std::int64_t n);

struct ForwardDecision {
  enum class Kind { enqueue, drop };
  Kind kind = Kind::drop;
  /// First contact of the chosen route when kind == enqueue.
  std::optional<ContactId> contact;
  std::optional<Route> route;
};

/// filter_routes + select_route + one-packet booking.
ForwardDecision forward_or_drop(const Packet& pkt, const RouteTable& table, double t_now, CapacityLedger& ledger,
                                Policy policy);

}  // namespace dtnlab
