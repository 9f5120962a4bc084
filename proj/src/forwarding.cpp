#include "dtnlab/forwarding.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace dtnlab {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::deltime:
      return "DELTIME";
    case Policy::hops:
      return "HOPS";
  }
  return "?";
}

Policy parse_policy(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "deltime") return Policy::deltime;
  if (lower == "hops") return Policy::hops;
  throw Error(fmt::format("unknown policy '{}'", text));
}

CapacityLedger::CapacityLedger(const ContactPlan& plan) {
  residual_.reserve(plan.contacts.size());
  for (const auto& c : plan.contacts) {
    slots_.emplace(value(c.id), residual_.size());
    residual_.push_back(plan.volume(c));
  }
  volume_ = residual_;
}

std::size_t CapacityLedger::slot(ContactId id) const {
  if (auto it = slots_.find(value(id)); it != slots_.end()) return it->second;
  throw Error(fmt::format("unknown contact {}", value(id)));
}

std::int64_t CapacityLedger::residual(ContactId id) const { return residual_[slot(id)]; }

std::int64_t CapacityLedger::volume(ContactId id) const { return volume_[slot(id)]; }

void CapacityLedger::book(const Route& route, std::int64_t n) {
  if (n < 0) throw Error("cannot book a negative amount");
  std::vector<std::size_t> slots;
  for (auto id : route.contacts) {
    const auto s = slot(id);
    if (residual_[s] < n) {
      throw Error(fmt::format("contact {} has residual {} < {}", value(id), residual_[s], n));
    }
    slots.push_back(s);
  }
  for (auto s : slots) residual_[s] -= n;
}

std::vector<Route> filter_routes(const RouteTable& table, const Packet& pkt, double t_now,
                                 const CapacityLedger& ledger) {
  std::vector<Route> out;
  for (const auto& r : table.to(pkt.dst)) {
    if (r.expiration <= t_now) continue;
    if (r.departure_time < t_now) continue;
    if (r.delivery_time > pkt.deadline()) continue;
    const bool has_room = std::all_of(r.contacts.begin(), r.contacts.end(),
                                      [&ledger](ContactId id) { return ledger.residual(id) >= 1; });
    if (!has_room) continue;
    out.push_back(r);
  }
  return out;
}

std::optional<Route> select_route(std::span<const Route> feasible, Policy policy) {
  if (feasible.empty()) return std::nullopt;
  auto fewest_hops = [](const Route& a, const Route& b) {
    if (a.hops != b.hops) return a.hops < b.hops;
    return delivery_order(a, b);
  };
  if (policy == Policy::hops) return *std::min_element(feasible.begin(), feasible.end(), fewest_hops);
  return *std::min_element(feasible.begin(), feasible.end(), delivery_order);
}

void book_capacity(CapacityLedger& ledger, const Route& route, std::int64_t n) { ledger.book(route, n); }

ForwardDecision forward_or_drop(const Packet& pkt, const RouteTable& table, double t_now, CapacityLedger& ledger,
                                Policy policy) {
  ForwardDecision decision;
  if (pkt.deadline() < t_now) return decision;
  const auto feasible = filter_routes(table, pkt, t_now, ledger);
  auto chosen = select_route(feasible, policy);
  if (!chosen) return decision;
  ledger.book(*chosen, 1);
  decision.kind = ForwardDecision::Kind::enqueue;
  decision.contact = chosen->contacts.front();
  decision.route = std::move(chosen);
  return decision;
}

}  // namespace dtnlab
