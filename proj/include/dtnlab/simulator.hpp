#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtnlab/contact_graph.hpp"
#include "dtnlab/contact_plan.hpp"
#include "dtnlab/forwarding.hpp"

namespace dtnlab {

struct Demand {
  NodeId src{};
  NodeId dst{};
  double t_gen = 0.0;
  double ttl = kInfinity;
  std::int64_t count = 0;

  bool operator==(const Demand&) const = default;
};

enum class Outcome { delivered_on_time, delivered_late, dropped, stranded };

std::string_view to_string(Outcome o);

struct PacketRecord {
  std::int64_t packet_id = 0;
  NodeId src{};
  NodeId dst{};
  double t_gen = 0.0;
  double ttl = kInfinity;
  Outcome outcome = Outcome::stranded;
  std::optional<double> delivery_time;
  int transmissions = 0;
  std::vector<ContactId> path;

  bool operator==(const PacketRecord&) const = default;
};

struct ContactUsage {
  ContactId contact{};
  int state = 0;
  std::int64_t transmitted = 0;

  bool operator==(const ContactUsage&) const = default;
};

struct SimResult {
  std::vector<PacketRecord> packets;
  /// One entry per (contact, state) that carried at least one packet, in
  /// transmission order.
  std::vector<ContactUsage> utilization;

  bool operator==(const SimResult&) const = default;
};

/// nullopt marks a metric whose denominator is zero.
struct Metrics {
  std::optional<double> delivery_ratio;
  std::optional<double> mean_hops;
  std::optional<double> mean_delay;
  std::optional<double> energy_efficiency;
};

/// Memoized route tables for one plan and one K. Tables depend only on the
/// plan, the owner and the state in which they are consulted, so a cache can
/// be shared by runs that differ only in traffic or policy.
class RouteTableCache {
 public:
  RouteTableCache(const ContactPlan& plan, int k);

  /// Table of `owner` computed from the start of state `state` (1-based),
  /// guaranteed to contain an entry for `dest`.
  const RouteTable& table(NodeId owner, int state, NodeId dest);
  int k() const { return k_; }
  const ContactPlan& plan() const { return graph_.plan(); }

 private:
  ContactGraph graph_;
  int k_;
  std::map<std::pair<std::int32_t, int>, RouteTable> tables_;
};

/// State-stepped store-carry-and-forward run. Within each state: demands
/// generated at the state start are injected; nodes in ascending id order
/// forward their stored packets (FIFO) and queue them on the first contact of
/// the selected route; every contact active in the state sends up to its
/// capacity from its queue (FIFO); sent packets reach the receiver at the
/// state end and are forwarded from the next state on.
SimResult run_simulation(const ContactPlan& plan, std::span<const Demand> demands, Policy policy, int k);
SimResult run_simulation(RouteTableCache& cache, std::span<const Demand> demands, Policy policy);

Metrics compute_metrics(const SimResult& result);

struct OutcomeCounts {
  std::int64_t generated = 0;
  std::int64_t delivered_on_time = 0;
  std::int64_t delivered_late = 0;
  std::int64_t dropped = 0;
  std::int64_t stranded = 0;
  std::int64_t transmissions = 0;
};

OutcomeCounts count_outcomes(const SimResult& result);

std::string records_to_csv(const SimResult& result);

/// {"demands": [{"src", "dst", "t_gen", "ttl", "count"}]}; a missing, null
/// or "inf" ttl means no deadline.
std::vector<Demand> parse_demands(std::string_view json);
std::string demands_to_json(std::span<const Demand> demands);
std::string metrics_to_json(const Metrics& m);

}  // namespace dtnlab
