#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtnlab {

enum class NodeId : std::int32_t {};
enum class ContactId : std::int32_t {};

constexpr std::int32_t value(NodeId id) { return static_cast<std::int32_t>(id); }
constexpr std::int32_t value(ContactId id) { return static_cast<std::int32_t>(id); }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the plan parser. Line and column are 1-based; column 0 means
/// the error concerns the whole line.
class PlanError : public Error {
 public:
  PlanError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Uniform discretization of the horizon into `state_count` states.
///
/// Timestamps are t_q = q * state_duration for q = 0..state_count, and state
/// q (1-based) spans [t_{q-1}, t_q].
struct StateGrid {
  int state_count = 1;
  double state_duration = 1.0;

  double timestamp(int q) const { return q * state_duration; }
  double horizon() const { return timestamp(state_count); }

  /// Index q with t_q == t, or nullopt when t is not a grid timestamp.
  std::optional<int> index_of(double t) const;
  /// Smallest q with t_q >= t (may exceed state_count).
  int ceil_index(double t) const;
  /// Largest q with t_q <= t (may be negative).
  int floor_index(double t) const;

  bool operator==(const StateGrid&) const = default;
};

struct Contact {
  ContactId id{};
  NodeId from{};
  NodeId to{};
  double start = 0.0;
  double end = 0.0;
  /// Packets per covered state.
  std::int64_t capacity = 0;

  bool operator==(const Contact&) const = default;
};

struct NodeSpec {
  NodeId id{};
  /// nullopt means unbounded storage.
  std::optional<std::int64_t> buffer_capacity;

  bool operator==(const NodeSpec&) const = default;
};

/// Contact in grid coordinates: covers states start_index+1 .. end_index.
/// Transmission in state q uses the interval [t_{q-1}, t_q].
struct GridContact {
  int start_index = 0;
  int end_index = 0;
  int state_span() const { return end_index - start_index; }
};

struct ContactPlan {
  StateGrid grid;
  std::vector<NodeSpec> nodes;
  std::vector<Contact> contacts;

  bool has_node(NodeId id) const;
  const NodeSpec& node(NodeId id) const;
  /// Position of a contact in `contacts`, or nullopt.
  std::optional<std::size_t> find_contact(ContactId id) const;
  const Contact& contact(ContactId id) const;
  GridContact grid_contact(const Contact& c) const;
  /// capacity * number of covered states.
  std::int64_t volume(const Contact& c) const;

  /// Sorts nodes by id and contacts by (start, id).
  void normalize();

  bool operator==(const ContactPlan&) const = default;
};

struct TopologyConfig {
  int node_count = 11;
  double density = 0.2;
  std::int64_t capacity = 10;
  StateGrid grid{10, 10.0};
  std::uint64_t seed = 1;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

ContactPlan parse_contact_plan(std::string_view text);
std::string serialize_contact_plan(const ContactPlan& plan);

/// Random plan: for every state and unordered node pair, with probability
/// `density` both directed contacts are emitted for exactly that state.
///
/// Draws come from std::mt19937_64 seeded with cfg.seed; each draw is mapped
/// to [0,1) as (x >> 11) * 2^-53 so the plan does not depend on the standard
/// library's distribution implementations. Pairs are visited state by state
/// in ascending (a, b) order, a < b; contact ids are assigned 1, 2, ... in
/// emission order (a->b before b->a).
ContactPlan generate_random_topology(const TopologyConfig& cfg);

/// Empty iff every plan invariant holds.
std::vector<Diagnostic> validate(const ContactPlan& plan);

}  // namespace dtnlab
