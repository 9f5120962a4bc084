#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtnlab/contact_plan.hpp"
#include "dtnlab/simplex.hpp"
#include "dtnlab/simulator.hpp"

namespace dtnlab {

/// Traffic aggregate routed as one flow: all demands sharing
/// (source, destination, generation time, ttl).
struct Commodity {
  NodeId source{};
  NodeId destination{};
  double t_gen = 0.0;
  double ttl = kInfinity;
  double amount = 0.0;

  bool operator==(const Commodity&) const = default;
};

std::vector<Commodity> demands_to_commodities(std::span<const Demand> demands);

/// Positive, strictly increasing weight per state (1-based) used to price
/// flow on arcs of that state.
class StateWeights {
 public:
  /// w(q) = q.
  static StateWeights linear(int state_count);
  explicit StateWeights(std::vector<double> per_state);

  double operator()(int state) const { return weights_.at(state - 1); }
  int state_count() const { return static_cast<int>(weights_.size()); }
  StateWeights scaled(double factor) const;
  const std::vector<double>& values() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// One directed arc of the time-expanded model: a contact in one state.
struct Arc {
  ContactId contact{};
  NodeId from{};
  NodeId to{};
  int state = 0;
  std::int64_t capacity = 0;
};

enum class ConstraintTag { buffer_recursion, buffer_capacity, arc_capacity, initial_buffer, precedence, deadline,
                           final_buffer, destination_outflow, drop_bound, nonnegativity };

std::string_view to_string(ConstraintTag tag);

struct BuildOptions {
  /// Fix to zero the flow and buffer variables that no feasible solution can
  /// use (arcs unreachable from the source in time, or from which the
  /// destination cannot be reached by the deadline). Leaves the optimum
  /// unchanged and shrinks the problem considerably.
  bool prune_unreachable = true;
  /// Adds a per-commodity drop variable priced at horizon * |arcs| so that
  /// overloaded instances still solve. Not part of the hard model.
  bool soft = false;
};

/// Multi-commodity flow over the time-expanded contact plan.
///
/// Variables are X[arc, commodity] (packets of the commodity sent on the
/// arc), B[q, node, commodity] (packets stored at the node at timestamp t_q)
/// and, in soft mode, D[commodity] (packets never injected). Flow
/// conservation, buffer and arc capacities are rows; initial buffers,
/// final buffers, the no-transmission-before-generation rule, the deadline
/// lower bounds and the destination's zero outflow are variable bounds.
struct LpProblem {
  StateGrid grid;
  std::vector<NodeSpec> nodes;
  std::vector<Arc> arcs;
  std::vector<Commodity> commodities;
  std::vector<double> weights;  // per state, 1-based via weight(q)
  BuildOptions options;
  double drop_penalty = 0.0;

  lp::Program program;
  std::vector<ConstraintTag> row_tags;

  std::size_t flow_variable_count() const { return arcs.size() * commodities.size(); }
  std::size_t buffer_variable_count() const {
    return commodities.size() * nodes.size() * static_cast<std::size_t>(grid.state_count + 1);
  }
  int flow_var(std::size_t arc, std::size_t commodity) const {
    return static_cast<int>(commodity * arcs.size() + arc);
  }
  int buffer_var(int q, std::size_t node, std::size_t commodity) const {
    return static_cast<int>(flow_variable_count() +
                            (commodity * nodes.size() + node) * static_cast<std::size_t>(grid.state_count + 1) + q);
  }
  /// Only valid in soft mode.
  int drop_var(std::size_t commodity) const {
    return static_cast<int>(flow_variable_count() + buffer_variable_count() + commodity);
  }
  std::size_t node_slot(NodeId id) const;
  /// Timestamp index by which the commodity must sit at its destination.
  int deadline_index(const Commodity& c) const;
};

struct LpSolution {
  lp::Status status = lp::Status::numerical_failure;
  std::vector<double> values;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

struct Violation {
  ConstraintTag tag;
  std::string where;
  double excess = 0.0;
};

LpProblem build_lp(const ContactPlan& plan, std::span<const Commodity> commodities, const StateWeights& weights,
                   const BuildOptions& options = {});

/// Solves and certifies: an optimum that fails verify_solution at 1e-6 is
/// reported as numerical_failure.
LpSolution solve_lp(const LpProblem& problem);

/// Re-evaluates every model constraint from the problem's arcs, nodes and
/// commodities (not from its stored rows). Empty result certifies the
/// solution at `tol`.
std::vector<Violation> verify_solution(const LpProblem& problem, const LpSolution& solution, double tol);

Metrics lp_metrics(const LpProblem& problem, const LpSolution& solution);

/// CPLEX LP text format.
std::string to_lp_format(const LpProblem& problem);

/// Nonzero flows as "state,contact,from,to,commodity,value"; soft-mode drops
/// appear as rows whose contact field is "drop".
std::string solution_to_csv(const LpProblem& problem, const LpSolution& solution);

/// Rebuilds a full solution from flow rows: buffers follow from the flows by
/// the storage recursion. Status is set to optimal; run verify_solution to
/// check it.
LpSolution solution_from_csv(const LpProblem& problem, std::string_view csv);

}  // namespace dtnlab
