#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dtnlab::lp {

enum class Sense { le, eq, ge };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;
  Sense sense = Sense::eq;
  double rhs = 0.0;
};

/// minimize cost.x subject to rows and lower <= x <= upper. Lower bounds
/// must be finite; upper bounds may be +infinity.
struct Program {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  int add_variable(double c, double lo, double hi) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(cost.size()) - 1;
  }
  std::size_t variable_count() const { return cost.size(); }
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

std::string_view to_string(Status s);

struct Result {
  Status status = Status::numerical_failure;
  std::vector<double> x;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

/// Two-phase primal simplex on a dense tableau with implicit upper bounds.
/// Fixed variables and empty rows are removed first. Pricing is Dantzig's
/// rule, switching to Bland's rule after a run of degenerate pivots.
Result solve(const Program& program);

}  // namespace dtnlab::lp
