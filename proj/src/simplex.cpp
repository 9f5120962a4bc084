#include "dtnlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtnlab::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr int kDegenerateRunBeforeBland = 60;

enum class Where : std::uint8_t { basic, at_lower, at_upper };

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return t_[static_cast<std::size_t>(i) * n_ + j]; }
  double* row(int i) { return t_.data() + static_cast<std::size_t>(i) * n_; }
  int rows() const { return m_; }
  int cols() const { return n_; }

 private:
  int m_;
  int n_;
  std::vector<double> t_;
};

struct State {
  Tableau tab;
  std::vector<double> beta;   // values of basic variables (shifted space)
  std::vector<int> basis;     // column basic in each row
  std::vector<Where> where;   // per column
  std::vector<double> upper;  // shifted upper bounds
  std::vector<char> frozen;   // columns never allowed to enter
  std::int64_t iterations = 0;
};

enum class Outcome { optimal, unbounded, stalled };

void pivot(State& s, std::vector<double>& d, int r, int j, std::vector<int>& nz) {
  Tableau& tab = s.tab;
  const int n = tab.cols();
  double* pr = tab.row(r);
  const double inv = 1.0 / pr[j];
  nz.clear();
  for (int k = 0; k < n; ++k) {
    if (pr[k] != 0.0) {
      pr[k] *= inv;
      if (std::abs(pr[k]) < kDropTol) {
        pr[k] = 0.0;
      } else {
        nz.push_back(k);
      }
    }
  }
  pr[j] = 1.0;
  for (int i = 0; i < tab.rows(); ++i) {
    if (i == r) continue;
    double* pi = tab.row(i);
    const double f = pi[j];
    if (f == 0.0) continue;
    for (int k : nz) {
      double v = pi[k] - f * pr[k];
      pi[k] = std::abs(v) < kDropTol ? 0.0 : v;
    }
    pi[j] = 0.0;
  }
  const double f = d[j];
  if (f != 0.0) {
    for (int k : nz) d[k] -= f * pr[k];
    d[j] = 0.0;
  }
}

Outcome run_simplex(State& s, std::vector<double>& d, std::int64_t iteration_cap) {
  Tableau& tab = s.tab;
  const int m = tab.rows();
  const int n = tab.cols();
  std::vector<int> nz;
  nz.reserve(n);
  int degenerate_run = 0;

  while (true) {
    if (s.iterations >= iteration_cap) return Outcome::stalled;
    const bool bland = degenerate_run >= kDegenerateRunBeforeBland;

    int enter = -1;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      if (s.where[j] == Where::basic || s.frozen[j]) continue;
      double gain = 0.0;
      if (s.where[j] == Where::at_lower && d[j] < -kOptTol) gain = -d[j];
      if (s.where[j] == Where::at_upper && d[j] > kOptTol) gain = d[j];
      if (gain == 0.0) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (gain > best) {
        best = gain;
        enter = j;
      }
    }
    if (enter < 0) return Outcome::optimal;

    const double dir = s.where[enter] == Where::at_lower ? 1.0 : -1.0;
    double theta = s.upper[enter];
    int leave_row = -1;
    bool leave_to_upper = false;
    double leave_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = dir * tab.at(i, enter);
      if (std::abs(a) <= kPivotTol) continue;
      double limit;
      bool to_upper;
      if (a > 0) {
        limit = std::max(0.0, s.beta[i]) / a;
        to_upper = false;
      } else {
        const double ub = s.upper[s.basis[i]];
        if (ub == kInf) continue;
        limit = std::max(0.0, ub - s.beta[i]) / -a;
        to_upper = true;
      }
      bool take = false;
      if (limit < theta - 1e-12) {
        take = true;
      } else if (leave_row >= 0 && limit <= theta + 1e-12) {
        // Tie: Bland picks the smallest basic column, otherwise the largest pivot.
        take = bland ? s.basis[i] < s.basis[leave_row] : std::abs(a) > leave_pivot;
      }
      if (take) {
        theta = std::min(theta, limit);
        leave_row = i;
        leave_to_upper = to_upper;
        leave_pivot = std::abs(a);
      }
    }
    if (theta == kInf) return Outcome::unbounded;
    ++s.iterations;
    degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

    for (int i = 0; i < m; ++i) {
      const double a = tab.at(i, enter);
      if (a != 0.0) s.beta[i] -= dir * a * theta;
    }

    if (leave_row < 0) {
      // Bound flip: the entering column reaches its other bound first.
      s.where[enter] = s.where[enter] == Where::at_lower ? Where::at_upper : Where::at_lower;
      continue;
    }

    const int leaving = s.basis[leave_row];
    s.where[leaving] = leave_to_upper ? Where::at_upper : Where::at_lower;
    const double entering_value = dir > 0 ? theta : s.upper[enter] - theta;
    pivot(s, d, leave_row, enter, nz);
    s.basis[leave_row] = enter;
    s.where[enter] = Where::basic;
    s.beta[leave_row] = entering_value;
  }
}

std::vector<double> reduced_costs(const State& s, const std::vector<double>& cost) {
  const int m = s.tab.rows();
  const int n = s.tab.cols();
  std::vector<double> d = cost;
  for (int i = 0; i < m; ++i) {
    const double cb = cost[s.basis[i]];
    if (cb == 0.0) continue;
    for (int k = 0; k < n; ++k) {
      const double a = s.tab.at(i, k);
      if (a != 0.0) d[k] -= cb * a;
    }
  }
  for (int i = 0; i < m; ++i) d[s.basis[i]] = 0.0;
  return d;
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::numerical_failure:
      return "numerical_failure";
  }
  return "?";
}

Result solve(const Program& program) {
  const int nvars = static_cast<int>(program.cost.size());
  if (program.lower.size() != program.cost.size() || program.upper.size() != program.cost.size()) {
    throw std::invalid_argument("program bound vectors do not match cost vector");
  }
  Result result;
  result.x.assign(nvars, 0.0);

  // Presolve: fixed columns and columns without rows.
  std::vector<char> fixed(nvars, 0);
  std::vector<int> uses(nvars, 0);
  for (int j = 0; j < nvars; ++j) {
    const double lo = program.lower[j];
    const double hi = program.upper[j];
    if (!std::isfinite(lo)) throw std::invalid_argument("lower bounds must be finite");
    if (hi < lo - kFeasTol) {
      result.status = Status::infeasible;
      return result;
    }
    if (hi - lo <= 1e-12) {
      fixed[j] = 1;
      result.x[j] = lo;
    }
  }
  for (const auto& row : program.rows) {
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= nvars) throw std::invalid_argument("row references unknown variable");
      if (t.coef != 0.0) ++uses[t.var];
    }
  }

  std::vector<int> column_of(nvars, -1);
  std::vector<int> var_of;
  for (int j = 0; j < nvars; ++j) {
    if (fixed[j]) continue;
    if (uses[j] == 0) {
      if (program.cost[j] >= 0) {
        result.x[j] = program.lower[j];
      } else if (std::isfinite(program.upper[j])) {
        result.x[j] = program.upper[j];
      } else {
        result.status = Status::unbounded;
        return result;
      }
      continue;
    }
    column_of[j] = static_cast<int>(var_of.size());
    var_of.push_back(j);
  }
  const int nstruct = static_cast<int>(var_of.size());

  struct Kept {
    const Row* row;
    double rhs;  // shifted by fixed values and lower bounds
  };
  std::vector<Kept> kept;
  for (const auto& row : program.rows) {
    double rhs = row.rhs;
    bool active = false;
    for (const auto& t : row.terms) {
      if (t.coef == 0.0) continue;
      rhs -= t.coef * (fixed[t.var] || column_of[t.var] < 0 ? result.x[t.var] : program.lower[t.var]);
      if (column_of[t.var] >= 0) active = true;
    }
    if (!active) {
      const double scale = std::max(1.0, std::abs(row.rhs));
      const bool ok = (row.sense == Sense::le && rhs >= -kFeasTol * scale) ||
                      (row.sense == Sense::ge && rhs <= kFeasTol * scale) ||
                      (row.sense == Sense::eq && std::abs(rhs) <= kFeasTol * scale);
      if (!ok) {
        result.status = Status::infeasible;
        return result;
      }
      continue;
    }
    kept.push_back({&row, rhs});
  }
  const int m = static_cast<int>(kept.size());

  int nslack = 0;
  for (const auto& k : kept) {
    if (k.row->sense != Sense::eq) ++nslack;
  }
  // Decide which rows need an artificial column.
  std::vector<double> sign(m, 1.0);
  std::vector<char> needs_artificial(m, 0);
  int nart = 0;
  for (int i = 0; i < m; ++i) {
    const Sense sense = kept[i].row->sense;
    if (kept[i].rhs < 0) sign[i] = -1.0;
    const double slack_coef = sense == Sense::le ? sign[i] : sense == Sense::ge ? -sign[i] : 0.0;
    if (slack_coef <= 0.0) {
      needs_artificial[i] = 1;
      ++nart;
    }
  }

  const int ncols = nstruct + nslack + nart;
  State s{Tableau(m, ncols), std::vector<double>(m), std::vector<int>(m), std::vector<Where>(ncols, Where::at_lower),
          std::vector<double>(ncols, kInf), std::vector<char>(ncols, 0)};
  for (int c = 0; c < nstruct; ++c) s.upper[c] = program.upper[var_of[c]] - program.lower[var_of[c]];

  int next_slack = nstruct;
  int next_art = nstruct + nslack;
  for (int i = 0; i < m; ++i) {
    const Row& row = *kept[i].row;
    for (const auto& t : row.terms) {
      const int c = column_of[t.var];
      if (c >= 0 && t.coef != 0.0) s.tab.at(i, c) += sign[i] * t.coef;
    }
    s.beta[i] = sign[i] * kept[i].rhs;
    if (row.sense != Sense::eq) {
      const int c = next_slack++;
      s.tab.at(i, c) = row.sense == Sense::le ? sign[i] : -sign[i];
      if (!needs_artificial[i]) s.basis[i] = c;
    }
    if (needs_artificial[i]) {
      const int c = next_art++;
      s.tab.at(i, c) = 1.0;
      s.basis[i] = c;
    }
  }
  for (int i = 0; i < m; ++i) s.where[s.basis[i]] = Where::basic;

  const std::int64_t cap = 50LL * (m + ncols) + 1000;

  if (nart > 0) {
    std::vector<double> phase1(ncols, 0.0);
    for (int c = nstruct + nslack; c < ncols; ++c) phase1[c] = 1.0;
    auto d = reduced_costs(s, phase1);
    const auto outcome = run_simplex(s, d, cap);
    if (outcome == Outcome::stalled) {
      result.status = Status::numerical_failure;
      result.iterations = s.iterations;
      return result;
    }
    double infeasibility = 0.0;
    double scale = 1.0;
    for (int i = 0; i < m; ++i) {
      scale = std::max(scale, std::abs(kept[i].rhs));
      if (s.basis[i] >= nstruct + nslack) infeasibility += s.beta[i];
    }
    if (infeasibility > 1e-7 * scale) {
      result.status = Status::infeasible;
      result.iterations = s.iterations;
      return result;
    }
    for (int c = nstruct + nslack; c < ncols; ++c) {
      s.upper[c] = 0.0;
      s.frozen[c] = 1;
    }
  }

  std::vector<double> phase2(ncols, 0.0);
  for (int c = 0; c < nstruct; ++c) phase2[c] = program.cost[var_of[c]];
  auto d = reduced_costs(s, phase2);
  const auto outcome = run_simplex(s, d, cap);
  result.iterations = s.iterations;
  if (outcome == Outcome::stalled) {
    result.status = Status::numerical_failure;
    return result;
  }
  if (outcome == Outcome::unbounded) {
    result.status = Status::unbounded;
    return result;
  }

  std::vector<double> shifted(ncols, 0.0);
  for (int c = 0; c < ncols; ++c) {
    if (s.where[c] == Where::at_upper) shifted[c] = s.upper[c];
  }
  for (int i = 0; i < m; ++i) shifted[s.basis[i]] = s.beta[i];
  for (int c = 0; c < nstruct; ++c) {
    const int j = var_of[c];
    double v = program.lower[j] + shifted[c];
    v = std::clamp(v, program.lower[j], program.upper[j]);
    result.x[j] = v;
  }
  result.objective = 0.0;
  for (int j = 0; j < nvars; ++j) result.objective += program.cost[j] * result.x[j];
  result.status = Status::optimal;
  return result;
}

}  // namespace dtnlab::lp
