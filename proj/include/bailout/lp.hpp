#ifndef BAILOUT_LP_HPP
#define BAILOUT_LP_HPP

// Dense two-phase primal simplex with implicit variable bounds.
//
// maximize    objective . x
// subject to  coeffs_i . x  (<=|=|>=)  rhs_i
//             lower <= x <= upper       (upper may be +inf)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bailout/network.hpp"

namespace bailout {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t n)
      : num_vars(n),
        objective(n, 0.0),
        lower_bounds(n, 0.0),
        upper_bounds(n, std::numeric_limits<double>::infinity()) {}

  Constraint& add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
    constraints.push_back(Constraint{std::move(coeffs), rel, rhs});
    return constraints.back();
  }

  [[nodiscard]] std::size_t count(Relation rel) const {
    return static_cast<std::size_t>(std::count_if(constraints.begin(), constraints.end(),
                                                  [rel](const Constraint& c) { return c.relation == rel; }));
  }
};

inline void validate(const LinearProgram& lp) {
  if (lp.num_vars == 0) throw ValidationError("linear program needs at least one variable");
  if (lp.objective.size() != lp.num_vars || lp.lower_bounds.size() != lp.num_vars ||
      lp.upper_bounds.size() != lp.num_vars) {
    throw ValidationError("objective and bound arrays must have num_vars entries");
  }
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    if (!std::isfinite(lp.objective[j])) throw ValidationError("non-finite objective coefficient");
    if (!std::isfinite(lp.lower_bounds[j])) throw ValidationError("lower bounds must be finite");
    if (std::isnan(lp.upper_bounds[j]) || lp.upper_bounds[j] == -std::numeric_limits<double>::infinity()) {
      throw ValidationError("upper bound must be a number or +inf");
    }
    if (lp.lower_bounds[j] > lp.upper_bounds[j]) {
      throw ValidationError("lower bound exceeds upper bound for variable " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& con = lp.constraints[i];
    if (con.coeffs.size() != lp.num_vars) {
      throw ValidationError("constraint " + std::to_string(i) + " has wrong number of coefficients");
    }
    if (!std::isfinite(con.rhs) ||
        !std::all_of(con.coeffs.begin(), con.coeffs.end(), [](double v) { return std::isfinite(v); })) {
      throw ValidationError("constraint " + std::to_string(i) + " has non-finite entries");
    }
  }
}

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;         // empty unless optimal
  double objective_value = 0.0;  // meaningful only when optimal
  std::size_t iterations = 0;    // pivots plus bound flips
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double pivot_tol = 1e-10;
  double optimality_tol = 1e-9;
  std::size_t max_iterations = 0;  // 0 picks a size-based cap
  std::ostream* trace = nullptr;   // tableau dump after every pivot
};

/// Largest constraint or bound violation of x, measured on rows scaled by
/// their max-abs coefficient.
inline double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    worst = std::max(worst, lp.lower_bounds[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper_bounds[j]);
  }
  for (const auto& con : lp.constraints) {
    double scale = 0.0;
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
      scale = std::max(scale, std::abs(con.coeffs[j]));
      lhs += con.coeffs[j] * x[j];
    }
    if (scale == 0.0) scale = 1.0;
    const double diff = (lhs - con.rhs) / scale;
    switch (con.relation) {
      case Relation::LessEqual: worst = std::max(worst, diff); break;
      case Relation::GreaterEqual: worst = std::max(worst, -diff); break;
      case Relation::Equal: worst = std::max(worst, std::abs(diff)); break;
    }
  }
  return worst;
}

/// Owns one working tableau; each instance solves its program once.
class SimplexSolver {
public:
  explicit SimplexSolver(LinearProgram lp, SimplexOptions opts = {})
      : lp_(std::move(lp)), opts_(opts) {
    validate(lp_);
    build();
  }

  LpSolution solve() {
    LpSolution sol;
    if (trivially_infeasible_) {
      status_ = LpStatus::Infeasible;
      sol.status = status_;
      return sol;
    }
    if (num_artificial_ > 0) {
      set_phase_one_costs();
      run(/*phase_one=*/true, sol.iterations);
      double infeasibility = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (is_artificial(basis_[r])) infeasibility = std::max(infeasibility, value_[r]);
      }
      if (infeasibility > opts_.feasibility_tol) {
        status_ = LpStatus::Infeasible;
        sol.status = status_;
        return sol;
      }
      retire_artificials();
    }
    set_phase_two_costs();
    const bool bounded = run(/*phase_one=*/false, sol.iterations);
    status_ = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
    return extract(sol);
  }

  [[nodiscard]] const LinearProgram& program() const { return lp_; }

  void dump_tableau(std::ostream& os) const {
    os << "basis/value |";
    for (std::size_t j = 0; j < cols_; ++j) os << std::setw(10) << ("v" + std::to_string(j));
    os << '\n';
    for (std::size_t r = 0; r < rows_; ++r) {
      os << std::setw(5) << basis_[r] << std::setw(7) << std::setprecision(4) << value_[r] << '|';
      for (std::size_t j = 0; j < cols_; ++j) os << std::setw(10) << std::setprecision(4) << tab_(r, j);
      os << '\n';
    }
    os << "d          |";
    for (std::size_t j = 0; j < cols_; ++j) os << std::setw(10) << std::setprecision(4) << reduced_[j];
    os << "\n\n";
  }

private:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool is_artificial(std::size_t col) const { return col >= first_artificial_; }

  // Columns: structural (shifted to lower bound 0), slacks, artificials.
  void build() {
    const std::size_t n = lp_.num_vars;
    trivially_infeasible_ = false;
    status_ = LpStatus::Infeasible;

    struct Row {
      std::vector<double> a;
      double b;
      Relation rel;
      double scale;
    };
    std::vector<Row> kept;
    kept.reserve(lp_.constraints.size());
    for (const auto& con : lp_.constraints) {
      double shift = 0.0;
      double scale = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        shift += con.coeffs[j] * lp_.lower_bounds[j];
        scale = std::max(scale, std::abs(con.coeffs[j]));
      }
      double b = con.rhs - shift;
      if (scale == 0.0) {
        const bool ok = (con.relation == Relation::LessEqual && b >= -opts_.feasibility_tol) ||
                        (con.relation == Relation::GreaterEqual && b <= opts_.feasibility_tol) ||
                        (con.relation == Relation::Equal && std::abs(b) <= opts_.feasibility_tol);
        if (!ok) trivially_infeasible_ = true;
        continue;
      }
      Row row{std::vector<double>(n), b / scale, con.relation, scale};
      for (std::size_t j = 0; j < n; ++j) row.a[j] = con.coeffs[j] / scale;
      kept.push_back(std::move(row));
    }

    rows_ = kept.size();
    std::size_t num_slack = 0;
    for (const auto& row : kept) num_slack += row.rel != Relation::Equal ? 1 : 0;

    // A row can start with its slack basic when the slack enters with +1
    // after the rhs sign is normalised.
    std::vector<char> needs_artificial(rows_, 0);
    num_artificial_ = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& row = kept[r];
      const bool flip = row.b < 0.0;
      const bool slack_positive = (row.rel == Relation::LessEqual && !flip) ||
                                  (row.rel == Relation::GreaterEqual && flip);
      if (!slack_positive) {
        needs_artificial[r] = 1;
        ++num_artificial_;
      }
    }

    first_slack_ = n;
    first_artificial_ = n + num_slack;
    cols_ = first_artificial_ + num_artificial_;
    tab_ = RowMajor::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    value_.assign(rows_, 0.0);
    basis_.assign(rows_, 0);
    upper_.assign(cols_, kInf);
    at_upper_.assign(cols_, 0);
    is_basic_.assign(cols_, 0);

    for (std::size_t j = 0; j < n; ++j) upper_[j] = lp_.upper_bounds[j] - lp_.lower_bounds[j];

    std::size_t slack = first_slack_;
    std::size_t art = first_artificial_;
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& row = kept[r];
      const double sign = row.b < 0.0 ? -1.0 : 1.0;
      const auto ri = static_cast<Eigen::Index>(r);
      for (std::size_t j = 0; j < n; ++j) tab_(ri, static_cast<Eigen::Index>(j)) = sign * row.a[j];
      value_[r] = sign * row.b;
      std::size_t slack_col = cols_;
      if (row.rel != Relation::Equal) {
        slack_col = slack++;
        const double coef = row.rel == Relation::LessEqual ? 1.0 : -1.0;
        tab_(ri, static_cast<Eigen::Index>(slack_col)) = sign * coef;
      }
      if (needs_artificial[r]) {
        tab_(ri, static_cast<Eigen::Index>(art)) = 1.0;
        basis_[r] = art++;
      } else {
        basis_[r] = slack_col;
      }
      is_basic_[basis_[r]] = 1;
    }
    cost_.assign(cols_, 0.0);
    reduced_.assign(cols_, 0.0);
  }

  void set_phase_one_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = first_artificial_; j < cols_; ++j) cost_[j] = -1.0;
    price();
  }

  void set_phase_two_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = 0; j < lp_.num_vars; ++j) cost_[j] = lp_.objective[j];
    price();
  }

  // reduced_j = cost_j - cost_B . T_j
  void price() {
    Eigen::Map<Eigen::RowVectorXd> d(reduced_.data(), static_cast<Eigen::Index>(cols_));
    for (std::size_t j = 0; j < cols_; ++j) d(static_cast<Eigen::Index>(j)) = cost_[j];
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = cost_[basis_[r]];
      if (cb != 0.0) d -= cb * tab_.row(static_cast<Eigen::Index>(r));
    }
    for (std::size_t r = 0; r < rows_; ++r) reduced_[basis_[r]] = 0.0;
  }

  // Artificials may not re-enter; basic ones stay pinned at zero.
  void retire_artificials() {
    for (std::size_t j = first_artificial_; j < cols_; ++j) {
      upper_[j] = 0.0;
      at_upper_[j] = 0;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (is_artificial(basis_[r])) value_[r] = 0.0;
    }
  }

  [[nodiscard]] double objective_now() const {
    double z = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) z += cost_[basis_[r]] * value_[r];
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!is_basic_[j] && at_upper_[j]) z += cost_[j] * upper_[j];
    }
    return z;
  }

  // Returns false when Phase 2 detects an unbounded ray.
  bool run(bool phase_one, std::size_t& iterations) {
    const std::size_t stall_limit = 3 * (rows_ + cols_);
    const std::size_t cap = opts_.max_iterations ? opts_.max_iterations : 50 * (rows_ + cols_) + 1000;
    const std::size_t last_candidate = phase_one ? cols_ : first_artificial_;
    bool bland = false;
    std::size_t stalled = 0;
    double best_objective = objective_now();

    for (std::size_t iter = 0;; ++iter) {
      if (iter >= cap) {
        throw SolverError("simplex: iteration cap reached (" + std::to_string(cap) + ")");
      }
      // Pricing: Dantzig with exact ties going to the highest column index,
      // or Bland's smallest index once stalled.
      std::size_t enter = cols_;
      double best_gain = opts_.optimality_tol;
      for (std::size_t j = 0; j < last_candidate; ++j) {
        if (is_basic_[j] || upper_[j] <= 0.0) continue;
        const double gain = at_upper_[j] ? -reduced_[j] : reduced_[j];
        if (gain > best_gain || (!bland && enter != cols_ && gain == best_gain)) {
          enter = j;
          if (bland) break;
          best_gain = gain;
        }
      }
      if (enter == cols_) return true;

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      const auto q = static_cast<Eigen::Index>(enter);

      // Ratio test. Ties: smallest row, or smallest basic index under Bland.
      std::size_t leave_row = rows_;
      double theta = kInf;
      bool leave_to_upper = false;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double alpha = dir * tab_(static_cast<Eigen::Index>(r), q);
        double limit = kInf;
        bool to_upper = false;
        if (alpha > opts_.pivot_tol) {
          limit = std::max(0.0, value_[r]) / alpha;
        } else if (alpha < -opts_.pivot_tol && upper_[basis_[r]] < kInf) {
          limit = std::max(0.0, upper_[basis_[r]] - value_[r]) / -alpha;
          to_upper = true;
        } else {
          continue;
        }
        if (leave_row == rows_) {
          theta = limit;
          leave_row = r;
          leave_to_upper = to_upper;
          continue;
        }
        const double tie = 1e-12 * (1.0 + theta);
        if (limit < theta - tie ||
            (bland && std::abs(limit - theta) <= tie && basis_[r] < basis_[leave_row])) {
          theta = limit;
          leave_row = r;
          leave_to_upper = to_upper;
        }
      }

      const bool flip = upper_[enter] < kInf && upper_[enter] <= theta;
      if (flip) theta = upper_[enter];
      if (theta == kInf) {
        if (phase_one) throw SolverError("simplex: phase one reported an unbounded ray");
        return false;
      }

      for (std::size_t r = 0; r < rows_; ++r) {
        value_[r] -= dir * theta * tab_(static_cast<Eigen::Index>(r), q);
      }
      ++iterations;

      if (flip) {
        at_upper_[enter] = at_upper_[enter] ? 0 : 1;
      } else {
        const double entering_value = (at_upper_[enter] ? upper_[enter] : 0.0) + dir * theta;
        const std::size_t leaving = basis_[leave_row];
        pivot(leave_row, enter);
        is_basic_[leaving] = 0;
        at_upper_[leaving] = leave_to_upper ? 1 : 0;
        is_basic_[enter] = 1;
        at_upper_[enter] = 0;
        basis_[leave_row] = enter;
        value_[leave_row] = entering_value;
      }
      if (opts_.trace) dump_tableau(*opts_.trace);

      const double z = objective_now();
      if (z > best_objective + 1e-12 * (1.0 + std::abs(best_objective))) {
        best_objective = z;
        stalled = 0;
      } else if (++stalled >= stall_limit) {
        bland = true;
      }
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    const double piv = tab_(r, c);
    if (std::abs(piv) < opts_.pivot_tol) {
      throw SolverError("simplex: pivot element below tolerance, numerically unstable");
    }
    tab_.row(r) /= piv;
    tab_(r, c) = 1.0;
    for (Eigen::Index i = 0; i < tab_.rows(); ++i) {
      if (i == r) continue;
      const double f = tab_(i, c);
      if (f != 0.0) {
        tab_.row(i) -= f * tab_.row(r);
        tab_(i, c) = 0.0;
      }
    }
    const double dq = reduced_[col];
    if (dq != 0.0) {
      Eigen::Map<Eigen::RowVectorXd> d(reduced_.data(), static_cast<Eigen::Index>(cols_));
      d -= dq * tab_.row(r);
      reduced_[col] = 0.0;
    }
  }

  LpSolution& extract(LpSolution& sol) {
    sol.status = status_;
    if (status_ != LpStatus::Optimal) return sol;
    const std::size_t n = lp_.num_vars;
    std::vector<double> shifted(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!is_basic_[j] && at_upper_[j]) shifted[j] = upper_[j];
    }
    for (std::size_t r = 0; r < rows_; ++r) shifted[basis_[r]] = value_[r];
    sol.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double v = lp_.lower_bounds[j] + shifted[j];
      v = std::clamp(v, lp_.lower_bounds[j], lp_.upper_bounds[j]);
      sol.x[j] = v;
    }
    sol.objective_value = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective_value += lp_.objective[j] * sol.x[j];
    const double violation = max_violation(lp_, sol.x);
    if (violation > opts_.feasibility_tol) {
      throw SolverError("simplex: reported optimum violates constraints by " + std::to_string(violation));
    }
    return sol;
  }

  LinearProgram lp_;
  SimplexOptions opts_;
  bool trivially_infeasible_ = false;
  LpStatus status_ = LpStatus::Infeasible;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_slack_ = 0;
  std::size_t first_artificial_ = 0;
  std::size_t num_artificial_ = 0;
  RowMajor tab_;
  std::vector<double> value_;       // value of the basic variable in each row
  std::vector<std::size_t> basis_;  // basic column per row
  std::vector<double> upper_;       // shifted upper bound per column
  std::vector<char> at_upper_;      // nonbasic column resting at its upper bound
  std::vector<char> is_basic_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
};

inline LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {}) {
  return SimplexSolver(lp, opts).solve();
}

}  // namespace bailout

#endif  // BAILOUT_LP_HPP
