#ifndef BAILOUT_BAILOUT_HPP
#define BAILOUT_BAILOUT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bailout/clearing.hpp"
#include "bailout/lp.hpp"
#include "bailout/network.hpp"

namespace bailout {

struct ReweightParams {
  double k_const = 1000.0;
  double epsilon = 0.001;
  double delta = 0.001;
  std::size_t max_iterations = 50;
  std::size_t num_random_starts = 5;
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;  // starts run concurrently when > 1
};

inline void validate(const ReweightParams& params) {
  if (!(params.k_const > 0.0) || !std::isfinite(params.k_const)) throw ValidationError("K must be positive");
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) throw ValidationError("epsilon must be positive");
  if (!(params.delta > 0.0) || !std::isfinite(params.delta)) throw ValidationError("delta must be positive");
  if (params.max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
}

struct IterationRecord {
  std::size_t start = 0;
  std::size_t iteration = 0;
  std::size_t n_defaults = 0;
  double unpaid_total = 0.0;
  double weight_change = 0.0;  // l1 distance between successive weight vectors
};

struct StartSummary {
  std::size_t start = 0;  // 0 is the all-ones start
  bool succeeded = false;
  std::size_t n_defaults = 0;
  double unpaid_total = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string message;
};

struct OptimizationResult {
  Allocation allocation;
  ClearingOutcome outcome;
  double budget = 0.0;  // chosen C* for the Lagrangian variant, else the given budget
  double lp_objective = 0.0;
  std::size_t lp_iterations = 0;
  std::vector<IterationRecord> objective_trace;
  std::vector<StartSummary> starts_summary;
  std::optional<std::size_t> selected_start;
};

/// Variable layout shared by the bailout LPs: injections first, then payments.
struct BailoutLayout {
  std::size_t n = 0;
  [[nodiscard]] std::size_t c(std::size_t i) const { return i; }
  [[nodiscard]] std::size_t p(std::size_t i) const { return n + i; }
  [[nodiscard]] std::size_t budget() const { return 2 * n; }  // Lagrangian only
};

namespace detail {

inline void check_budget(double budget) {
  if (!std::isfinite(budget) || budget < 0.0) throw ValidationError("budget must be a non-negative number");
}

// Rows p_i - sum_j pi_ji p_j - c_i <= e_i, plus payment bounds.
inline void add_flow_rows(LinearProgram& lp, const BailoutLayout& lay, const RelativeLiabilities& rel,
                          const Vector& cash) {
  const std::size_t n = lay.n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      row[lay.p(j)] -= rel.pi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
    row[lay.p(i)] += 1.0;
    row[lay.c(i)] = -1.0;
    lp.add_constraint(std::move(row), Relation::LessEqual, cash(static_cast<Eigen::Index>(i)));
    lp.upper_bounds[lay.p(i)] = rel.pbar(static_cast<Eigen::Index>(i));
  }
}

inline Allocation allocation_from(const std::vector<double>& x, const BailoutLayout& lay) {
  Vector c(static_cast<Eigen::Index>(lay.n));
  for (std::size_t i = 0; i < lay.n; ++i) c(static_cast<Eigen::Index>(i)) = std::max(0.0, x[lay.c(i)]);
  return Allocation(std::move(c));
}

}  // namespace detail

/// LP whose optimum allocates `budget` to maximise weighted payments.
/// Variables are (c, p); `weights` defaults to all ones.
inline LinearProgram build_problem1_lp(const LiabilityNetwork& net, double budget,
                                       const Vector* weights = nullptr) {
  detail::check_budget(budget);
  const auto rel = relative_liabilities(net);
  const BailoutLayout lay{net.size()};
  LinearProgram lp(2 * lay.n);
  for (std::size_t i = 0; i < lay.n; ++i) {
    lp.objective[lay.p(i)] = weights ? (*weights)(static_cast<Eigen::Index>(i)) : 1.0;
  }
  std::vector<double> total(lp.num_vars, 0.0);
  for (std::size_t i = 0; i < lay.n; ++i) total[lay.c(i)] = 1.0;
  lp.add_constraint(std::move(total), Relation::Equal, budget);
  detail::add_flow_rows(lp, lay, rel, net.cash);
  return lp;
}

/// Problem I LP with the injection pinned to `alloc`; its p-part is the
/// clearing vector for that injection.
inline LinearProgram build_fixed_injection_lp(const LiabilityNetwork& net, const Allocation& alloc) {
  validate(alloc, net.size());
  auto lp = build_problem1_lp(net, alloc.c.sum());
  for (std::size_t i = 0; i < net.size(); ++i) {
    lp.lower_bounds[i] = alloc.c(static_cast<Eigen::Index>(i));
    lp.upper_bounds[i] = alloc.c(static_cast<Eigen::Index>(i));
  }
  return lp;
}

/// Minimises total unpaid liabilities for a fixed budget.
///
/// The reported outcome is recomputed by the clearing routine from the LP's
/// injection, not read from the LP's payment variables.
inline OptimizationResult solve_problem1(const LiabilityNetwork& net, double budget) {
  validate(net);
  auto lp = build_problem1_lp(net, budget);
  const auto sol = solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("problem I LP returned ") + to_string(sol.status));
  }
  const BailoutLayout lay{net.size()};
  OptimizationResult res;
  res.allocation = detail::allocation_from(sol.x, lay);
  res.outcome = clearing_vector(net, res.allocation);
  res.budget = budget;
  res.lp_objective = sol.objective_value;
  res.lp_iterations = sol.iterations;
  return res;
}

inline LinearProgram build_lagrangian_lp(const LiabilityNetwork& net, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ValidationError("lambda must be a non-negative number");
  const auto rel = relative_liabilities(net);
  const BailoutLayout lay{net.size()};
  LinearProgram lp(2 * lay.n + 1);
  for (std::size_t i = 0; i < lay.n; ++i) lp.objective[lay.p(i)] = lambda;
  lp.objective[lay.budget()] = -1.0;
  std::vector<double> tie(lp.num_vars, 0.0);
  for (std::size_t i = 0; i < lay.n; ++i) tie[lay.c(i)] = 1.0;
  tie[lay.budget()] = -1.0;
  lp.add_constraint(std::move(tie), Relation::Equal, 0.0);
  detail::add_flow_rows(lp, lay, rel, net.cash);
  return lp;
}

/// Chooses both the budget C and its allocation to minimise C + lambda * D.
inline OptimizationResult solve_lagrangian(const LiabilityNetwork& net, double lambda) {
  validate(net);
  const auto lp = build_lagrangian_lp(net, lambda);
  const auto sol = solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("lagrangian LP returned ") + to_string(sol.status));
  }
  const BailoutLayout lay{net.size()};
  OptimizationResult res;
  res.allocation = detail::allocation_from(sol.x, lay);
  res.budget = res.allocation.total;
  res.outcome = clearing_vector(net, res.allocation);
  res.lp_objective = sol.objective_value;
  res.lp_iterations = sol.iterations;
  return res;
}

/// w_i = K / (exp(pbar_i - p_i) + epsilon), floored at the smallest normal
/// double so every weight stays strictly positive.
inline Vector reweight_update(const Vector& pbar, const Vector& p, double k_const, double epsilon) {
  if (pbar.size() != p.size()) throw ValidationError("reweight: length mismatch");
  if (!(k_const > 0.0) || !(epsilon > 0.0)) throw ValidationError("reweight: K and epsilon must be positive");
  Vector w(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double shortfall = std::max(0.0, pbar(i) - p(i));
    const double v = k_const / (std::exp(shortfall) + epsilon);
    w(i) = std::max(v, std::numeric_limits<double>::min());
  }
  return w;
}

/// Initial weight vectors: all ones, then `num_random_starts` draws uniform on (0.1, 10].
inline std::vector<Vector> initial_weights(std::size_t n, const ReweightParams& params) {
  std::vector<Vector> starts;
  starts.emplace_back(Vector::Ones(static_cast<Eigen::Index>(n)));
  std::mt19937_64 rng(params.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 9.9);
  for (std::size_t s = 0; s < params.num_random_starts; ++s) {
    Vector w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 10.0 - unit(rng);
    starts.push_back(std::move(w));
  }
  return starts;
}

namespace detail {

struct StartRun {
  StartSummary summary;
  Allocation allocation;
  ClearingOutcome outcome;
  std::vector<IterationRecord> trace;
  double lp_objective = 0.0;
  std::size_t lp_iterations = 0;
};

inline StartRun run_reweighted_start(const LiabilityNetwork& net, const LinearProgram& base,
                                     const RelativeLiabilities& rel, Vector weights,
                                     const ReweightParams& params, std::size_t start) {
  const BailoutLayout lay{net.size()};
  StartRun run;
  run.summary.start = start;
  auto objective_for = [&](const Vector& w) {
    std::vector<double> obj(base.num_vars, 0.0);
    for (std::size_t i = 0; i < lay.n; ++i) obj[lay.p(i)] = w(static_cast<Eigen::Index>(i));
    return obj;
  };
  LinearProgram lp = base;
  for (std::size_t m = 0; m < params.max_iterations; ++m) {
    // Every weighted LP is solved from scratch rather than warm-started from
    // the previous basis; the previous optimum is usually still optimal and
    // a warm start would never leave it.
    lp.objective = objective_for(weights);
    const auto sol = solve(lp);
    if (sol.status != LpStatus::Optimal) {
      throw SolverError(std::string("weighted LP returned ") + to_string(sol.status));
    }
    run.lp_iterations += sol.iterations;
    run.lp_objective = sol.objective_value;
    run.allocation = allocation_from(sol.x, lay);
    run.outcome = clearing_vector(rel, net.cash + run.allocation.c);
    Vector next = reweight_update(rel.pbar, run.outcome.p, params.k_const, params.epsilon);
    const double change = (next - weights).cwiseAbs().sum();
    run.trace.push_back({start, m, run.outcome.n_defaults, run.outcome.unpaid_total, change});
    run.summary.iterations = m + 1;
    weights = std::move(next);
    if (change < params.delta) {
      run.summary.converged = true;
      break;
    }
  }
  run.summary.succeeded = true;
  run.summary.n_defaults = run.outcome.n_defaults;
  run.summary.unpaid_total = run.outcome.unpaid_total;
  return run;
}

}  // namespace detail

using WarningSink = std::function<void(const std::string&)>;

inline void default_warning_sink(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Approximately minimises the number of defaulting nodes for a fixed budget
/// by iteratively reweighted LPs from several starting weight vectors.
///
/// Each start alternates a weighted Problem I LP with the weight update until
/// the l1 change in weights drops below delta or max_iterations is reached.
/// The start with the fewest defaults wins; ties go to smaller unpaid total,
/// then to the earlier start. A start that fails numerically is skipped.
inline OptimizationResult solve_problem2(const LiabilityNetwork& net, double budget,
                                         const ReweightParams& params,
                                         const WarningSink& warn = default_warning_sink) {
  validate(net);
  validate(params);
  const auto base = build_problem1_lp(net, budget);
  const auto rel = relative_liabilities(net);
  auto starts = initial_weights(net.size(), params);

  std::vector<std::optional<detail::StartRun>> runs(starts.size());
  std::vector<std::string> failures(starts.size());
  auto attempt = [&](std::size_t s) {
    try {
      runs[s] = detail::run_reweighted_start(net, base, rel, starts[s], params, s);
    } catch (const SolverError& e) {
      failures[s] = e.what();
    }
  };
  if (params.threads > 1) {
    for (std::size_t lo = 0; lo < starts.size(); lo += params.threads) {
      std::vector<std::future<void>> batch;
      for (std::size_t s = lo; s < std::min(starts.size(), lo + params.threads); ++s) {
        batch.push_back(std::async(std::launch::async, attempt, s));
      }
      for (auto& f : batch) f.get();
    }
  } else {
    for (std::size_t s = 0; s < starts.size(); ++s) attempt(s);
  }

  OptimizationResult res;
  res.budget = budget;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!runs[s]) {
      StartSummary failed;
      failed.start = s;
      failed.message = failures[s];
      res.starts_summary.push_back(failed);
      warn("start " + std::to_string(s) + " skipped: " + failures[s]);
      continue;
    }
    const auto& run = *runs[s];
    res.starts_summary.push_back(run.summary);
    res.objective_trace.insert(res.objective_trace.end(), run.trace.begin(), run.trace.end());
    const bool better =
        !res.selected_start || run.outcome.n_defaults < res.outcome.n_defaults ||
        (run.outcome.n_defaults == res.outcome.n_defaults && run.outcome.unpaid_total < res.outcome.unpaid_total);
    if (better) {
      res.selected_start = s;
      res.allocation = run.allocation;
      res.outcome = run.outcome;
      res.lp_objective = run.lp_objective;
    }
    res.lp_iterations += run.lp_iterations;
  }
  if (!res.selected_start) {
    throw SolverError("problem II: every start failed (" + failures.front() + ")");
  }
  return res;
}

}  // namespace bailout

#endif  // BAILOUT_BAILOUT_HPP
