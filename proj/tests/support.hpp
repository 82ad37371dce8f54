#ifndef BAILOUT_TESTS_SUPPORT_HPP
#define BAILOUT_TESTS_SUPPORT_HPP

// Random instance generators and brute-force references shared by the unit
// tests and the acceptance binary.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "bailout/bailout.hpp"
#include "bailout/clearing.hpp"
#include "bailout/lp.hpp"

namespace testsupport {

using bailout::Allocation;
using bailout::LiabilityNetwork;
using bailout::LinearProgram;
using bailout::Matrix;
using bailout::Relation;
using bailout::Vector;

struct NetworkShape {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 20;
  double edge_probability = 0.4;
  double max_amount = 10.0;
  double max_cash = 5.0;
  double zero_cash_probability = 0.3;
};

inline LiabilityNetwork random_network(std::mt19937_64& rng, const NetworkShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> size(shape.min_nodes, shape.max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(size(rng));
  Matrix l = Matrix::Zero(n, n);
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e(i) = unit(rng) < shape.zero_cash_probability ? 0.0 : shape.max_cash * unit(rng);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && unit(rng) < shape.edge_probability) l(i, j) = shape.max_amount * unit(rng);
    }
  }
  return LiabilityNetwork(std::move(l), std::move(e));
}

inline Allocation random_allocation(std::mt19937_64& rng, std::size_t n, double max_each = 3.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector c(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = unit(rng) < 0.5 ? 0.0 : max_each * unit(rng);
  return Allocation(std::move(c));
}

/// Greatest clearing vector by Picard iteration from pbar.
inline Vector picard_clearing(const LiabilityNetwork& net, const Allocation& alloc) {
  const auto rel = bailout::relative_liabilities(net);
  const auto res = bailout::picard_iteration(rel, net.cash + alloc.c, rel.pbar, 1e-13, 10'000'000);
  return res.p;
}

/// Clearing vector read off the LP with the injection pinned.
inline Vector lp_clearing(const LiabilityNetwork& net, const Allocation& alloc) {
  const auto lp = bailout::build_fixed_injection_lp(net, alloc);
  const auto sol = bailout::solve(lp);
  if (sol.status != bailout::LpStatus::Optimal) return Vector();
  const auto n = static_cast<Eigen::Index>(net.size());
  Vector p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = sol.x[static_cast<std::size_t>(n + i)];
  return p;
}

/// Small random LP with a mix of relations, bounds and objective signs. Some
/// instances are infeasible or unbounded by construction of the data.
inline LinearProgram random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> vars(1, 5);
  std::uniform_int_distribution<std::size_t> rows(1, 6);
  std::uniform_int_distribution<int> coef(-4, 6);
  std::uniform_int_distribution<int> rel(0, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearProgram lp(vars(rng));
  for (auto& c : lp.objective) c = coef(rng);
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    if (unit(rng) < 0.3) lp.upper_bounds[j] = 1.0 + std::floor(8.0 * unit(rng));
    if (unit(rng) < 0.1) lp.lower_bounds[j] = std::floor(2.0 * unit(rng));
  }
  const std::size_t m = rows(rng);
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<double> a(lp.num_vars);
    for (auto& v : a) v = coef(rng);
    const int pick = rel(rng);
    const auto relation = pick < 3 ? Relation::LessEqual : (pick < 5 ? Relation::GreaterEqual : Relation::Equal);
    const double rhs = std::floor(20.0 * unit(rng)) - 4.0;
    lp.add_constraint(std::move(a), relation, rhs);
  }
  return lp;
}

/// Calls `visit` on every vector of `parts` non-negative integers summing to `total`.
inline void for_each_composition(std::size_t parts, int total, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> k(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int left) {
    if (idx + 1 == parts) {
      k[idx] = left;
      visit(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  rec(0, total);
}

struct GridSearchResult {
  double unpaid = std::numeric_limits<double>::infinity();
  Vector c;
};

/// Minimum unpaid total over allocations on the lattice step = budget / steps.
inline GridSearchResult grid_search_unpaid(const LiabilityNetwork& net, double budget, int steps = 20) {
  GridSearchResult best;
  const double step = budget / steps;
  for_each_composition(net.size(), steps, [&](const std::vector<int>& k) {
    Vector c(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i) c(static_cast<Eigen::Index>(i)) = step * k[i];
    const auto out = bailout::clearing_vector(net, Allocation(c));
    if (out.unpaid_total < best.unpaid) {
      best.unpaid = out.unpaid_total;
      best.c = c;
    }
  });
  return best;
}

}  // namespace testsupport

#endif  // BAILOUT_TESTS_SUPPORT_HPP
