#ifndef BAILOUT_TREE_HPP
#define BAILOUT_TREE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bailout/bailout.hpp"
#include "bailout/network.hpp"

namespace bailout {

/// Full binary tree with `levels` levels, root at level 0.
struct TreeSpec {
  int levels = 10;

  [[nodiscard]] std::size_t node_count() const { return (std::size_t{1} << levels) - 1; }
  [[nodiscard]] std::size_t non_leaf_count() const { return (std::size_t{1} << (levels - 1)) - 1; }
};

inline void validate(const TreeSpec& spec) {
  if (spec.levels < 2) throw ValidationError("tree needs at least 2 levels");
  if (spec.levels > 24) throw ValidationError("tree deeper than 24 levels is not supported");
}

/// Breadth-first index helpers: node k has children 2k+1 and 2k+2.
inline int tree_level(std::size_t node) {
  int s = 0;
  for (std::size_t k = node + 1; k > 1; k >>= 1) ++s;
  return s;
}

inline std::size_t first_node_at_level(int level) { return (std::size_t{1} << level) - 1; }

/// Every node at level s < T-1 owes 2^(T-s) to each of its two children.
/// Nobody holds cash and the leaves owe nothing.
inline LiabilityNetwork binary_tree_network(const TreeSpec& spec) {
  validate(spec);
  const std::size_t n = spec.node_count();
  std::vector<Edge> edges;
  edges.reserve(2 * spec.non_leaf_count());
  for (std::size_t k = 0; k < spec.non_leaf_count(); ++k) {
    const double owed = std::ldexp(1.0, spec.levels - tree_level(k));
    edges.push_back({k, 2 * k + 1, owed});
    edges.push_back({k, 2 * k + 2, owed});
  }
  std::vector<std::string> labels(n);
  for (std::size_t k = 0; k < n; ++k) labels[k] = "n" + std::to_string(k);
  return from_edges(Vector::Zero(static_cast<Eigen::Index>(n)), edges, std::move(labels));
}

/// Minimum achievable default count on a T-level tree for budget C:
/// (2^(T-1) - 1) - sum_{u>=3} b(u) (2^(u-2) - 1), b(u) the coefficient of 2^u
/// in C. A budget of 2^u at one level-(T+1-u) node rescues that node's
/// 2^(u-2) - 1 non-leaf subtree nodes. Budgets of 2^(T+1) or more rescue all.
///
/// Depths other than 10 follow from the same subtree argument.
inline std::size_t optimal_tree_defaults_generalized(double budget, const TreeSpec& spec) {
  validate(spec);
  if (!std::isfinite(budget) || budget < 0.0) throw ValidationError("budget must be a non-negative number");
  const std::size_t all = spec.non_leaf_count();
  if (budget >= std::ldexp(1.0, spec.levels + 1)) return 0;
  const auto whole = static_cast<std::uint64_t>(std::floor(budget));
  std::size_t saved = 0;
  for (int u = 3; u <= spec.levels + 1; ++u) {
    if ((whole >> u) & 1U) saved += (std::size_t{1} << (u - 2)) - 1;
  }
  return all - std::min(all, saved);
}

/// The 10-level closed form: 511 - sum_{u=3}^{U} b(u) (2^(u-2) - 1).
inline std::size_t optimal_tree_defaults(double budget) {
  return optimal_tree_defaults_generalized(budget, TreeSpec{10});
}

struct FigureRow {
  double budget = 0.0;
  std::size_t optimal_defaults = 0;
  std::size_t algorithm_defaults = 0;
  double algorithm_unpaid = 0.0;
  double wall_time_ms = 0.0;
  std::string error;  // non-empty when the optimiser failed at this point
};

/// Runs the reweighted optimiser at every budget and pairs it with the
/// closed-form optimum. Rows come back sorted by budget.
inline std::vector<FigureRow> reproduce_figure(const TreeSpec& spec, std::vector<double> grid,
                                               const ReweightParams& params, std::size_t threads = 1) {
  validate(spec);
  validate(params);
  std::sort(grid.begin(), grid.end());
  for (double c : grid) {
    if (!std::isfinite(c) || c < 0.0) throw ValidationError("grid budgets must be non-negative numbers");
  }
  const auto net = binary_tree_network(spec);
  std::vector<FigureRow> rows(grid.size());
  auto evaluate = [&](std::size_t k) {
    FigureRow& row = rows[k];
    row.budget = grid[k];
    row.optimal_defaults = optimal_tree_defaults_generalized(grid[k], spec);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto res = solve_problem2(net, grid[k], params, [](const std::string&) {});
      row.algorithm_defaults = res.outcome.n_defaults;
      row.algorithm_unpaid = res.outcome.unpaid_total;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  if (threads > 1) {
    for (std::size_t lo = 0; lo < grid.size(); lo += threads) {
      std::vector<std::future<void>> batch;
      for (std::size_t k = lo; k < std::min(grid.size(), lo + threads); ++k) {
        batch.push_back(std::async(std::launch::async, evaluate, k));
      }
      for (auto& f : batch) f.get();
    }
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k) evaluate(k);
  }
  return rows;
}

inline void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
  os << "budget,optimal_defaults,algorithm_defaults,algorithm_unpaid,wall_time_ms\n";
  for (const auto& r : rows) {
    os << r.budget << ',' << r.optimal_defaults << ',';
    if (r.error.empty()) {
      os << r.algorithm_defaults << ',' << std::fixed << std::setprecision(6) << r.algorithm_unpaid;
    } else {
      os << ",";
    }
    os << ',' << std::fixed << std::setprecision(3) << r.wall_time_ms << '\n';
    os << std::defaultfloat;
  }
}

/// Two-series line chart: closed-form optimum and algorithm, defaults vs budget.
inline void write_figure_svg(std::ostream& os, const std::vector<FigureRow>& rows) {
  constexpr double width = 640, height = 400, margin = 50;
  double max_budget = 1.0;
  double max_defaults = 1.0;
  for (const auto& r : rows) {
    max_budget = std::max(max_budget, r.budget);
    max_defaults = std::max({max_defaults, static_cast<double>(r.optimal_defaults),
                             static_cast<double>(r.algorithm_defaults)});
  }
  auto x = [&](double b) { return margin + (width - 2 * margin) * b / max_budget; };
  auto y = [&](double d) { return height - margin - (height - 2 * margin) * d / max_defaults; };
  auto series = [&](bool algorithm) {
    std::ostringstream pts;
    pts << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
      if (algorithm && !r.error.empty()) continue;
      const double d = static_cast<double>(algorithm ? r.algorithm_defaults : r.optimal_defaults);
      pts << x(r.budget) << ',' << y(d) << ' ';
    }
    return pts.str();
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
     << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">budget C (max "
     << max_budget << ")</text>\n"
     << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
     << ")\" text-anchor=\"middle\">defaults N_d (max " << max_defaults << ")</text>\n"
     << "<polyline fill=\"none\" stroke=\"green\" stroke-width=\"2\" points=\"" << series(false) << "\"/>\n"
     << "<polyline fill=\"none\" stroke=\"blue\" stroke-width=\"2\" stroke-dasharray=\"4 2\" points=\""
     << series(true) << "\"/>\n"
     << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin << "\" fill=\"green\">optimal</text>\n"
     << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 16 << "\" fill=\"blue\">reweighted l1</text>\n"
     << "</svg>\n";
}

}  // namespace bailout

#endif  // BAILOUT_TREE_HPP
