#ifndef BAILOUT_LP_ORACLE_HPP
#define BAILOUT_LP_ORACLE_HPP

// Brute-force vertex enumeration for tiny LPs. Used as a test oracle for the
// simplex kernel; it shares no code with it beyond the LinearProgram type.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "bailout/lp.hpp"

namespace bailout {

struct VertexOracleResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
};

namespace detail {

struct HalfSpace {
  Eigen::VectorXd a;
  double b = 0.0;
  bool equality = false;  // a.x = b, otherwise a.x <= b
  bool box = false;       // artificial bounding-box face
};

inline std::vector<HalfSpace> oracle_faces(const LinearProgram& lp, double box) {
  const auto n = static_cast<Eigen::Index>(lp.num_vars);
  std::vector<HalfSpace> faces;
  for (const auto& con : lp.constraints) {
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(con.coeffs.data(), n);
    switch (con.relation) {
      case Relation::LessEqual: faces.push_back({a, con.rhs, false, false}); break;
      case Relation::GreaterEqual: faces.push_back({-a, -con.rhs, false, false}); break;
      case Relation::Equal: faces.push_back({a, con.rhs, true, false}); break;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
    const auto uj = static_cast<std::size_t>(j);
    faces.push_back({-e, -lp.lower_bounds[uj], false, false});
    if (std::isfinite(lp.upper_bounds[uj])) {
      faces.push_back({e, lp.upper_bounds[uj], false, false});
    } else {
      faces.push_back({e, lp.lower_bounds[uj] + box, false, true});
    }
  }
  return faces;
}

struct BestVertex {
  bool found = false;
  double value = -std::numeric_limits<double>::infinity();
};

inline BestVertex best_vertex(const LinearProgram& lp, double box, double tol) {
  const auto faces = oracle_faces(lp, box);
  const auto n = static_cast<Eigen::Index>(lp.num_vars);
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(lp.objective.data(), n);
  std::vector<std::size_t> equalities;
  std::vector<std::size_t> inequalities;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    (faces[k].equality ? equalities : inequalities).push_back(k);
  }
  BestVertex best;
  if (equalities.size() > lp.num_vars) {
    // Overdetermined equalities: fall back to choosing n of them as well.
    inequalities.insert(inequalities.end(), equalities.begin(), equalities.end());
    equalities.clear();
  }
  const std::size_t need = lp.num_vars - equalities.size();
  std::vector<std::size_t> chosen;

  auto evaluate = [&]() {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    Eigen::Index row = 0;
    for (auto k : equalities) { a.row(row) = faces[k].a.transpose(); b(row++) = faces[k].b; }
    for (auto k : chosen) { a.row(row) = faces[k].a.transpose(); b(row++) = faces[k].b; }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n) return;
    const Eigen::VectorXd x = lu.solve(b);
    for (const auto& f : faces) {
      const double lhs = f.a.dot(x);
      const double scale = std::max(1.0, std::abs(f.b));
      if (f.equality ? std::abs(lhs - f.b) > tol * scale : lhs > f.b + tol * scale) return;
    }
    const double v = c.dot(x);
    if (!best.found || v > best.value) {
      best.found = true;
      best.value = v;
    }
  };

  std::function<void(std::size_t)> recurse = [&](std::size_t start) {
    if (chosen.size() == need) {
      evaluate();
      return;
    }
    for (std::size_t k = start; k + (need - chosen.size()) <= inequalities.size(); ++k) {
      chosen.push_back(inequalities[k]);
      recurse(k + 1);
      chosen.pop_back();
    }
  };
  recurse(0);
  return best;
}

}  // namespace detail

/// Best feasible vertex objective by exhaustive basis enumeration.
///
/// Unbounded variables get a large artificial box; if the optimum grows when
/// the box is doubled, the LP is reported unbounded.
inline VertexOracleResult enumerate_vertices_oracle(const LinearProgram& lp) {
  validate(lp);
  if (lp.num_vars > 8 || lp.constraints.size() > 12) {
    throw ValidationError("vertex oracle limited to 8 variables and 12 constraints");
  }
  constexpr double kBox = 1e6;
  constexpr double kTol = 1e-9;
  const auto first = detail::best_vertex(lp, kBox, kTol);
  VertexOracleResult res;
  if (!first.found) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  const auto second = detail::best_vertex(lp, 2.0 * kBox, kTol);
  if (second.value > first.value + 1e-6 * std::max(1.0, std::abs(first.value))) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.value = first.value;
  return res;
}

}  // namespace bailout

#endif  // BAILOUT_LP_ORACLE_HPP
