#ifndef BAILOUT_CLEARING_HPP
#define BAILOUT_CLEARING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bailout/network.hpp"

namespace bailout {

/// Shortfall above which a node counts as defaulting.
inline double default_tolerance(double pbar_i) { return 1e-6 * std::max(1.0, pbar_i); }

struct OutcomeMetrics {
  double unpaid_total = 0.0;
  std::vector<std::size_t> defaults;
  std::size_t n_defaults = 0;
};

struct ClearingOutcome {
  Vector p;  // payments actually made
  Vector q;  // received from borrowers
  Vector r;  // total funds q + e + c
  double unpaid_total = 0.0;
  std::vector<std::size_t> defaults;
  std::size_t n_defaults = 0;
  std::size_t rounds = 0;  // fictitious-default rounds used
};

/// D = sum(pbar - p) and the default set. Rejects p outside [0, pbar].
inline OutcomeMetrics outcome_metrics(const Vector& pbar, const Vector& p) {
  if (p.size() != pbar.size()) {
    throw ValidationError("payment vector length does not match network size");
  }
  OutcomeMetrics m;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double slack = 1e-9 * std::max(1.0, pbar(i));
    if (!std::isfinite(p(i)) || p(i) < -slack || p(i) > pbar(i) + slack) {
      throw ValidationError("payment at node " + std::to_string(i) + " outside [0, pbar]");
    }
    const double shortfall = pbar(i) - p(i);
    m.unpaid_total += std::max(0.0, shortfall);
    if (shortfall > default_tolerance(pbar(i))) {
      m.defaults.push_back(static_cast<std::size_t>(i));
    }
  }
  m.n_defaults = m.defaults.size();
  return m;
}

inline OutcomeMetrics outcome_metrics(const LiabilityNetwork& net, const Vector& p) {
  return outcome_metrics(Vector(net.liabilities.rowwise().sum()), p);
}

/// One application of p -> min(pbar, pi^T p + e + c).
inline Vector clearing_map(const RelativeLiabilities& rel, const Vector& external, const Vector& p) {
  Vector funds = rel.pi.transpose() * p + external;
  return funds.cwiseMin(rel.pbar).cwiseMax(0.0);
}

struct PicardResult {
  Vector p;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Iterates the clearing map from `start` until successive iterates differ by
/// less than `tol` in the sup norm.
inline PicardResult picard_iteration(const RelativeLiabilities& rel, const Vector& external,
                                     Vector start, double tol = 1e-10,
                                     std::size_t max_iterations = 1000000) {
  PicardResult res;
  res.p = std::move(start);
  const Matrix pit = rel.pi.transpose();
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    Vector next = (pit * res.p + external).cwiseMin(rel.pbar).cwiseMax(0.0);
    const double diff = (next - res.p).cwiseAbs().maxCoeff();
    res.p = std::move(next);
    if (diff < tol) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  return res;
}

namespace detail {

inline Vector external_funds(const LiabilityNetwork& net, const Allocation& alloc) {
  return net.cash + alloc.c;
}

inline ClearingOutcome finish_outcome(const RelativeLiabilities& rel, const Vector& external, Vector p,
                                      std::size_t rounds) {
  ClearingOutcome out;
  out.p = std::move(p);
  out.q = rel.pi.transpose() * out.p;
  out.r = out.q + external;
  auto m = outcome_metrics(rel.pbar, out.p);
  out.unpaid_total = m.unpaid_total;
  out.defaults = std::move(m.defaults);
  out.n_defaults = m.n_defaults;
  out.rounds = rounds;
  return out;
}

}  // namespace detail

/// Greatest clearing payment vector via fictitious default.
///
/// Starts from full payment and grows the default set one round at a time.
/// Each round holds solvent nodes at pbar and solves the pro-rata linear
/// system for the defaulting ones. The set only grows, so at most n rounds
/// are needed; anything more is reported as a SolverError.
inline ClearingOutcome clearing_vector(const RelativeLiabilities& rel, const Vector& external) {
  const auto n = rel.pbar.size();
  const Matrix pit = rel.pi.transpose();
  Vector p = rel.pbar;
  std::vector<char> in_default(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> members;

  for (std::size_t round = 0; round <= static_cast<std::size_t>(n) + 1; ++round) {
    const Vector funds = pit * p + external;
    bool grew = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!in_default[static_cast<std::size_t>(i)] &&
          funds(i) < rel.pbar(i) - 1e-12 * std::max(1.0, rel.pbar(i))) {
        in_default[static_cast<std::size_t>(i)] = 1;
        members.push_back(i);
        grew = true;
      }
    }
    if (!grew) {
      return detail::finish_outcome(rel, external, std::move(p), round);
    }
    std::sort(members.begin(), members.end());

    // (I - pi_DD^T) p_D = pi_SD^T pbar_S + e_D + c_D
    const auto k = static_cast<Eigen::Index>(members.size());
    Matrix a = Matrix::Identity(k, k);
    Vector b(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const Eigen::Index i = members[static_cast<std::size_t>(r)];
      double rhs = external(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!in_default[static_cast<std::size_t>(j)]) {
          rhs += rel.pi(j, i) * rel.pbar(j);
        }
      }
      b(r) = rhs;
      for (Eigen::Index s = 0; s < k; ++s) {
        a(r, s) -= rel.pi(members[static_cast<std::size_t>(s)], i);
      }
    }
    Eigen::PartialPivLU<Matrix> lu(a);
    Vector x = lu.solve(b);
    const double residual = (a * x - b).cwiseAbs().maxCoeff();
    if (!x.allFinite() || residual > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
      // Closed default cycles make the system singular; the greatest fixed
      // point is still the monotone limit from full payment.
      auto pic = picard_iteration(rel, external, rel.pbar, 1e-12);
      if (!pic.converged) {
        throw SolverError("clearing: singular default system and Picard fallback did not converge");
      }
      return detail::finish_outcome(rel, external, std::move(pic.p), round + 1);
    }
    for (Eigen::Index r = 0; r < k; ++r) {
      const Eigen::Index i = members[static_cast<std::size_t>(r)];
      p(i) = std::clamp(x(r), 0.0, rel.pbar(i));
    }
  }
  throw SolverError("clearing: fictitious default did not stabilise within n+1 rounds");
}

inline ClearingOutcome clearing_vector(const LiabilityNetwork& net, const Allocation& alloc) {
  validate(alloc, net.size());
  const auto rel = relative_liabilities(net);
  return clearing_vector(rel, detail::external_funds(net, alloc));
}

inline ClearingOutcome clearing_vector(const LiabilityNetwork& net) {
  return clearing_vector(net, Allocation::zeros(net.size()));
}

/// Largest violation of p = min(pbar, pi^T p + e + c), relative to max(1, pbar).
inline double fixed_point_residual(const RelativeLiabilities& rel, const Vector& external, const Vector& p) {
  const Vector target = (rel.pi.transpose() * p + external).cwiseMin(rel.pbar);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    worst = std::max(worst, std::abs(p(i) - target(i)) / std::max(1.0, rel.pbar(i)));
  }
  return worst;
}

struct UniquenessReport {
  double gap = 0.0;  // sup-norm distance between greatest and least fixed points
  bool unique = true;
  bool least_converged = true;
  Vector greatest;
  Vector least;
};

/// Compares the fictitious-default (greatest) clearing vector with the least
/// fixed point reached by Picard iteration from zero.
inline UniquenessReport uniqueness_check(const LiabilityNetwork& net, const Allocation& alloc,
                                         double tol = 1e-6) {
  validate(alloc, net.size());
  const auto rel = relative_liabilities(net);
  const Vector external = detail::external_funds(net, alloc);
  UniquenessReport rep;
  rep.greatest = clearing_vector(rel, external).p;
  auto pic = picard_iteration(rel, external, Vector::Zero(rel.pbar.size()), 1e-12);
  rep.least = std::move(pic.p);
  rep.least_converged = pic.converged;
  rep.gap = (rep.greatest - rep.least).cwiseAbs().maxCoeff();
  double scale = 1.0;
  if (rel.pbar.size() > 0) scale = std::max(1.0, rel.pbar.maxCoeff());
  rep.unique = rep.least_converged && rep.gap <= tol * scale;
  return rep;
}

}  // namespace bailout

#endif  // BAILOUT_CLEARING_HPP
