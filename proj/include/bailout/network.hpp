#ifndef BAILOUT_NETWORK_HPP
#define BAILOUT_NETWORK_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bailout {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an input violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a trustworthy answer.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Single-period borrower-lender network.
///
/// `liabilities(i, j)` is what node i owes node j; `cash(i)` is the cash node i
/// holds before any payments are made. Labels are optional and used only for
/// display and file I/O.
struct LiabilityNetwork {
  Matrix liabilities;
  Vector cash;
  std::vector<std::string> node_labels;

  LiabilityNetwork() = default;
  LiabilityNetwork(Matrix l, Vector e, std::vector<std::string> labels = {})
      : liabilities(std::move(l)), cash(std::move(e)), node_labels(std::move(labels)) {}

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(cash.size()); }

  [[nodiscard]] std::string label(std::size_t i) const {
    return i < node_labels.size() ? node_labels[i] : std::to_string(i);
  }
};

/// Liabilities normalised by each debtor's total obligations.
struct RelativeLiabilities {
  Matrix pi;
  Vector pbar;
};

/// Cash injection per node together with the budget it spends.
struct Allocation {
  Vector c;
  double total = 0.0;

  Allocation() = default;
  explicit Allocation(Vector injection) : c(std::move(injection)), total(c.sum()) {}

  static Allocation zeros(std::size_t n) { return Allocation(Vector::Zero(static_cast<Eigen::Index>(n))); }
};

/// Throws ValidationError describing the first violated invariant.
inline void validate(const LiabilityNetwork& net) {
  const auto n = net.cash.size();
  if (n < 1) {
    throw ValidationError("network must have at least one node");
  }
  if (net.liabilities.rows() != n || net.liabilities.cols() != n) {
    throw ValidationError("size mismatch: liabilities must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  }
  if (!net.node_labels.empty() && net.node_labels.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("size mismatch: expected " + std::to_string(n) + " node labels");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(net.cash(i))) {
      throw ValidationError("non-finite cash at node " + net.label(static_cast<std::size_t>(i)));
    }
    if (net.cash(i) < 0.0) {
      throw ValidationError("negative cash at node " + net.label(static_cast<std::size_t>(i)));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = net.liabilities(i, j);
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite liability " + std::to_string(i) + "->" + std::to_string(j));
      }
      if (v < 0.0) {
        throw ValidationError("negative liability amount " + std::to_string(i) + "->" +
                              std::to_string(j));
      }
      if (i == j && v != 0.0) {
        throw ValidationError("nonzero diagonal at node " + net.label(static_cast<std::size_t>(i)));
      }
    }
  }
}

/// Non-throwing form of validate(); returns the error message, empty when valid.
inline std::string validation_error(const LiabilityNetwork& net) {
  try {
    validate(net);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

inline RelativeLiabilities relative_liabilities(const LiabilityNetwork& net) {
  validate(net);
  RelativeLiabilities rel;
  rel.pbar = net.liabilities.rowwise().sum();
  rel.pi = Matrix::Zero(net.liabilities.rows(), net.liabilities.cols());
  for (Eigen::Index i = 0; i < rel.pbar.size(); ++i) {
    if (rel.pbar(i) != 0.0) {
      rel.pi.row(i) = net.liabilities.row(i) / rel.pbar(i);
    }
  }
  return rel;
}

/// Checks c >= 0, finiteness, length and that `total` matches the component sum.
inline void validate(const Allocation& alloc, std::size_t n) {
  if (static_cast<std::size_t>(alloc.c.size()) != n) {
    throw ValidationError("allocation length " + std::to_string(alloc.c.size()) +
                          " does not match network size " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < alloc.c.size(); ++i) {
    if (!std::isfinite(alloc.c(i))) {
      throw ValidationError("non-finite injection at node " + std::to_string(i));
    }
    if (alloc.c(i) < 0.0) {
      throw ValidationError("negative injection at node " + std::to_string(i));
    }
  }
  if (std::abs(alloc.total - alloc.c.sum()) > 1e-9) {
    throw ValidationError("allocation total does not equal the sum of injections");
  }
}

/// Builds a network from (from, to, amount) triples. Duplicate pairs are summed.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double amount = 0.0;
};

inline LiabilityNetwork from_edges(Vector cash, const std::vector<Edge>& edges,
                                   std::vector<std::string> labels = {}) {
  const auto n = cash.size();
  Matrix l = Matrix::Zero(n, n);
  for (const auto& e : edges) {
    if (e.from >= static_cast<std::size_t>(n) || e.to >= static_cast<std::size_t>(n)) {
      throw ValidationError("edge endpoint out of range");
    }
    if (e.amount < 0.0) {
      throw ValidationError("negative liability amount " + std::to_string(e.from) + "->" +
                            std::to_string(e.to));
    }
    l(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += e.amount;
  }
  LiabilityNetwork net(std::move(l), std::move(cash), std::move(labels));
  validate(net);
  return net;
}

}  // namespace bailout

#endif  // BAILOUT_NETWORK_HPP
