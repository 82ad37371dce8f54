#include <gtest/gtest.h>

#include <sstream>

#include "bailout/tree.hpp"
#include "support.hpp"

using namespace bailout;

namespace {

std::size_t defaults_with(const LiabilityNetwork& net, const std::vector<std::pair<std::size_t, double>>& gifts) {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  for (const auto& [node, amount] : gifts) c(static_cast<Eigen::Index>(node)) += amount;
  return clearing_vector(net, Allocation(c)).n_defaults;
}

}  // namespace

TEST(Tree, SmallestTree) {
  const auto net = binary_tree_network(TreeSpec{2});
  ASSERT_EQ(net.size(), 3u);
  EXPECT_DOUBLE_EQ(net.liabilities(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(net.liabilities(0, 2), 4.0);
  const Vector pbar = net.liabilities.rowwise().sum();
  EXPECT_EQ(pbar, (Vector{{8.0, 0.0, 0.0}}));
  EXPECT_TRUE(net.cash.isZero());
}

TEST(Tree, TenLevels) {
  const TreeSpec spec{10};
  const auto net = binary_tree_network(spec);
  ASSERT_EQ(net.size(), 1023u);
  EXPECT_EQ(spec.non_leaf_count(), 511u);
  EXPECT_DOUBLE_EQ(net.liabilities(0, 1), 1024.0);
  EXPECT_DOUBLE_EQ(net.liabilities(0, 2), 1024.0);
  const std::size_t level8 = first_node_at_level(8);
  EXPECT_EQ(tree_level(level8), 8);
  EXPECT_DOUBLE_EQ(net.liabilities(static_cast<Eigen::Index>(level8), static_cast<Eigen::Index>(2 * level8 + 1)),
                   4.0);
  EXPECT_DOUBLE_EQ(net.liabilities.sum(), 18432.0);
  EXPECT_EQ(net.label(5), "n5");
  // Every level owes 2048 in aggregate.
  for (int s = 0; s < 9; ++s) {
    double level_total = 0.0;
    for (std::size_t k = first_node_at_level(s); k < first_node_at_level(s + 1); ++k) {
      level_total += net.liabilities.row(static_cast<Eigen::Index>(k)).sum();
    }
    EXPECT_DOUBLE_EQ(level_total, 2048.0) << "level " << s;
  }
}

TEST(Tree, RejectsTooFewLevels) { EXPECT_THROW(binary_tree_network(TreeSpec{1}), ValidationError); }

TEST(ClosedForm, Endpoints) {
  EXPECT_EQ(optimal_tree_defaults(0.0), 511u);
  EXPECT_EQ(optimal_tree_defaults(2048.0), 0u);
  EXPECT_EQ(optimal_tree_defaults(5000.0), 0u);
  EXPECT_EQ(optimal_tree_defaults(1024.0), 256u);
  EXPECT_EQ(optimal_tree_defaults(640.0), 511u - 127u - 31u);
  EXPECT_THROW(optimal_tree_defaults(-1.0), ValidationError);
}

TEST(ClosedForm, SmallBudgetsPreventNothing) {
  for (double c = 0.0; c < 8.0; c += 0.5) EXPECT_EQ(optimal_tree_defaults(c), 511u);
}

TEST(ClosedForm, PowerOfTwoMatchesSimulation) {
  const auto net = binary_tree_network(TreeSpec{10});
  for (int k = 3; k <= 11; ++k) {
    const double c = std::ldexp(1.0, k);
    const std::size_t expected = 511 - ((std::size_t{1} << (k - 2)) - 1);
    EXPECT_EQ(optimal_tree_defaults(c), expected) << "k=" << k;
    const std::size_t node = first_node_at_level(11 - k);
    EXPECT_EQ(defaults_with(net, {{node, c}}), expected) << "k=" << k;
  }
}

TEST(ClosedForm, SixLevelBruteForceOverOneAndTwoNodes) {
  // 40 = 2^5 + 2^3 is the six-level counterpart of 640 on ten levels.
  const TreeSpec spec{6};
  const auto net = binary_tree_network(spec);
  for (double budget : {40.0, 24.0, 96.0, 72.0}) {
    std::size_t best = net.size();
    const auto whole = static_cast<int>(budget);
    for (std::size_t a = 0; a < spec.non_leaf_count(); ++a) {
      best = std::min(best, defaults_with(net, {{a, budget}}));
      for (std::size_t b = a + 1; b < spec.non_leaf_count(); ++b) {
        for (int split = 1; split < whole; ++split) {
          best = std::min(best, defaults_with(net, {{a, split}, {b, budget - split}}));
        }
      }
    }
    EXPECT_EQ(best, optimal_tree_defaults_generalized(budget, spec)) << "C=" << budget;
  }
  EXPECT_EQ(optimal_tree_defaults_generalized(40.0, spec), 23u);
}

TEST(ClosedForm, FourLevelExhaustiveSearch) {
  // Every allocation of the budget over the non-leaf nodes in steps of 2.
  const TreeSpec spec{4};
  const auto net = binary_tree_network(spec);
  const std::size_t parts = spec.non_leaf_count();
  for (int budget = 0; budget <= 34; budget += 2) {
    std::size_t best = net.size();
    testsupport::for_each_composition(parts, budget / 2, [&](const std::vector<int>& k) {
      std::vector<std::pair<std::size_t, double>> gifts;
      for (std::size_t i = 0; i < parts; ++i) gifts.emplace_back(i, 2.0 * k[i]);
      best = std::min(best, defaults_with(net, gifts));
    });
    EXPECT_EQ(best, optimal_tree_defaults_generalized(budget, spec)) << "C=" << budget;
  }
}

TEST(Figure, EmptyGrid) { EXPECT_TRUE(reproduce_figure(TreeSpec{10}, {}, ReweightParams{}).empty()); }

TEST(Figure, EndpointsAndOrdering) {
  const auto rows = reproduce_figure(TreeSpec{10}, {2048.0, 0.0}, ReweightParams{});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].budget, 0.0);
  EXPECT_EQ(rows[0].optimal_defaults, 511u);
  EXPECT_EQ(rows[0].algorithm_defaults, 511u);
  EXPECT_EQ(rows[1].budget, 2048.0);
  EXPECT_EQ(rows[1].optimal_defaults, 0u);
  EXPECT_EQ(rows[1].algorithm_defaults, 0u);
  EXPECT_TRUE(rows[0].error.empty());
}

TEST(Figure, MidpointOptimum) {
  const auto rows = reproduce_figure(TreeSpec{10}, {1024.0}, ReweightParams{});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].optimal_defaults, 256u);
  EXPECT_GE(rows[0].algorithm_defaults, 256u);
}

TEST(Figure, ParallelMatchesSerial) {
  const std::vector<double> grid{0.0, 16.0, 40.0, 64.0, 100.0, 128.0};
  const auto serial = reproduce_figure(TreeSpec{6}, grid, ReweightParams{}, 1);
  const auto parallel = reproduce_figure(TreeSpec{6}, grid, ReweightParams{}, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].budget, parallel[k].budget);
    EXPECT_EQ(serial[k].algorithm_defaults, parallel[k].algorithm_defaults);
    EXPECT_EQ(serial[k].algorithm_unpaid, parallel[k].algorithm_unpaid);
  }
}

TEST(Figure, CsvAndSvg) {
  const auto rows = reproduce_figure(TreeSpec{4}, {0.0, 32.0}, ReweightParams{});
  std::ostringstream csv;
  write_figure_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "budget,optimal_defaults,algorithm_defaults,algorithm_unpaid,wall_time_ms");
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first.rfind("0,7,7,", 0), 0u) << first;
  std::ostringstream svg;
  write_figure_svg(svg, rows);
  EXPECT_NE(svg.str().find("<polyline"), std::string::npos);
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}
