// Three banks in a chain with one cash-rich node: compare the baseline
// clearing outcome with the two optimisers at a fixed budget.
#include <iostream>

#include "bailout/bailout.hpp"
#include "bailout/io.hpp"

int main() {
  using namespace bailout;
  const auto net = from_edges(Vector{{0.0, 2.0, 1.0}},
                              {{0, 1, 10.0}, {1, 2, 6.0}, {2, 0, 3.0}, {1, 0, 2.0}},
                              {"alpha", "beta", "gamma"});

  const auto base = clearing_vector(net);
  std::cout << "baseline: D=" << base.unpaid_total << " N_d=" << base.n_defaults << '\n';

  const double budget = 5.0;
  const auto unpaid = solve_problem1(net, budget);
  std::cout << "min unpaid at C=" << budget << ": " << allocation_to_json(net, unpaid.allocation).dump()
            << " D=" << unpaid.outcome.unpaid_total << " N_d=" << unpaid.outcome.n_defaults << '\n';

  const auto fewest = solve_problem2(net, budget, ReweightParams{});
  std::cout << "min defaults at C=" << budget << ": " << allocation_to_json(net, fewest.allocation).dump()
            << " D=" << fewest.outcome.unpaid_total << " N_d=" << fewest.outcome.n_defaults << '\n';
}
