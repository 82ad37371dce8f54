// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// gated criterion fails. Lines tagged INFO are reported but not gated.

#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "bailout/bailout.hpp"
#include "bailout/io.hpp"
#include "bailout/lp_oracle.hpp"
#include "bailout/tree.hpp"
#include "support.hpp"

using namespace bailout;

namespace {

constexpr double kClearingTol = 1e-6;
constexpr double kSimplexTol = 1e-6;
constexpr double kMonotoneTol = 1e-6;
constexpr double kLagrangianTol = 1e-6;
constexpr double kGridOracleTol = 1e-6;
constexpr double kFigureGapFraction = 0.05;

int failures = 0;

void report(bool gated, bool ok, const std::string& name, const std::string& detail) {
  const char* tag = !gated ? "INFO" : (ok ? "PASS" : "FAIL");
  std::cout << tag << "  " << name << " :: " << detail << std::endl;
  if (gated && !ok) ++failures;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void clearing_equivalence() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int networks = 0;
  for (; networks < 120; ++networks) {
    const auto net = testsupport::random_network(rng);
    const auto alloc = testsupport::random_allocation(rng, net.size());
    const Vector fda = clearing_vector(net, alloc).p;
    const Vector picard = testsupport::picard_clearing(net, alloc);
    const Vector lp = testsupport::lp_clearing(net, alloc);
    if (lp.size() != fda.size()) {
      worst = INFINITY;
      break;
    }
    worst = std::max({worst, (fda - picard).cwiseAbs().maxCoeff(), (fda - lp).cwiseAbs().maxCoeff()});
  }
  report(true, worst <= kClearingTol, "clearing oracle equivalence",
         std::to_string(networks) + " networks, max deviation " + fmt(worst) + " (tol 1e-6)");
}

void simplex_vs_oracle() {
  std::mt19937_64 rng(2002);
  int mismatches = 0;
  std::array<int, 3> by_status{};
  double worst = 0.0;
  const int total = 250;
  for (int k = 0; k < total; ++k) {
    const auto lp = testsupport::random_lp(rng);
    const auto sol = solve(lp);
    const auto oracle = enumerate_vertices_oracle(lp);
    ++by_status[static_cast<int>(oracle.status)];
    if (sol.status != oracle.status) {
      ++mismatches;
    } else if (sol.status == LpStatus::Optimal) {
      const double err = std::abs(sol.objective_value - oracle.value) / std::max(1.0, std::abs(oracle.value));
      worst = std::max(worst, err);
      if (err > kSimplexTol) ++mismatches;
    }
  }
  report(true, mismatches == 0, "simplex matches vertex enumeration",
         std::to_string(total) + " LPs (" + std::to_string(by_status[0]) + " optimal, " +
             std::to_string(by_status[1]) + " infeasible, " + std::to_string(by_status[2]) +
             " unbounded), mismatches " + std::to_string(mismatches) + ", max rel value error " + fmt(worst));
}

void tree_endpoints() {
  const auto net = binary_tree_network(TreeSpec{10});
  const auto none = solve_problem2(net, 0.0, ReweightParams{}).outcome.n_defaults;
  const auto full = solve_problem2(net, 2048.0, ReweightParams{}).outcome.n_defaults;
  report(true, none == 511 && full == 0, "tree endpoints exact",
         "N_d(C=0)=" + std::to_string(none) + " N_d(C=2048)=" + std::to_string(full));
}

struct FigureStats {
  bool never_below = true;
  double mean_gap = 0.0;
  std::size_t errors = 0;
  double seconds = 0.0;
};

FigureStats run_figure(int levels, double stop, double step) {
  std::vector<double> grid;
  for (double c = 0.0; c <= stop + 1e-9; c += step) grid.push_back(c);
  const auto threads = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = reproduce_figure(TreeSpec{levels}, grid, ReweightParams{}, threads);
  FigureStats s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double sum = 0.0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++s.errors;
      s.never_below = false;
      continue;
    }
    if (r.algorithm_defaults < r.optimal_defaults) s.never_below = false;
    sum += static_cast<double>(r.algorithm_defaults) - static_cast<double>(r.optimal_defaults);
  }
  s.mean_gap = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  return s;
}

void figure_reproduction() {
  const auto ten = run_figure(10, 2048.0, 64.0);
  const double limit10 = kFigureGapFraction * 511.0;
  report(true, ten.never_below, "figure T=10 (a) algorithm never beats closed-form optimum",
         "33 budgets 0..2048 step 64, optimiser errors " + std::to_string(ten.errors) + ", " + fmt(ten.seconds) + " s");
  report(true, ten.errors == 0 && ten.mean_gap <= limit10, "figure T=10 (b) mean gap within 5% of 511",
         "mean gap " + fmt(ten.mean_gap) + " (limit " + fmt(limit10) + ")");

  const auto seven = run_figure(7, 256.0, 8.0);
  const double limit7 = kFigureGapFraction * 63.0;
  report(true, seven.never_below, "figure T=7 (a) algorithm never beats closed-form optimum",
         "33 budgets 0..256 step 8, optimiser errors " + std::to_string(seven.errors) + ", " + fmt(seven.seconds) + " s");
  report(false, seven.mean_gap <= limit7, "figure T=7 (b) mean gap vs 5% of 63",
         "mean gap " + fmt(seven.mean_gap) + " (limit " + fmt(limit7) + ", " +
             (seven.mean_gap <= limit7 ? "within" : "outside") + ")");
}

void problem_one_grid_search() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> budget(1.0, 10.0);
  int worse = 0;
  double max_lead = 0.0;  // grid minimum minus LP optimum
  const int total = 25;
  for (int k = 0; k < total; ++k) {
    const auto net = testsupport::random_network(rng, {.min_nodes = 2, .max_nodes = 4, .edge_probability = 0.6});
    const double c = budget(rng);
    const auto res = solve_problem1(net, c);
    const auto grid = testsupport::grid_search_unpaid(net, c, 20);
    if (res.outcome.unpaid_total > grid.unpaid + kGridOracleTol) ++worse;
    max_lead = std::max(max_lead, grid.unpaid - res.outcome.unpaid_total);
  }
  report(true, worse == 0, "problem I optimal against grid search",
         std::to_string(total) + " networks n<=4, step 0.05*C; LP worse than grid on " + std::to_string(worse) +
             ", largest grid-resolution lead of LP " + fmt(max_lead));
}

void monotonicity_sweep() {
  std::mt19937_64 rng(4004);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto net = testsupport::random_network(rng);
    const double scale = net.liabilities.sum();
    double previous = INFINITY;
    for (int step = 0; step <= 20; ++step) {
      const double d = solve_problem1(net, scale * step / 20.0).outcome.unpaid_total;
      if (d > previous + kMonotoneTol) ++violations;
      worst = std::max(worst, d - previous);
      previous = d;
    }
  }
  report(true, violations == 0, "problem I unpaid nonincreasing in budget",
         "10 networks x 21 budgets, violations " + std::to_string(violations) + ", largest increase " + fmt(std::max(0.0, worst)));
}

void lagrangian_consistency() {
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto net = testsupport::random_network(rng);
    for (double lambda : {0.0, 0.5, 2.0, 10.0}) {
      const auto lag = solve_lagrangian(net, lambda);
      const auto p1 = solve_problem1(net, lag.budget);
      worst = std::max(worst, std::abs(p1.outcome.p.sum() - lag.outcome.p.sum()));
    }
  }
  report(true, worst <= kLagrangianTol, "lagrangian budget reproduces problem I payments",
         "10 networks x lambda {0,0.5,2,10}, max |sum p difference| " + fmt(worst));
}

std::string capture(const std::string& command) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), got);
  return out;
}

void cli_determinism() {
  const std::string exe = BAILOUT_CLI_PATH;
  const auto tree = (std::filesystem::temp_directory_path() / "bailout_acceptance_tree.json").string();
  capture(exe + " gen-tree --levels 7 --out " + tree);
  const std::string cmd = exe + " optimize-defaults --network " + tree + " --budget 136 --seed 31";
  const auto a = capture(cmd);
  const auto b = capture(cmd);
  std::filesystem::remove(tree);
  const bool ok = !a.empty() && a == b && a.find("\"n_defaults\"") != std::string::npos;
  report(true, ok, "CLI JSON byte-identical across runs", std::to_string(a.size()) + " bytes per run");
}

}  // namespace

int main() {
  clearing_equivalence();
  simplex_vs_oracle();
  tree_endpoints();
  problem_one_grid_search();
  monotonicity_sweep();
  lagrangian_consistency();
  cli_determinism();
  figure_reproduction();
  std::cout << (failures == 0 ? "all gated criteria passed" : std::to_string(failures) + " gated criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
