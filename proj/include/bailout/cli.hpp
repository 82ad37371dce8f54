#ifndef BAILOUT_CLI_HPP
#define BAILOUT_CLI_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bailout/bailout.hpp"
#include "bailout/io.hpp"
#include "bailout/tree.hpp"

namespace bailout::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kSolverError = 3 };

/// "start:stop:step" (inclusive of both ends) or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("bad grid value \"" + s + "\" (expected start:stop:step or a comma list)");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ValidationError("grid must look like start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (step <= 0.0) throw ValidationError("grid step must be positive");
    if (stop < start) throw ValidationError("grid stop must not be below start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  } else if (!text.empty()) {
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) grid.push_back(number(part));
  }
  for (double c : grid) {
    if (c < 0.0) throw ValidationError("grid budgets must be non-negative");
  }
  return grid;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write " + path);
  file << text;
}

inline std::string outcome_csv(const LiabilityNetwork& net, const Allocation& alloc, const ClearingOutcome& out) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "id,cash,injection,pbar,p,shortfall,default\n";
  const Vector pbar = net.liabilities.rowwise().sum();
  std::vector<char> in_default(net.size(), 0);
  for (auto i : out.defaults) in_default[i] = 1;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    os << net.label(i) << ',' << round_currency(net.cash(k)) << ',' << round_currency(alloc.c(k)) << ','
       << round_currency(pbar(k)) << ',' << round_currency(out.p(k)) << ','
       << round_currency(std::max(0.0, pbar(k) - out.p(k))) << ',' << (in_default[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string outcome_human(const LiabilityNetwork& net, const Allocation& alloc, const ClearingOutcome& out) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "nodes:            " << net.size() << '\n'
     << "injected:         " << round_currency(alloc.total) << '\n'
     << "unpaid total D:   " << round_currency(out.unpaid_total) << '\n'
     << "defaults N_d:     " << out.n_defaults << '\n';
  if (!out.defaults.empty() && out.defaults.size() <= 20) {
    os << "defaulting nodes:";
    for (auto i : out.defaults) os << ' ' << net.label(i);
    os << '\n';
  }
  return os.str();
}

}  // namespace detail

/// Parses argv, runs one subcommand, and returns the process exit code.
/// Results go to `out` (or the --out file); diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clearing vectors and bailout allocation for borrower-lender networks", "bailout"};
  app.require_subcommand(1);

  std::string network_path;
  std::string inject_path;
  std::string out_path;
  std::string format = "json";
  double budget = 0.0;
  double lambda = 0.0;
  int levels = 10;
  std::string grid_text = "0:2048:64";
  std::size_t threads = 1;
  ReweightParams params;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "json, csv or human")
        ->check(CLI::IsMember({"json", "csv", "human"}));
  };
  auto add_network = [&](CLI::App* sub) {
    sub->add_option("--network", network_path, "network JSON file")->required();
  };
  auto add_reweight = [&](CLI::App* sub) {
    sub->add_option("--k", params.k_const, "weight scale K")->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", params.epsilon, "weight offset epsilon")->check(CLI::PositiveNumber);
    sub->add_option("--delta", params.delta, "stop when the l1 weight change is below delta")
        ->check(CLI::PositiveNumber);
    sub->add_option("--starts", params.num_random_starts, "random starts besides the all-ones start")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", params.rng_seed, "seed for the random starts");
    sub->add_option("--max-iterations", params.max_iterations, "iteration cap per start")
        ->check(CLI::PositiveNumber);
  };

  auto* clearing = app.add_subcommand("clearing", "clearing payment vector for a network and injection");
  add_network(clearing);
  clearing->add_option("--inject", inject_path, "injection JSON file");
  add_format(clearing);
  clearing->add_option("--out", out_path, "write output here instead of stdout");

  auto* liabilities = app.add_subcommand("optimize-liabilities", "allocate a budget to minimise unpaid liabilities");
  add_network(liabilities);
  liabilities->add_option("--budget", budget, "total cash injection C")->required()->check(CLI::NonNegativeNumber);
  add_format(liabilities);
  liabilities->add_option("--out", out_path, "write output here instead of stdout");

  auto* lagrangian = app.add_subcommand("optimize-lagrangian", "choose the budget and allocation minimising C + lambda D");
  add_network(lagrangian);
  lagrangian->add_option("--lambda", lambda, "cost per unpaid dollar")->required()->check(CLI::NonNegativeNumber);
  add_format(lagrangian);
  lagrangian->add_option("--out", out_path, "write output here instead of stdout");

  auto* defaults = app.add_subcommand("optimize-defaults", "allocate a budget to minimise the number of defaults");
  add_network(defaults);
  defaults->add_option("--budget", budget, "total cash injection C")->required()->check(CLI::NonNegativeNumber);
  add_reweight(defaults);
  defaults->add_option("--threads", params.threads, "run starts concurrently")->check(CLI::PositiveNumber);
  add_format(defaults);
  defaults->add_option("--out", out_path, "write output here instead of stdout");

  auto* gen_tree = app.add_subcommand("gen-tree", "write the binary-tree benchmark network");
  gen_tree->add_option("--levels", levels, "tree depth in levels")->check(CLI::Range(2, 24));
  gen_tree->add_option("--out", out_path, "network file to write (stdout if omitted)");

  auto* figure = app.add_subcommand("reproduce-figure", "optimal vs algorithm defaults over a budget grid");
  figure->add_option("--levels", levels, "tree depth in levels")->check(CLI::Range(2, 24));
  figure->add_option("--grid", grid_text, "budgets as start:stop:step or a comma list");
  figure->add_option("--out", out_path, "output directory for figure.csv and figure.svg")->required();
  figure->add_option("--threads", threads, "grid points evaluated concurrently")->check(CLI::PositiveNumber);
  add_reweight(figure);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    auto emit_outcome = [&](const LiabilityNetwork& net, const Allocation& alloc, const ClearingOutcome& res,
                            const json& doc) {
      if (format == "csv") {
        detail::write_text(out_path, detail::outcome_csv(net, alloc, res), out);
      } else if (format == "human") {
        detail::write_text(out_path, detail::outcome_human(net, alloc, res), out);
      } else {
        detail::write_text(out_path, doc.dump(2) + "\n", out);
      }
    };

    if (clearing->parsed()) {
      const auto net = read_network(network_path);
      const Allocation alloc = inject_path.empty() ? Allocation::zeros(net.size())
                                                   : allocation_from_json(read_json_file(inject_path), net);
      const auto res = clearing_vector(net, alloc);
      emit_outcome(net, alloc, res, outcome_to_json(net, res));
    } else if (liabilities->parsed()) {
      const auto net = read_network(network_path);
      const auto res = solve_problem1(net, budget);
      emit_outcome(net, res.allocation, res.outcome, result_to_json(net, res, "liabilities"));
    } else if (lagrangian->parsed()) {
      const auto net = read_network(network_path);
      const auto res = solve_lagrangian(net, lambda);
      auto doc = result_to_json(net, res, "lagrangian");
      doc["lambda"] = lambda;
      emit_outcome(net, res.allocation, res.outcome, doc);
    } else if (defaults->parsed()) {
      const auto net = read_network(network_path);
      const auto res = solve_problem2(net, budget, params, [&](const std::string& m) { err << "warning: " << m << '\n'; });
      emit_outcome(net, res.allocation, res.outcome, result_to_json(net, res, "defaults"));
    } else if (gen_tree->parsed()) {
      const auto net = binary_tree_network(TreeSpec{levels});
      detail::write_text(out_path, network_to_json(net).dump(2) + "\n", out);
    } else if (figure->parsed()) {
      const TreeSpec spec{levels};
      const auto rows = reproduce_figure(spec, parse_grid(grid_text), params, threads);
      std::filesystem::create_directories(out_path);
      const auto csv_path = (std::filesystem::path(out_path) / "figure.csv").string();
      const auto svg_path = (std::filesystem::path(out_path) / "figure.svg").string();
      {
        std::ofstream csv(csv_path);
        if (!csv) throw ValidationError("cannot write " + csv_path);
        write_figure_csv(csv, rows);
      }
      {
        std::ofstream svg(svg_path);
        if (!svg) throw ValidationError("cannot write " + svg_path);
        write_figure_svg(svg, rows);
      }
      double gap_sum = 0.0;
      std::size_t failures = 0;
      json points = json::array();
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          ++failures;
          points.push_back({{"budget", r.budget}, {"optimal_defaults", r.optimal_defaults}, {"error", r.error}});
          continue;
        }
        gap_sum += static_cast<double>(r.algorithm_defaults) - static_cast<double>(r.optimal_defaults);
        points.push_back({{"budget", r.budget},
                          {"optimal_defaults", r.optimal_defaults},
                          {"algorithm_defaults", r.algorithm_defaults}});
      }
      json doc{{"csv", csv_path}, {"svg", svg_path}, {"levels", levels}, {"failures", failures}, {"points", points}};
      doc["mean_gap"] = rows.size() > failures ? gap_sum / static_cast<double>(rows.size() - failures) : 0.0;
      out << doc.dump(2) << '\n';
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}

}  // namespace bailout::cli

#endif  // BAILOUT_CLI_HPP
