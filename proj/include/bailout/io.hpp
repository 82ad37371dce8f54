#ifndef BAILOUT_IO_HPP
#define BAILOUT_IO_HPP

// Network file format and result serialisation shared by the CLI and the
// HTTP service.
//
//   { "nodes": [ { "id": "a", "cash": 4 }, ... ],
//     "liabilities": [ { "from": "a", "to": "b", "amount": 10 }, ... ] }
//
// Node order fixes index order; duplicate (from, to) pairs are summed.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bailout/bailout.hpp"
#include "bailout/clearing.hpp"
#include "bailout/network.hpp"

namespace bailout {

using json = nlohmann::json;

/// Currency values are written with at most 9 fractional digits.
inline double round_currency(double v) {
  const double r = std::round(v * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;
}

inline json currency_array(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round_currency(v(i)));
  return arr;
}

namespace detail {

inline double number_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": \"" + key + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(where + ": \"" + key + "\" must be finite");
  return d;
}

inline std::string id_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw ValidationError(where + ": \"" + key + "\" must be a string id");
  }
  return obj.at(key).get<std::string>();
}

}  // namespace detail

inline LiabilityNetwork network_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("network document must be a JSON object");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) {
    throw ValidationError("network document needs a \"nodes\" array");
  }
  const auto& nodes = doc.at("nodes");
  if (nodes.empty()) throw ValidationError("network must have at least one node");
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> labels;
  Vector cash(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = nodes[k];
    const std::string where = "nodes[" + std::to_string(k) + "]";
    if (!node.is_object()) throw ValidationError(where + " must be an object");
    auto id = detail::id_field(node, "id", where);
    if (!index.emplace(id, k).second) throw ValidationError("duplicate node id \"" + id + "\"");
    labels.push_back(std::move(id));
    cash(static_cast<Eigen::Index>(k)) = node.contains("cash") ? detail::number_field(node, "cash", where) : 0.0;
  }
  std::vector<Edge> edges;
  if (doc.contains("liabilities")) {
    const auto& list = doc.at("liabilities");
    if (!list.is_array()) throw ValidationError("\"liabilities\" must be an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& item = list[k];
      const std::string where = "liabilities[" + std::to_string(k) + "]";
      if (!item.is_object()) throw ValidationError(where + " must be an object");
      const auto from = detail::id_field(item, "from", where);
      const auto to = detail::id_field(item, "to", where);
      const auto fit = index.find(from);
      const auto tit = index.find(to);
      if (fit == index.end()) throw ValidationError(where + ": unknown node id \"" + from + "\"");
      if (tit == index.end()) throw ValidationError(where + ": unknown node id \"" + to + "\"");
      const double amount = detail::number_field(item, "amount", where);
      if (amount < 0.0) throw ValidationError(where + ": negative liability amount");
      if (fit->second == tit->second && amount != 0.0) {
        throw ValidationError(where + ": nonzero diagonal (node owes itself)");
      }
      edges.push_back({fit->second, tit->second, amount});
    }
  }
  return from_edges(std::move(cash), edges, std::move(labels));
}

inline json network_to_json(const LiabilityNetwork& net) {
  json doc;
  doc["nodes"] = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    doc["nodes"].push_back({{"id", net.label(i)}, {"cash", round_currency(net.cash(static_cast<Eigen::Index>(i)))}});
  }
  doc["liabilities"] = json::array();
  for (Eigen::Index i = 0; i < net.liabilities.rows(); ++i) {
    for (Eigen::Index j = 0; j < net.liabilities.cols(); ++j) {
      const double amount = net.liabilities(i, j);
      if (amount != 0.0) {
        doc["liabilities"].push_back({{"from", net.label(static_cast<std::size_t>(i))},
                                      {"to", net.label(static_cast<std::size_t>(j))},
                                      {"amount", round_currency(amount)}});
      }
    }
  }
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

inline LiabilityNetwork read_network(const std::string& path) { return network_from_json(read_json_file(path)); }

/// Injection document: {"injections": [{"node": id, "amount": x}, ...]} or
/// a dense {"c": [x0, x1, ...]}. Repeated nodes are summed.
inline Allocation allocation_from_json(const json& doc, const LiabilityNetwork& net) {
  if (!doc.is_object()) throw ValidationError("injection document must be a JSON object");
  Vector c = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  if (doc.contains("c")) {
    const auto& arr = doc.at("c");
    if (!arr.is_array() || arr.size() != net.size()) {
      throw ValidationError("\"c\" must be an array with one entry per node");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) throw ValidationError("\"c\" entries must be numbers");
      c(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
  } else if (doc.contains("injections")) {
    const auto& list = doc.at("injections");
    if (!list.is_array()) throw ValidationError("\"injections\" must be an array");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < net.size(); ++i) index.emplace(net.label(i), i);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string where = "injections[" + std::to_string(k) + "]";
      if (!list[k].is_object()) throw ValidationError(where + " must be an object");
      const auto id = detail::id_field(list[k], "node", where);
      const auto it = index.find(id);
      if (it == index.end()) throw ValidationError(where + ": unknown node id \"" + id + "\"");
      c(static_cast<Eigen::Index>(it->second)) += detail::number_field(list[k], "amount", where);
    }
  } else {
    throw ValidationError("injection document needs \"injections\" or \"c\"");
  }
  Allocation alloc(std::move(c));
  validate(alloc, net.size());
  return alloc;
}

inline json ids_json(const LiabilityNetwork& net, const std::vector<std::size_t>& nodes) {
  json arr = json::array();
  for (auto i : nodes) arr.push_back(net.label(i));
  return arr;
}

inline json outcome_to_json(const LiabilityNetwork& net, const ClearingOutcome& out) {
  const Vector pbar = net.liabilities.rowwise().sum();
  json doc;
  doc["n"] = net.size();
  doc["p"] = currency_array(out.p);
  doc["q"] = currency_array(out.q);
  doc["r"] = currency_array(out.r);
  doc["shortfall"] = currency_array((pbar - out.p).cwiseMax(0.0));
  doc["unpaid_total"] = round_currency(out.unpaid_total);
  doc["defaults"] = ids_json(net, out.defaults);
  doc["n_defaults"] = out.n_defaults;
  return doc;
}

inline json allocation_to_json(const LiabilityNetwork& net, const Allocation& alloc) {
  json doc;
  doc["c"] = currency_array(alloc.c);
  doc["total"] = round_currency(alloc.total);
  json nonzero = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double v = round_currency(alloc.c(static_cast<Eigen::Index>(i)));
    if (v != 0.0) nonzero.push_back({{"node", net.label(i)}, {"amount", v}});
  }
  doc["injections"] = std::move(nonzero);
  return doc;
}

/// `mode` is one of liabilities, lagrangian, defaults.
inline json result_to_json(const LiabilityNetwork& net, const OptimizationResult& res, const std::string& mode) {
  json doc;
  doc["mode"] = mode;
  doc["budget"] = round_currency(res.budget);
  doc["allocation"] = allocation_to_json(net, res.allocation);
  doc["outcome"] = outcome_to_json(net, res.outcome);
  doc["lp_objective"] = round_currency(res.lp_objective);
  if (mode == "defaults") {
    json starts = json::array();
    for (const auto& s : res.starts_summary) {
      json item{{"start", s.start}, {"succeeded", s.succeeded}, {"iterations", s.iterations},
                {"converged", s.converged}};
      if (s.succeeded) {
        item["n_defaults"] = s.n_defaults;
        item["unpaid_total"] = round_currency(s.unpaid_total);
      } else {
        item["message"] = s.message;
      }
      starts.push_back(std::move(item));
    }
    doc["starts"] = std::move(starts);
    doc["selected_start"] = res.selected_start ? json(*res.selected_start) : json(nullptr);
    json trace = json::array();
    for (const auto& t : res.objective_trace) {
      trace.push_back({{"start", t.start}, {"iteration", t.iteration}, {"n_defaults", t.n_defaults},
                       {"unpaid_total", round_currency(t.unpaid_total)},
                       {"weight_change", round_currency(t.weight_change)}});
    }
    doc["trace"] = std::move(trace);
  }
  return doc;
}

/// Summary used by GET /networks/{id} and the CLI's human output.
inline json network_summary(const LiabilityNetwork& net) {
  const auto base = clearing_vector(net);
  json doc;
  doc["n"] = net.size();
  doc["total_liabilities"] = round_currency(net.liabilities.sum());
  doc["total_cash"] = round_currency(net.cash.sum());
  doc["baseline_defaults"] = base.n_defaults;
  doc["baseline_unpaid"] = round_currency(base.unpaid_total);
  return doc;
}

}  // namespace bailout

#endif  // BAILOUT_IO_HPP
