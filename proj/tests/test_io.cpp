#include <gtest/gtest.h>

#include "bailout/io.hpp"
#include "bailout/tree.hpp"

using namespace bailout;

namespace {

json two_node_doc() {
  return json::parse(R"({"nodes": [{"id": "a", "cash": 4}, {"id": "b"}],
                         "liabilities": [{"from": "a", "to": "b", "amount": 10}]})");
}

std::string error_of(const json& doc) {
  try {
    network_from_json(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(NetworkJson, Parses) {
  const auto net = network_from_json(two_node_doc());
  ASSERT_EQ(net.size(), 2u);
  EXPECT_EQ(net.label(0), "a");
  EXPECT_DOUBLE_EQ(net.cash(0), 4.0);
  EXPECT_DOUBLE_EQ(net.cash(1), 0.0);
  EXPECT_DOUBLE_EQ(net.liabilities(0, 1), 10.0);
}

TEST(NetworkJson, Errors) {
  auto doc = two_node_doc();
  doc["liabilities"][0]["to"] = "zz";
  EXPECT_NE(error_of(doc).find("unknown node id \"zz\""), std::string::npos);
  doc = two_node_doc();
  doc["liabilities"][0]["amount"] = -1;
  EXPECT_NE(error_of(doc).find("negative liability amount"), std::string::npos);
  doc = two_node_doc();
  doc["nodes"][1]["id"] = "a";
  EXPECT_NE(error_of(doc).find("duplicate node id"), std::string::npos);
  doc = two_node_doc();
  doc["liabilities"].push_back({{"from", "b"}, {"to", "b"}, {"amount", 1}});
  EXPECT_NE(error_of(doc).find("nonzero diagonal"), std::string::npos);
  doc = two_node_doc();
  doc["nodes"][0]["cash"] = -2;
  EXPECT_NE(error_of(doc).find("negative cash"), std::string::npos);
  EXPECT_NE(error_of(json::array()).find("JSON object"), std::string::npos);
  EXPECT_NE(error_of(json::object()).find("\"nodes\""), std::string::npos);
}

TEST(NetworkJson, RoundTripPreservesStructure) {
  const auto net = binary_tree_network(TreeSpec{5});
  const auto back = network_from_json(json::parse(network_to_json(net).dump()));
  EXPECT_EQ(back.liabilities, net.liabilities);
  EXPECT_EQ(back.cash, net.cash);
  EXPECT_EQ(back.node_labels, net.node_labels);
  const auto a = relative_liabilities(net);
  const auto b = relative_liabilities(back);
  EXPECT_EQ(a.pi, b.pi);
  EXPECT_EQ(a.pbar, b.pbar);
}

TEST(AllocationJson, SparseAndDenseForms) {
  const auto net = network_from_json(two_node_doc());
  const auto sparse = allocation_from_json(
      json::parse(R"({"injections": [{"node": "a", "amount": 2}, {"node": "a", "amount": 1.5}]})"), net);
  EXPECT_DOUBLE_EQ(sparse.c(0), 3.5);
  EXPECT_DOUBLE_EQ(sparse.total, 3.5);
  const auto dense = allocation_from_json(json::parse(R"({"c": [0, 2]})"), net);
  EXPECT_DOUBLE_EQ(dense.c(1), 2.0);
  EXPECT_THROW(allocation_from_json(json::parse(R"({"c": [1]})"), net), ValidationError);
  EXPECT_THROW(allocation_from_json(json::parse(R"({"c": [-1, 0]})"), net), ValidationError);
  EXPECT_THROW(allocation_from_json(json::parse(R"({"injections": [{"node": "q", "amount": 1}]})"), net),
               ValidationError);
  EXPECT_THROW(allocation_from_json(json::parse(R"({})"), net), ValidationError);
}

TEST(OutcomeJson, Fields) {
  const auto net = network_from_json(two_node_doc());
  const auto doc = outcome_to_json(net, clearing_vector(net));
  EXPECT_EQ(doc["n"], 2);
  EXPECT_EQ(doc["p"], json::parse("[4.0, 0.0]"));
  EXPECT_EQ(doc["shortfall"], json::parse("[6.0, 0.0]"));
  EXPECT_EQ(doc["unpaid_total"], 6.0);
  EXPECT_EQ(doc["defaults"], json::parse(R"(["a"])"));
  EXPECT_EQ(doc["n_defaults"], 1);
}

TEST(Currency, RoundsToNineDecimals) {
  EXPECT_EQ(round_currency(1.0000000004), 1.0);
  EXPECT_EQ(round_currency(2.1234567891234), 2.123456789);
  EXPECT_FALSE(std::signbit(round_currency(-1e-12)));
}

TEST(Summary, ReportsBaseline) {
  const auto s = network_summary(binary_tree_network(TreeSpec{10}));
  EXPECT_EQ(s["n"], 1023);
  EXPECT_EQ(s["total_liabilities"], 18432.0);
  EXPECT_EQ(s["baseline_defaults"], 511);
}
