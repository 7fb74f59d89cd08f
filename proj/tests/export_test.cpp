#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace dtc;
using dtc::testing::action_id;
using dtc::testing::make_table;

namespace {

FeatureNames room_names() {
  FeatureNames n;
  for (int i = 1; i <= 10; ++i) n.push_back("T_room" + std::to_string(i));
  return n;
}

// Random tree with `leaves` leaves over a table's actions; thresholds drawn
// from a small grid.
DecisionTree random_tree(std::mt19937_64& rng, const ControllerTable& t, std::size_t leaves, bool oblique) {
  std::vector<Node> nodes;
  std::uniform_int_distribution<std::size_t> feature(0, t.state_dim() - 1);
  std::uniform_int_distribution<int> grid(-4, 4);
  std::uniform_int_distribution<ActionId> action(0, static_cast<ActionId>(t.action_count() - 1));
  // grow by splitting random leaves
  nodes.push_back(Leaf{action(rng)});
  std::vector<NodeId> open{0};
  while (open.size() < leaves) {
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    std::size_t k = pick(rng);
    NodeId id = open[k];
    Predicate p = AxisAligned{feature(rng), grid(rng) * 0.5};
    if (oblique && rng() % 2) {
      Halfspace h{std::vector<double>(t.state_dim()), grid(rng) * 0.25};
      for (auto& w : h.weights) w = grid(rng) * 0.5;
      p = h;
    }
    auto a = static_cast<NodeId>(nodes.size());
    nodes.push_back(Leaf{action(rng)});
    nodes.push_back(Leaf{action(rng)});
    nodes[id] = Inner{p, a, a + 1};
    open[k] = a;
    open.push_back(a + 1);
  }
  return DecisionTree(t.state_dim(), LabelKind::Action, std::move(nodes));
}

std::vector<double> as_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

}  // namespace

TEST(Dot, HeaterTreeWithNames) {
  auto t = dtc::testing::heater_table();
  auto tree = dtc::testing::heater_tree(t);
  auto names = room_names();
  auto dot = emit_dot(tree, t, &names);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  std::size_t count = 0;
  for (auto at = dot.find("T_room2 <= 20.625"); at != std::string::npos; at = dot.find("T_room2 <= 20.625", at + 1)) ++count;
  EXPECT_EQ(count, 1u);
  count = 0;
  for (auto at = dot.find("T_room5 <= 20.625"); at != std::string::npos; at = dot.find("T_room5 <= 20.625", at + 1)) ++count;
  EXPECT_EQ(count, 2u);
  for (const char* leaf : {"(1.0,1.0)", "(1.0,0.0)", "(0.0,1.0)", "(0.0,0.0)"})
    EXPECT_NE(dot.find(leaf), std::string::npos) << leaf;
  EXPECT_EQ(emit_dot(tree, t, &names), dot);
}

TEST(Dot, DefaultNamesAndSingleLeaf) {
  auto t = dtc::testing::heater_table();
  EXPECT_NE(emit_dot(dtc::testing::heater_tree(t), t).find("x[1] <= 20.625"), std::string::npos);
  auto leaf = DecisionTree::single_leaf(10, LabelKind::Action, 0);
  auto dot = emit_dot(leaf, t);
  EXPECT_EQ(dot.find("->"), std::string::npos);
  EXPECT_NE(dot.find("n0 [label="), std::string::npos);
}

TEST(Dot, RoundTrip) {
  std::mt19937_64 rng(3);
  auto t = generate_synthetic(random_spec(6), 6);
  for (int i = 0; i < 40; ++i) {
    auto tree = random_tree(rng, t, 1 + rng() % 12, i % 2 == 1);
    EXPECT_TRUE(read_dot(emit_dot(tree, t), t) == tree);
  }
  auto names = room_names();
  auto h = dtc::testing::heater_table();
  auto heater = dtc::testing::heater_tree(h);
  EXPECT_TRUE(read_dot(emit_dot(heater, h, &names), h, &names) == heater);
}

TEST(Dot, RoundTripOfLearnedSetLabelTree) {
  auto t = generate_synthetic(random_spec(9), 9);
  auto r = learn(t, LearnerConfig{});
  EXPECT_TRUE(read_dot(emit_dot(r.tree, t), t) == r.tree);
}

TEST(C, HeaterListing) {
  auto t = dtc::testing::heater_table();
  auto code = emit_c(dtc::testing::heater_tree(t), t);
  EXPECT_EQ(code.rfind("void controller(const double* x, float* result) {", 0), 0u);
  EXPECT_EQ(dtc::testing::normalized_body(code), dtc::testing::strip_whitespace(dtc::testing::kHeaterListing));
}

TEST(C, SingleLeaf) {
  auto t = dtc::testing::cartpole_actions_table();
  auto code = emit_c(DecisionTree::single_leaf(2, LabelKind::Action, action_id(t, {2.2})), t);
  EXPECT_EQ(dtc::testing::normalized_body(code), "result[0]=2.2f;");
}

TEST(C, ObliqueCondition) {
  auto t = dtc::testing::line_table({0, 1}, {0, 1});
  std::vector<Node> nodes{Inner{Halfspace{{1.0, -1.0, 0.0}, 0.0}, 1, 2}, Leaf{0}, Leaf{1}};
  DecisionTree tree(3, LabelKind::Action, std::move(nodes));
  auto code = emit_c(tree, t);
  EXPECT_NE(code.find("if (1.0*x[0] + -1.0*x[1] <= 0.0) {"), std::string::npos);
}

TEST(C, PermissiveLeavesWriteEverySetMember) {
  auto t = make_table(1, 1, {{{0}, {1.5}}, {{0}, {-2.0}}});
  auto tree = DecisionTree::single_leaf(1, LabelKind::SetLabel, t.set_label(0));
  auto code = emit_c(tree, t);
  EXPECT_EQ(code.rfind("int controller", 0), 0u);
  auto run = CProgram::parse(code).run(std::vector<double>{0.0});
  ASSERT_TRUE(run.returned);
  EXPECT_EQ(*run.returned, 2);
  ASSERT_EQ(run.result.size(), 2u);
}

TEST(C, InterpreterAgreesWithEvaluate) {
  std::mt19937_64 rng(4);
  auto t = generate_synthetic(random_spec(2), 2);
  for (int i = 0; i < 30; ++i) {
    auto tree = random_tree(rng, t, 1 + rng() % 20, i % 2 == 1);
    auto program = CProgram::parse(emit_c(tree, t));
    for (std::size_t r = 0; r < t.size(); ++r) {
      auto out = program.run(t.state(r));
      auto u = t.action(evaluate(tree, t.state(r)));
      ASSERT_EQ(out.result.size(), u.size());
      for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(*out.result[k], static_cast<float>(u[k]));
    }
  }
}

TEST(Stats, Examples) {
  auto cp = dtc::testing::cartpole_actions_table();
  auto six = compute_stats(dtc::testing::cartpole_tree(cp), 0.0);
  EXPECT_EQ(six.decision_paths, 6u);
  EXPECT_EQ(six.bits_per_symbol, 3u);
  auto h = dtc::testing::heater_table();
  auto four = compute_stats(dtc::testing::heater_tree(h), 1.5);
  EXPECT_EQ(four.total_nodes, 7u);
  EXPECT_EQ(four.inner_nodes, 3u);
  EXPECT_EQ(four.bits_per_symbol, 2u);
  EXPECT_EQ(four.construction_seconds, 1.5);
  auto one = compute_stats(DecisionTree::single_leaf(1, LabelKind::Action, 0), 0.0);
  EXPECT_EQ(one.total_nodes, 1u);
  EXPECT_EQ(one.decision_paths, 1u);
  EXPECT_EQ(one.bits_per_symbol, 0u);
  auto j = stats_json(four);
  EXPECT_EQ(j.dump(), R"({"nodes":7,"inner_nodes":3,"paths":4,"bits":2,"seconds":1.5})");
}

TEST(Stats, IdentitiesOnRandomTrees) {
  std::mt19937_64 rng(8);
  auto t = generate_synthetic(random_spec(1), 1);
  for (int i = 0; i < 200; ++i) {
    std::size_t leaves = 1 + rng() % 300;
    auto s = compute_stats(random_tree(rng, t, leaves, false), 0.0);
    EXPECT_EQ(s.decision_paths, leaves);
    EXPECT_EQ(s.total_nodes, 2 * leaves - 1);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < leaves) ++bits;
    EXPECT_EQ(s.bits_per_symbol, bits);
  }
}

TEST(Quantizer, OneDimensionalBoxes) {
  auto t = dtc::testing::line_table({1, 2, 3}, {0, 1, 2});
  std::vector<Node> nodes{Inner{AxisAligned{0, 2.5}, 1, 4}, Inner{AxisAligned{0, 1.5}, 2, 3}, Leaf{0}, Leaf{1}, Leaf{2}};
  DecisionTree tree(1, LabelKind::Action, std::move(nodes));
  auto q = extract_quantizer(tree, t);
  ASSERT_TRUE(q.boxes);
  ASSERT_EQ(q.coder.size(), 3u);
  const auto& b0 = q.coder[0].box[0];
  const auto& b1 = q.coder[1].box[0];
  const auto& b2 = q.coder[2].box[0];
  EXPECT_FALSE(b0.lower);
  EXPECT_EQ(b0.upper, 1.5);
  EXPECT_EQ(b1.lower, 1.5);
  EXPECT_EQ(b1.upper, 2.5);
  EXPECT_EQ(b2.lower, 2.5);
  EXPECT_FALSE(b2.upper);
  EXPECT_EQ(q.locate(std::vector<double>{1.5}), 0u);
  EXPECT_EQ(q.locate(std::vector<double>{2.0}), 1u);
  EXPECT_EQ(q.locate(std::vector<double>{100.0}), 2u);
}

TEST(Quantizer, SingleLeafCoversEverything) {
  auto t = dtc::testing::line_table({1}, {0});
  auto q = extract_quantizer(DecisionTree::single_leaf(1, LabelKind::Action, 0), t);
  ASSERT_EQ(q.coder.size(), 1u);
  EXPECT_FALSE(q.coder[0].box[0].lower);
  EXPECT_FALSE(q.coder[0].box[0].upper);
  EXPECT_EQ(q.locate(std::vector<double>{-1e300}), 0u);
}

TEST(Quantizer, CartpoleTree) {
  auto t = dtc::testing::cartpole_actions_table();
  auto tree = dtc::testing::cartpole_tree(t);
  auto q = extract_quantizer(tree, t);
  EXPECT_EQ(q.coder.size(), 6u);
  EXPECT_EQ(q.decode(0), (std::vector<std::vector<double>>{{2.2}}));
  EXPECT_EQ(bits_for_symbols(q.coder.size()), 3u);
  std::vector<double> expected{2.2, 3.6, -2.9, 3.9, -1.6, -3.7};
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(q.decode(s)[0][0], expected[s]);
}

TEST(Quantizer, CoderDecoderMatchesTree) {
  std::mt19937_64 rng(10);
  auto t = generate_synthetic(random_spec(5), 5);
  for (int i = 0; i < 20; ++i) {
    auto tree = random_tree(rng, t, 1 + rng() % 25, i % 2 == 1);
    auto q = extract_quantizer(tree, t);
    for (std::size_t r = 0; r < t.size(); ++r) {
      auto sym = q.locate(t.state(r));
      ASSERT_TRUE(sym);
      EXPECT_EQ(q.decode(*sym).front(), as_vector(t.action(evaluate(tree, t.state(r)))));
      std::size_t hits = 0;
      for (const auto& region : q.coder) hits += q.region_contains(region, t.state(r));
      EXPECT_EQ(hits, 1u);
    }
  }
}

TEST(Quantizer, JsonRoundTrip) {
  std::mt19937_64 rng(12);
  auto t = generate_synthetic(random_spec(5), 5);
  for (bool oblique : {false, true}) {
    auto q = extract_quantizer(random_tree(rng, t, 9, oblique), t);
    auto back = quantizer_from_json(nlohmann::json::parse(quantizer_json(q).dump()));
    EXPECT_EQ(quantizer_json(back).dump(), quantizer_json(q).dump());
  }
}
