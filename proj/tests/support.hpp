#pragma once

#include <cctype>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtc/dtc.hpp"

namespace dtc::testing {

struct Row {
  std::vector<double> x;
  std::vector<double> u;
};

inline ControllerTable make_table(std::size_t d, std::size_t m, const std::vector<Row>& rows, bool permissive = true) {
  ControllerTableBuilder b(d, m, permissive);
  for (const auto& r : rows) b.add(r.x, r.u);
  return std::move(b).build();
}

// One-dimensional deterministic table with scalar actions.
inline ControllerTable line_table(const std::vector<double>& xs, const std::vector<double>& us) {
  std::vector<Row> rows;
  for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({{xs[i]}, {us[i]}});
  return make_table(1, 1, rows, false);
}

inline ActionId action_id(const ControllerTable& t, std::vector<double> u) { return t.find_action(u).value(); }

// Heater tree over ten rooms: x[1] <= 20.625, then x[4] <= 20.625 on both
// sides; leaves (1,1), (1,0), (0,1), (0,0).
inline DecisionTree heater_tree(const ControllerTable& t) {
  std::vector<Node> nodes;
  nodes.push_back(Inner{AxisAligned{1, 20.625}, 1, 4});
  nodes.push_back(Inner{AxisAligned{4, 20.625}, 2, 3});
  nodes.push_back(Leaf{action_id(t, {1, 1})});
  nodes.push_back(Leaf{action_id(t, {1, 0})});
  nodes.push_back(Inner{AxisAligned{4, 20.625}, 5, 6});
  nodes.push_back(Leaf{action_id(t, {0, 1})});
  nodes.push_back(Leaf{action_id(t, {0, 0})});
  return DecisionTree(10, LabelKind::Action, std::move(nodes));
}

// Table whose actions are exactly the four heater settings, one state each.
inline ControllerTable heater_table() {
  std::vector<Row> rows;
  const double lo = 20.25, hi = 21.0;
  auto state = [](double a, double b) {
    std::vector<double> x(10, 20.5);
    x[1] = a;
    x[4] = b;
    return x;
  };
  rows.push_back({state(lo, lo), {1, 1}});
  rows.push_back({state(lo, hi), {1, 0}});
  rows.push_back({state(hi, lo), {0, 1}});
  rows.push_back({state(hi, hi), {0, 0}});
  return make_table(10, 2, rows, false);
}

// Cart-pole MaxFreq tree over (theta, omega) = (x[0], x[1]).
inline DecisionTree cartpole_tree(const ControllerTable& t) {
  auto a = [&](double v) { return action_id(t, {v}); };
  std::vector<Node> nodes;
  nodes.push_back(Inner{AxisAligned{1, -0.85}, 1, 2});  // 0
  nodes.push_back(Leaf{a(2.2)});                        // 1
  nodes.push_back(Inner{AxisAligned{1, -0.05}, 3, 6});  // 2
  nodes.push_back(Inner{AxisAligned{0, 3.72}, 4, 5});   // 3
  nodes.push_back(Leaf{a(3.6)});                        // 4
  nodes.push_back(Leaf{a(-2.9)});                       // 5
  nodes.push_back(Inner{AxisAligned{0, 2.6}, 7, 10});   // 6
  nodes.push_back(Inner{AxisAligned{1, 0.05}, 8, 9});   // 7
  nodes.push_back(Leaf{a(3.9)});                        // 8
  nodes.push_back(Leaf{a(-1.6)});                       // 9
  nodes.push_back(Leaf{a(-3.7)});                       // 10
  return DecisionTree(2, LabelKind::Action, std::move(nodes));
}

inline ControllerTable cartpole_actions_table() {
  std::vector<Row> rows;
  double k = 0.0;
  for (double u : {2.2, 3.6, -2.9, 3.9, -1.6, -3.7}) rows.push_back({{k++, 0.0}, {u}});
  return make_table(2, 1, rows, false);
}

// Expected nested-conditional body for heater_tree.
inline constexpr const char* kHeaterListing = R"(
if (x[1] <= 20.625) {
	if (x[4] <= 20.625) {
		result[0] = 1.0f;
		result[1] = 1.0f;
	}
	else {
		result[0] = 1.0f;
		result[1] = 0.0f;
	}

}
else {
	if (x[4] <= 20.625) {
		result[0] = 0.0f;
		result[1] = 1.0f;
	}
	else {
		result[0] = 0.0f;
		result[1] = 0.0f;
	}
}
)";

inline std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

// Function body of emitted C with whitespace removed.
inline std::string normalized_body(std::string_view c_source) {
  auto open = c_source.find('{');
  auto close = c_source.rfind('}');
  return strip_whitespace(c_source.substr(open + 1, close - open - 1));
}

}  // namespace dtc::testing
