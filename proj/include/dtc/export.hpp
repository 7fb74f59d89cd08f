#pragma once

#include <bit>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtc/format.hpp"
#include "dtc/model.hpp"

namespace dtc {

using FeatureNames = std::vector<std::string>;

// Action ids a leaf label stands for (the whole set in set-label mode).
inline std::vector<ActionId> leaf_actions(const ControllerTable& table, LabelKind kind, Label label) {
  if (kind == LabelKind::Action) return {label};
  return table.sets().set(label).ids();
}

namespace detail {

inline std::string feature_name(std::size_t i, const FeatureNames* names) {
  if (names && i < names->size() && !(*names)[i].empty()) return (*names)[i];
  return "x[" + std::to_string(i) + "]";
}

inline std::string predicate_text(const Predicate& p, const FeatureNames* names) {
  if (auto* a = std::get_if<AxisAligned>(&p)) return feature_name(a->feature, names) + " <= " + format_number(a->threshold);
  const auto& h = std::get<Halfspace>(p);
  std::string lhs;
  for (std::size_t i = 0; i < h.weights.size(); ++i) {
    if (h.weights[i] == 0.0) continue;
    if (!lhs.empty()) lhs += " + ";
    lhs += format_number(h.weights[i]) + "*" + feature_name(i, names);
  }
  if (lhs.empty()) lhs = "0.0";
  return lhs + " <= " + format_number(h.bias);
}

inline std::string action_tuple(std::span<const double> u) {
  std::string s = "(";
  for (std::size_t k = 0; k < u.size(); ++k) s += (k ? "," : "") + format_number(u[k]);
  return s + ")";
}

inline std::string leaf_text(const ControllerTable& table, LabelKind kind, Label label) {
  if (kind == LabelKind::Action) return action_tuple(table.action(label));
  std::string s = "{";
  bool first = true;
  for (ActionId a : table.sets().set(label)) {
    s += (first ? "" : ",") + action_tuple(table.action(a));
    first = false;
  }
  return s + "}";
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// Pre-order numbering (root 0, true subtree before false subtree).
inline std::vector<NodeId> preorder(const DecisionTree& tree) {
  std::vector<NodeId> order, stack{tree.root()};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    if (auto* in = std::get_if<Inner>(&tree.node(id))) {
      stack.push_back(in->on_false);
      stack.push_back(in->on_true);
    }
  }
  return order;
}

}  // namespace detail

// Graphviz rendering. Graph node ids follow pre-order; true edges are solid,
// false edges dashed.
inline std::string emit_dot(const DecisionTree& tree, const ControllerTable& table, const FeatureNames* names = nullptr) {
  auto order = detail::preorder(tree);
  std::vector<std::size_t> number(tree.size());
  for (std::size_t i = 0; i < order.size(); ++i) number[order[i]] = i;

  std::ostringstream os;
  os << "digraph decision_tree {\n";
  os << "\tnode [fontname=\"Helvetica\"];\n";
  for (NodeId id : order) {
    const Node& n = tree.node(id);
    if (auto* in = std::get_if<Inner>(&n)) {
      os << "\tn" << number[id] << " [label=\"" << detail::dot_escape(detail::predicate_text(in->predicate, names))
         << "\", shape=box];\n";
    } else {
      os << "\tn" << number[id] << " [label=\""
         << detail::dot_escape(detail::leaf_text(table, tree.label_kind(), std::get<Leaf>(n).label))
         << "\", shape=ellipse];\n";
    }
  }
  for (NodeId id : order) {
    if (auto* in = std::get_if<Inner>(&tree.node(id))) {
      os << "\tn" << number[id] << " -> n" << number[in->on_true] << " [label=\"true\"];\n";
      os << "\tn" << number[id] << " -> n" << number[in->on_false] << " [label=\"false\", style=dashed];\n";
    }
  }
  os << "}\n";
  return os.str();
}

// Nested if/else implementation of the tree. Determinized trees produce
// `void controller(const double* x, float* result)` writing one action
// vector. Set-label trees produce `int controller(...)` that writes every
// admissible action vector back to back and returns how many it wrote.
inline std::string emit_c(const DecisionTree& tree, const ControllerTable& table) {
  const bool permissive = tree.label_kind() == LabelKind::SetLabel;
  const std::size_t m = table.action_dim();
  std::ostringstream os;
  os << (permissive ? "int" : "void") << " controller(const double* x, float* result) {\n";

  struct Frame {
    NodeId id;
    int stage;  // 0: open if, 1: emit else, 2: close
    int depth;
  };
  std::vector<Frame> stack{{tree.root(), 0, 1}};
  auto indent = [&](int depth) { os << std::string(static_cast<std::size_t>(depth), '\t'); };
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Node& n = tree.node(f.id);
    if (auto* leaf = std::get_if<Leaf>(&n)) {
      auto actions = leaf_actions(table, tree.label_kind(), leaf->label);
      std::size_t slot = 0;
      for (ActionId a : actions) {
        auto u = table.action(a);
        for (std::size_t k = 0; k < m; ++k, ++slot) {
          indent(f.depth);
          os << "result[" << slot << "] = " << format_number(u[k]) << "f;\n";
        }
      }
      if (permissive) {
        indent(f.depth);
        os << "return " << actions.size() << ";\n";
      }
      stack.pop_back();
      continue;
    }
    const auto& in = std::get<Inner>(n);
    int depth = f.depth;
    if (f.stage == 0) {
      indent(depth);
      os << "if (" << detail::predicate_text(in.predicate, nullptr) << ") {\n";
      f.stage = 1;
      stack.push_back({in.on_true, 0, depth + 1});
    } else if (f.stage == 1) {
      indent(depth);
      os << "}\n";
      indent(depth);
      os << "else {\n";
      f.stage = 2;
      stack.push_back({in.on_false, 0, depth + 1});
    } else {
      indent(depth);
      os << "}\n";
      stack.pop_back();
    }
  }
  os << "}\n";
  return os.str();
}

struct TreeStats {
  std::size_t total_nodes = 0;
  std::size_t inner_nodes = 0;
  std::size_t decision_paths = 0;
  std::size_t bits_per_symbol = 0;
  double construction_seconds = 0.0;
};

// ceil(log2(paths)), 0 for a single path.
inline std::size_t bits_for_symbols(std::size_t symbols) {
  return symbols <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(symbols - 1));
}

inline TreeStats compute_stats(const DecisionTree& tree, double elapsed_seconds) {
  TreeStats s;
  s.total_nodes = tree.size();
  s.decision_paths = tree.leaf_count();
  s.inner_nodes = tree.inner_count();
  s.bits_per_symbol = bits_for_symbols(s.decision_paths);
  s.construction_seconds = elapsed_seconds;
  return s;
}

inline nlohmann::ordered_json stats_json(const TreeStats& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.total_nodes;
  j["inner_nodes"] = s.inner_nodes;
  j["paths"] = s.decision_paths;
  j["bits"] = s.bits_per_symbol;
  j["seconds"] = s.construction_seconds;
  return j;
}

inline std::string stats_line(const TreeStats& s) {
  std::ostringstream os;
  os << "nodes=" << s.total_nodes << " inner_nodes=" << s.inner_nodes << " paths=" << s.decision_paths
     << " bits=" << s.bits_per_symbol << " seconds=" << format_number(s.construction_seconds);
  return os.str();
}

// ---------------------------------------------------------------------------
// Non-uniform quantizer: one symbol per decision path.

// Half-open interval (lower, upper]; nullopt marks an unbounded side.
struct Interval {
  std::optional<double> lower;
  std::optional<double> upper;
  bool contains(double v) const { return (!lower || *lower < v) && (!upper || v <= *upper); }
};

struct PathConstraint {
  Predicate predicate;
  bool holds = true;
};

struct QuantizerRegion {
  std::size_t symbol = 0;
  std::vector<Interval> box;                 // box coders
  std::vector<PathConstraint> constraints;   // halfspace coders, root first
};

struct QuantizerTables {
  bool boxes = true;  // every region is an axis-aligned box
  std::size_t state_dim = 0;
  std::vector<QuantizerRegion> coder;
  std::vector<std::vector<std::vector<double>>> decoder;  // symbol -> action vectors

  bool region_contains(const QuantizerRegion& r, std::span<const double> x) const {
    if (boxes) {
      for (std::size_t i = 0; i < r.box.size(); ++i)
        if (!r.box[i].contains(x[i])) return false;
      return true;
    }
    for (const auto& c : r.constraints)
      if (holds_unchecked(c.predicate, x) != c.holds) return false;
    return true;
  }

  std::optional<std::size_t> locate(std::span<const double> x) const {
    if (x.size() != state_dim) throw DimensionError("state dimension does not match the quantizer");
    for (const auto& r : coder)
      if (region_contains(r, x)) return r.symbol;
    return std::nullopt;
  }

  const std::vector<std::vector<double>>& decode(std::size_t symbol) const { return decoder.at(symbol); }
};

// Symbols are leaf positions in left-to-right order, starting at 0.
inline QuantizerTables extract_quantizer(const DecisionTree& tree, const ControllerTable& table) {
  QuantizerTables q;
  q.boxes = tree.axis_aligned_only();
  q.state_dim = tree.state_dim();

  struct Frame {
    NodeId id;
    std::vector<PathConstraint> path;
  };
  std::vector<Frame> stack{{tree.root(), {}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (auto* in = std::get_if<Inner>(&tree.node(f.id))) {
      auto false_path = f.path;
      false_path.push_back({in->predicate, false});
      f.path.push_back({in->predicate, true});
      stack.push_back({in->on_false, std::move(false_path)});
      stack.push_back({in->on_true, std::move(f.path)});
      continue;
    }
    QuantizerRegion region;
    region.symbol = q.coder.size();
    if (q.boxes) {
      region.box.assign(q.state_dim, Interval{});
      for (const auto& c : f.path) {
        const auto& a = std::get<AxisAligned>(c.predicate);
        auto& iv = region.box[a.feature];
        if (c.holds) iv.upper = iv.upper ? std::min(*iv.upper, a.threshold) : a.threshold;
        else iv.lower = iv.lower ? std::max(*iv.lower, a.threshold) : a.threshold;
      }
    } else {
      region.constraints = std::move(f.path);
    }
    std::vector<std::vector<double>> actions;
    for (ActionId a : leaf_actions(table, tree.label_kind(), tree.label(f.id))) {
      auto u = table.action(a);
      actions.emplace_back(u.begin(), u.end());
    }
    q.coder.push_back(std::move(region));
    q.decoder.push_back(std::move(actions));
  }
  return q;
}

namespace detail {

inline nlohmann::ordered_json bound_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> bound_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json quantizer_json(const QuantizerTables& q) {
  nlohmann::ordered_json j;
  j["kind"] = q.boxes ? "box" : "halfspaces";
  j["state_dim"] = q.state_dim;
  auto coder = nlohmann::ordered_json::array();
  for (const auto& r : q.coder) {
    nlohmann::ordered_json e;
    e["symbol"] = r.symbol;
    if (q.boxes) {
      auto box = nlohmann::ordered_json::array();
      for (const auto& iv : r.box)
        box.push_back({{"lower", detail::bound_json(iv.lower)}, {"upper", detail::bound_json(iv.upper)}});
      e["box"] = std::move(box);
    } else {
      auto cs = nlohmann::ordered_json::array();
      for (const auto& c : r.constraints) {
        nlohmann::ordered_json cj;
        if (auto* a = std::get_if<AxisAligned>(&c.predicate)) {
          cj["feature"] = a->feature;
          cj["threshold"] = a->threshold;
        } else {
          const auto& h = std::get<Halfspace>(c.predicate);
          cj["weights"] = h.weights;
          cj["bias"] = h.bias;
        }
        cj["holds"] = c.holds;
        cs.push_back(std::move(cj));
      }
      e["constraints"] = std::move(cs);
    }
    coder.push_back(std::move(e));
  }
  j["coder"] = std::move(coder);
  auto decoder = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < q.decoder.size(); ++s) decoder.push_back({{"symbol", s}, {"actions", q.decoder[s]}});
  j["decoder"] = std::move(decoder);
  return j;
}

inline QuantizerTables quantizer_from_json(const nlohmann::json& j) {
  QuantizerTables q;
  q.boxes = j.at("kind").get<std::string>() == "box";
  q.state_dim = j.at("state_dim").get<std::size_t>();
  for (const auto& e : j.at("coder")) {
    QuantizerRegion r;
    r.symbol = e.at("symbol").get<std::size_t>();
    if (q.boxes) {
      for (const auto& iv : e.at("box")) r.box.push_back({detail::bound_from(iv.at("lower")), detail::bound_from(iv.at("upper"))});
    } else {
      for (const auto& c : e.at("constraints")) {
        Predicate p = c.contains("feature")
                          ? Predicate(AxisAligned{c.at("feature").get<std::size_t>(), c.at("threshold").get<double>()})
                          : Predicate(Halfspace{c.at("weights").get<std::vector<double>>(), c.at("bias").get<double>()});
        r.constraints.push_back({std::move(p), c.at("holds").get<bool>()});
      }
    }
    q.coder.push_back(std::move(r));
  }
  for (const auto& e : j.at("decoder"))
    q.decoder.push_back(e.at("actions").get<std::vector<std::vector<double>>>());
  return q;
}

}  // namespace dtc
