#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dtc/export.hpp"
#include "dtc/format.hpp"
#include "dtc/model.hpp"

namespace dtc {

// Reads back the DOT dialect written by emit_dot. Leaf labels are resolved
// against `table`; a `{...}` leaf yields a set-label tree, a bare tuple an
// action tree.
class DotReader {
public:
  DotReader(const ControllerTable& table, const FeatureNames* names = nullptr) : table_(table), names_(names) {}

  DecisionTree read(std::string_view text) const {
    std::map<std::size_t, std::string> labels;
    std::map<std::size_t, std::pair<std::optional<std::size_t>, std::optional<std::size_t>>> edges;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view s = trim(line);
      if (s.size() < 2 || s[0] != 'n' || !std::isdigit(static_cast<unsigned char>(s[1]))) continue;
      std::size_t pos = 1;
      std::size_t from = read_index(s, pos, line_no);
      std::string label = quoted_label(s, line_no);
      auto arrow = s.find("->", pos);
      if (arrow == std::string_view::npos) {
        labels[from] = label;
        continue;
      }
      pos = s.find('n', arrow);
      if (pos == std::string_view::npos) fail(line_no, "edge without target");
      ++pos;
      std::size_t to = read_index(s, pos, line_no);
      auto& slot = label == "true" ? edges[from].first : label == "false" ? edges[from].second : fail_slot(line_no);
      if (slot) fail(line_no, "duplicate edge");
      slot = to;
    }
    if (labels.empty()) throw Error("DOT input contains no nodes");

    std::map<std::size_t, NodeId> ids;
    for (const auto& [n, _] : labels) ids.emplace(n, static_cast<NodeId>(ids.size()));
    std::optional<LabelKind> kind;
    std::vector<Node> nodes;
    for (const auto& [n, label] : labels) {
      auto e = edges.find(n);
      if (e == edges.end()) {
        auto [k, l] = parse_leaf(label);
        if (kind && *kind != k) throw Error("DOT mixes set and single-action leaves");
        kind = k;
        nodes.emplace_back(Leaf{l});
      } else {
        auto [t, f] = e->second;
        if (!t || !f || !ids.count(*t) || !ids.count(*f)) throw Error("inner node n" + std::to_string(n) + " lacks children");
        nodes.emplace_back(Inner{parse_predicate(label), ids.at(*t), ids.at(*f)});
      }
    }
    return DecisionTree(table_.state_dim(), *kind, std::move(nodes), ids.at(labels.begin()->first));
  }

private:
  [[noreturn]] static void fail(std::size_t line, const std::string& what) {
    throw Error("DOT line " + std::to_string(line) + ": " + what);
  }
  [[noreturn]] static std::optional<std::size_t>& fail_slot(std::size_t line) { fail(line, "edge label must be true/false"); }

  static std::size_t read_index(std::string_view s, std::size_t& pos, std::size_t line) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (ec != std::errc{}) fail(line, "bad node id");
    pos = static_cast<std::size_t>(ptr - s.data());
    return v;
  }

  static std::string quoted_label(std::string_view s, std::size_t line) {
    auto at = s.find("label=\"");
    if (at == std::string_view::npos) fail(line, "missing label");
    std::string out;
    for (std::size_t i = at + 7; i < s.size(); ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) out += s[++i];
      else if (s[i] == '"') return out;
      else out += s[i];
    }
    fail(line, "unterminated label");
  }

  std::size_t feature_index(std::string_view name) const {
    name = trim(name);
    if (names_)
      for (std::size_t i = 0; i < names_->size(); ++i)
        if ((*names_)[i] == name) return i;
    if (name.size() > 3 && name.substr(0, 2) == "x[" && name.back() == ']') {
      std::size_t v = 0;
      auto inner = name.substr(2, name.size() - 3);
      auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), v);
      if (ec == std::errc{} && ptr == inner.data() + inner.size() && v < table_.state_dim()) return v;
    }
    throw Error("unknown feature '" + std::string(name) + "'");
  }

  static double number(std::string_view text) {
    auto v = parse_number(trim(text));
    if (!v) throw Error("bad number '" + std::string(text) + "'");
    return *v;
  }

  Predicate parse_predicate(std::string_view text) const {
    auto le = text.find(" <= ");
    if (le == std::string_view::npos) throw Error("predicate without '<='");
    auto lhs = text.substr(0, le);
    double rhs = number(text.substr(le + 4));
    if (lhs.find('*') == std::string_view::npos && trim(lhs) != "0.0") return AxisAligned{feature_index(lhs), rhs};
    Halfspace h{std::vector<double>(table_.state_dim(), 0.0), rhs};
    if (trim(lhs) == "0.0") return h;
    while (true) {
      auto plus = lhs.find(" + ");
      auto term = lhs.substr(0, plus);
      auto star = term.find('*');
      if (star == std::string_view::npos) throw Error("oblique term without coefficient");
      h.weights[feature_index(term.substr(star + 1))] = number(term.substr(0, star));
      if (plus == std::string_view::npos) break;
      lhs.remove_prefix(plus + 3);
    }
    return h;
  }

  ActionId parse_tuple(std::string_view t) const {
    t = trim(t);
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') throw Error("bad action tuple");
    t = t.substr(1, t.size() - 2);
    std::vector<double> u;
    while (true) {
      auto comma = t.find(',');
      u.push_back(number(t.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      t.remove_prefix(comma + 1);
    }
    auto id = table_.find_action(u);
    if (!id) throw Error("leaf action not in the controller's action dictionary");
    return *id;
  }

  std::pair<LabelKind, Label> parse_leaf(std::string_view text) const {
    text = trim(text);
    if (text.empty() || text.front() != '{') return {LabelKind::Action, parse_tuple(text)};
    if (text.back() != '}') throw Error("bad set leaf");
    text = text.substr(1, text.size() - 2);
    std::vector<ActionId> ids;
    while (!text.empty()) {
      auto close = text.find(')');
      if (close == std::string_view::npos) throw Error("bad set leaf");
      ids.push_back(parse_tuple(text.substr(0, close + 1)));
      text.remove_prefix(close + 1);
      if (!text.empty() && text.front() == ',') text.remove_prefix(1);
    }
    auto label = table_.label_of(ActionSet(std::move(ids)));
    if (!label) throw Error("leaf action set does not occur in the controller");
    return {LabelKind::SetLabel, *label};
  }

  const ControllerTable& table_;
  const FeatureNames* names_;
};

inline DecisionTree read_dot(std::string_view text, const ControllerTable& table, const FeatureNames* names = nullptr) {
  return DotReader(table, names).read(text);
}

}  // namespace dtc
