#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "dtc/error.hpp"

namespace dtc {

using ActionId = std::uint32_t;
using SetLabelId = std::uint32_t;
using Label = std::uint32_t;
using RowIndex = std::uint32_t;
using NodeId = std::uint32_t;

// What a leaf label refers to: an admissible-set id or a single action id.
enum class LabelKind { SetLabel, Action };

// Sorted, duplicate-free, non-empty set of action ids.
class ActionSet {
public:
  ActionSet(std::initializer_list<ActionId> ids) : ActionSet(std::vector<ActionId>(ids)) {}
  explicit ActionSet(std::vector<ActionId> ids) : ids_(std::move(ids)) {
    if (ids_.empty()) throw InvalidActionSet("admissible action set is empty");
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  std::size_t size() const { return ids_.size(); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  ActionId front() const { return ids_.front(); }
  ActionId operator[](std::size_t i) const { return ids_[i]; }
  bool contains(ActionId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }
  const std::vector<ActionId>& ids() const { return ids_; }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;
  friend auto operator<=>(const ActionSet&, const ActionSet&) = default;

private:
  std::vector<ActionId> ids_;
};

// Bijection between canonical action sets and consecutive set-label ids,
// allocated in order of first registration.
class SetDictionary {
public:
  SetLabelId intern(const ActionSet& s) {
    auto [it, inserted] = index_.try_emplace(s, static_cast<SetLabelId>(sets_.size()));
    if (inserted) sets_.push_back(s);
    return it->second;
  }
  std::optional<SetLabelId> find(const ActionSet& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const ActionSet& set(SetLabelId id) const { return sets_.at(id); }
  std::size_t size() const { return sets_.size(); }

private:
  std::vector<ActionSet> sets_;
  std::map<ActionSet, SetLabelId> index_;
};

// Canonicalizes `ids` and returns its label, registering it if unseen.
inline SetLabelId canonical_set_label(std::vector<ActionId> ids, SetDictionary& dict) {
  return dict.intern(ActionSet(std::move(ids)));
}

class ControllerTableBuilder;

// Immutable lookup-table controller: N distinct states, each with a
// non-empty admissible action set, plus the action and set dictionaries.
class ControllerTable {
public:
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t size() const { return admissible_.size(); }
  std::size_t action_count() const { return action_values_.size() / action_dim_; }
  bool declared_permissive() const { return declared_permissive_; }

  std::span<const double> state(std::size_t row) const {
    return {states_.data() + row * state_dim_, state_dim_};
  }
  const ActionSet& admissible(std::size_t row) const { return admissible_[row]; }
  SetLabelId set_label(std::size_t row) const { return set_labels_[row]; }
  std::span<const double> action(ActionId id) const {
    return {action_values_.data() + std::size_t{id} * action_dim_, action_dim_};
  }
  const SetDictionary& sets() const { return sets_; }

  // Label of a set; nullopt when no row of this table carries it.
  std::optional<SetLabelId> label_of(const ActionSet& s) const {
    for (ActionId id : s)
      if (id >= action_count()) throw InvalidActionSet("action id " + std::to_string(id) + " out of range");
    return sets_.find(s);
  }

  std::optional<ActionId> find_action(std::span<const double> u) const {
    if (u.size() != action_dim_) return std::nullopt;
    for (std::size_t a = 0; a < action_count(); ++a) {
      auto v = action(static_cast<ActionId>(a));
      bool same = true;
      for (std::size_t k = 0; k < action_dim_ && same; ++k)
        same = std::bit_cast<std::uint64_t>(v[k]) == std::bit_cast<std::uint64_t>(u[k]);
      if (same) return static_cast<ActionId>(a);
    }
    return std::nullopt;
  }

  bool is_deterministic() const {
    return std::all_of(admissible_.begin(), admissible_.end(), [](const ActionSet& s) { return s.size() == 1; });
  }

private:
  friend class ControllerTableBuilder;
  ControllerTable() = default;

  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  bool declared_permissive_ = true;
  std::vector<double> states_;
  std::vector<ActionSet> admissible_;
  std::vector<SetLabelId> set_labels_;
  std::vector<double> action_values_;
  SetDictionary sets_;
};

// Accumulates (state, action) pairs. Identical states (bitwise) are merged by
// unioning their actions; identical action vectors share one id.
class ControllerTableBuilder {
public:
  enum class AddResult { NewState, NewAction, Duplicate };

  ControllerTableBuilder(std::size_t state_dim, std::size_t action_dim, bool permissive = true)
      : state_dim_(state_dim), action_dim_(action_dim), permissive_(permissive),
        state_index_(64, RowHash{this}, RowEq{this}), action_index_(64, ActionHash{this}, ActionEq{this}) {
    if (state_dim == 0 || action_dim == 0) throw DimensionError("state and action dimensions must be >= 1");
  }
  ControllerTableBuilder(const ControllerTableBuilder&) = delete;
  ControllerTableBuilder& operator=(const ControllerTableBuilder&) = delete;

  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t rows() const { return actions_.size(); }

  ActionId intern_action(std::span<const double> u) {
    if (u.size() != action_dim_) throw DimensionError("action vector has wrong dimension");
    for (double v : u)
      if (!std::isfinite(v)) throw Error("non-finite action value");
    std::size_t candidate = action_values_.size() / action_dim_;
    action_values_.insert(action_values_.end(), u.begin(), u.end());
    auto [it, inserted] = action_index_.insert(candidate);
    if (!inserted) action_values_.resize(action_values_.size() - action_dim_);
    return static_cast<ActionId>(*it);
  }

  AddResult add(std::span<const double> x, std::span<const double> u) { return add(x, intern_action(u)); }

  AddResult add(std::span<const double> x, ActionId action) {
    if (x.size() != state_dim_) throw DimensionError("state vector has wrong dimension");
    if (action >= action_values_.size() / action_dim_) throw InvalidActionSet("unknown action id");
    for (double v : x)
      if (!std::isfinite(v)) throw Error("non-finite state value");
    std::size_t candidate = actions_.size();
    states_.insert(states_.end(), x.begin(), x.end());
    auto [it, inserted] = state_index_.insert(candidate);
    if (inserted) {
      actions_.push_back({action});
      return AddResult::NewState;
    }
    states_.resize(states_.size() - state_dim_);
    auto& row = actions_[*it];
    if (std::find(row.begin(), row.end(), action) != row.end()) return AddResult::Duplicate;
    row.push_back(action);
    return AddResult::NewAction;
  }

  ControllerTable build() && {
    if (actions_.empty()) throw EmptyController("controller has no rows");
    ControllerTable t;
    t.state_dim_ = state_dim_;
    t.action_dim_ = action_dim_;
    t.declared_permissive_ = permissive_;
    t.states_ = std::move(states_);
    t.action_values_ = std::move(action_values_);
    t.admissible_.reserve(actions_.size());
    t.set_labels_.reserve(actions_.size());
    for (auto& ids : actions_) {
      t.admissible_.emplace_back(std::move(ids));
      t.set_labels_.push_back(t.sets_.intern(t.admissible_.back()));
    }
    actions_.clear();
    return t;
  }

private:
  static std::size_t hash_values(const double* p, std::size_t n) {
    std::size_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
      h ^= std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(p[i]));
      h *= 1099511628211ull;
    }
    return h;
  }
  static bool same_values(const double* a, const double* b, std::size_t n) {
    return std::memcmp(a, b, n * sizeof(double)) == 0;
  }

  struct RowHash {
    const ControllerTableBuilder* b;
    std::size_t operator()(std::size_t r) const { return hash_values(b->states_.data() + r * b->state_dim_, b->state_dim_); }
  };
  struct RowEq {
    const ControllerTableBuilder* b;
    bool operator()(std::size_t r, std::size_t s) const {
      return same_values(b->states_.data() + r * b->state_dim_, b->states_.data() + s * b->state_dim_, b->state_dim_);
    }
  };
  struct ActionHash {
    const ControllerTableBuilder* b;
    std::size_t operator()(std::size_t a) const {
      return hash_values(b->action_values_.data() + a * b->action_dim_, b->action_dim_);
    }
  };
  struct ActionEq {
    const ControllerTableBuilder* b;
    bool operator()(std::size_t a, std::size_t c) const {
      return same_values(b->action_values_.data() + a * b->action_dim_,
                         b->action_values_.data() + c * b->action_dim_, b->action_dim_);
    }
  };

  std::size_t state_dim_;
  std::size_t action_dim_;
  bool permissive_;
  std::vector<double> states_;
  std::vector<std::vector<ActionId>> actions_;
  std::vector<double> action_values_;
  std::unordered_set<std::size_t, RowHash, RowEq> state_index_;
  std::unordered_set<std::size_t, ActionHash, ActionEq> action_index_;
};

// Read-only subset of table rows, kept sorted.
class SubsetView {
public:
  explicit SubsetView(const ControllerTable& table) : table_(&table), rows_(table.size()) {
    for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i] = static_cast<RowIndex>(i);
  }
  SubsetView(const ControllerTable& table, std::vector<RowIndex> rows) : table_(&table), rows_(std::move(rows)) {
    std::sort(rows_.begin(), rows_.end());
    if (std::adjacent_find(rows_.begin(), rows_.end()) != rows_.end())
      throw std::invalid_argument("subset view rows must be unique");
    if (!rows_.empty() && rows_.back() >= table.size()) throw std::out_of_range("subset view row out of range");
  }

  const ControllerTable& table() const { return *table_; }
  std::span<const RowIndex> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  RowIndex operator[](std::size_t i) const { return rows_[i]; }
  std::span<const double> state(std::size_t i) const { return table_->state(rows_[i]); }

private:
  struct Presorted {};
  SubsetView(const ControllerTable& table, std::vector<RowIndex> rows, Presorted)
      : table_(&table), rows_(std::move(rows)) {}
  template <class Pred>
  friend std::pair<SubsetView, SubsetView> split_view(const SubsetView&, Pred&&);

  const ControllerTable* table_;
  std::vector<RowIndex> rows_;
};

// Splits by an arbitrary row predicate; order is preserved on both sides.
template <class Pred>
std::pair<SubsetView, SubsetView> split_view(const SubsetView& view, Pred&& goes_left) {
  std::vector<RowIndex> left, right;
  for (std::size_t i = 0; i < view.size(); ++i) (goes_left(i) ? left : right).push_back(view[i]);
  return {SubsetView(view.table(), std::move(left), SubsetView::Presorted{}),
          SubsetView(view.table(), std::move(right), SubsetView::Presorted{})};
}

// x[feature] <= threshold
struct AxisAligned {
  std::size_t feature = 0;
  double threshold = 0.0;
  friend bool operator==(const AxisAligned&, const AxisAligned&) = default;
};

// weights . x <= bias
struct Halfspace {
  std::vector<double> weights;
  double bias = 0.0;
  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

using Predicate = std::variant<AxisAligned, Halfspace>;

inline double dot(std::span<const double> w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

// Unchecked evaluation; callers guarantee dimensions.
inline bool holds_unchecked(const Predicate& p, std::span<const double> x) {
  if (auto* a = std::get_if<AxisAligned>(&p)) return x[a->feature] <= a->threshold;
  const auto& h = std::get<Halfspace>(p);
  return dot(h.weights, x) <= h.bias;
}

inline bool holds(const Predicate& p, std::span<const double> x) {
  if (auto* a = std::get_if<AxisAligned>(&p)) {
    if (a->feature >= x.size()) throw DimensionError("predicate feature index exceeds state dimension");
  } else if (std::get<Halfspace>(p).weights.size() != x.size()) {
    throw DimensionError("halfspace weight count differs from state dimension");
  }
  return holds_unchecked(p, x);
}

inline bool is_axis_aligned(const Predicate& p) { return std::holds_alternative<AxisAligned>(p); }

// First view holds the rows where `p` is true.
inline std::pair<SubsetView, SubsetView> partition(const SubsetView& view, const Predicate& p) {
  return split_view(view, [&](std::size_t i) { return holds(p, view.state(i)); });
}

struct Leaf {
  Label label = 0;
  friend bool operator==(const Leaf&, const Leaf&) = default;
};

struct Inner {
  Predicate predicate;
  NodeId on_true = 0;
  NodeId on_false = 0;
};

using Node = std::variant<Leaf, Inner>;

// Full binary tree; inner nodes carry predicates (true goes to on_true),
// leaves carry labels whose meaning is given by label_kind().
class DecisionTree {
public:
  DecisionTree(std::size_t state_dim, LabelKind kind, std::vector<Node> nodes, NodeId root = 0)
      : state_dim_(state_dim), kind_(kind), nodes_(std::move(nodes)), root_(root) {
    validate();
  }

  static DecisionTree single_leaf(std::size_t state_dim, LabelKind kind, Label label) {
    return DecisionTree(state_dim, kind, {Leaf{label}});
  }

  std::size_t state_dim() const { return state_dim_; }
  LabelKind label_kind() const { return kind_; }
  NodeId root() const { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) {
      return std::holds_alternative<Leaf>(n);
    }));
  }
  std::size_t inner_count() const { return nodes_.size() - leaf_count(); }
  bool axis_aligned_only() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) {
      auto* in = std::get_if<Inner>(&n);
      return !in || is_axis_aligned(in->predicate);
    });
  }

  // Leaves in left-to-right (true-before-false) depth-first order.
  std::vector<NodeId> leaves_in_order() const {
    std::vector<NodeId> out, stack{root_};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      if (auto* in = std::get_if<Inner>(&nodes_[id])) {
        stack.push_back(in->on_false);
        stack.push_back(in->on_true);
      } else {
        out.push_back(id);
      }
    }
    return out;
  }

  NodeId leaf_for(std::span<const double> x) const {
    if (x.size() != state_dim_)
      throw DimensionError("state has dimension " + std::to_string(x.size()) + ", tree expects " +
                           std::to_string(state_dim_));
    NodeId id = root_;
    while (auto* in = std::get_if<Inner>(&nodes_[id])) id = holds_unchecked(in->predicate, x) ? in->on_true : in->on_false;
    return id;
  }

  Label label(NodeId leaf) const { return std::get<Leaf>(nodes_.at(leaf)).label; }

  // Structural equality from the root, independent of node numbering.
  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    if (a.state_dim_ != b.state_dim_ || a.kind_ != b.kind_ || a.size() != b.size()) return false;
    std::vector<std::pair<NodeId, NodeId>> stack{{a.root_, b.root_}};
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      const Node& nx = a.nodes_[x];
      const Node& ny = b.nodes_[y];
      if (nx.index() != ny.index()) return false;
      if (auto* lx = std::get_if<Leaf>(&nx)) {
        if (!(*lx == std::get<Leaf>(ny))) return false;
        continue;
      }
      const auto& ix = std::get<Inner>(nx);
      const auto& iy = std::get<Inner>(ny);
      if (!(ix.predicate == iy.predicate)) return false;
      stack.emplace_back(ix.on_true, iy.on_true);
      stack.emplace_back(ix.on_false, iy.on_false);
    }
    return true;
  }

private:
  void validate() const {
    if (nodes_.empty() || root_ >= nodes_.size()) throw std::invalid_argument("tree has no root");
    std::vector<int> parents(nodes_.size(), 0);
    for (const Node& n : nodes_) {
      auto* in = std::get_if<Inner>(&n);
      if (!in) continue;
      if (in->on_true >= nodes_.size() || in->on_false >= nodes_.size())
        throw std::invalid_argument("tree child index out of range");
      ++parents[in->on_true];
      ++parents[in->on_false];
      if (auto* a = std::get_if<AxisAligned>(&in->predicate); a && a->feature >= state_dim_)
        throw DimensionError("predicate feature index exceeds state dimension");
      if (auto* h = std::get_if<Halfspace>(&in->predicate); h && h->weights.size() != state_dim_)
        throw DimensionError("halfspace weight count differs from state dimension");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      int expected = i == root_ ? 0 : 1;
      if (parents[i] != expected) throw std::invalid_argument("tree is not a rooted full binary tree");
    }
    // Unit in-degree everywhere but the root still admits detached cycles.
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{root_};
    std::size_t reached = 0;
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      if (seen[id]) throw std::invalid_argument("tree contains a cycle");
      seen[id] = 1;
      ++reached;
      if (auto* in = std::get_if<Inner>(&nodes_[id])) {
        stack.push_back(in->on_true);
        stack.push_back(in->on_false);
      }
    }
    if (reached != nodes_.size()) throw std::invalid_argument("tree has unreachable nodes");
  }

  std::size_t state_dim_;
  LabelKind kind_;
  std::vector<Node> nodes_;
  NodeId root_;
};

inline Label evaluate(const DecisionTree& tree, std::span<const double> x) { return tree.label(tree.leaf_for(x)); }

}  // namespace dtc
