#pragma once

#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dtc/determinize.hpp"
#include "dtc/format.hpp"
#include "dtc/model.hpp"
#include "dtc/predicates.hpp"
#include "dtc/runtime.hpp"
#include "dtc/scoring.hpp"

namespace dtc {

enum class SplitStrategy { Axis, Oc1, LogReg, LinSvm };
enum class Determinizer { None, MaxFreq, MinNorm, Random };

struct LearnerConfig {
  SplitStrategy split = SplitStrategy::Axis;
  Determinizer determinizer = Determinizer::None;
  Aggregation aggregation = Aggregation::PaperSum;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_depth;
  double tolerance = 1e-12;              // a node is a leaf iff its entropy <= tolerance
  std::vector<double> minnorm_reference; // empty: origin
  Oc1Params oc1;                         // seed is replaced per node
  TrainerParams trainer;                 // kind follows `split`
  std::size_t workers = 0;               // 0: DTC_WORKERS or 1
};

struct LearnResult {
  DecisionTree tree;
  EffectiveLabeling labeling;  // labels the tree reproduces, per table row
  double seconds = 0.0;
};

namespace detail {

inline std::string describe_rows(const SubsetView& view, std::size_t limit = 5) {
  std::ostringstream os;
  for (std::size_t i = 0; i < view.size() && i < limit; ++i) {
    os << (i ? ", " : "") << '(';
    auto x = view.state(i);
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << format_number(x[k]);
    os << ')';
  }
  if (view.size() > limit) os << ", ...";
  return os.str();
}

inline std::optional<ScoredSplit> choose_split(const LabeledView& lv, const LearnerConfig& cfg, std::uint64_t seed,
                                               std::size_t workers, const Deadline& deadline) {
  switch (cfg.split) {
    case SplitStrategy::Axis:
      return best_axis_split(lv, cfg.aggregation, workers);
    case SplitStrategy::Oc1: {
      Oc1Params p = cfg.oc1;
      p.seed = seed;
      return oc1_split(lv, p, cfg.aggregation, workers, deadline);
    }
    case SplitStrategy::LogReg:
    case SplitStrategy::LinSvm: {
      TrainerParams p = cfg.trainer;
      p.kind = cfg.split == SplitStrategy::LogReg ? TrainerKind::LogisticRegression : TrainerKind::LinearSvm;
      auto axis = best_axis_split(lv, cfg.aggregation, workers);
      auto lc = lc_split(lv, p, cfg.aggregation, seed, workers, deadline);
      if (lc && (!axis || lc->score < axis->score)) return lc;
      return axis;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Greedy recursive induction until every leaf is pure under the effective
// labels. Recursion runs on an explicit stack; nodes come out in pre-order.
inline LearnResult learn(const ControllerTable& table, const LearnerConfig& cfg, const Deadline& deadline = {}) {
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("learner tolerance must be positive");
  const auto started = std::chrono::steady_clock::now();
  const std::size_t workers = cfg.workers ? cfg.workers : workers_from_env();

  EffectiveLabeling labeling;
  switch (cfg.determinizer) {
    case Determinizer::None: labeling = unique_labels(table); break;
    case Determinizer::MinNorm: labeling = minnorm_det(table, cfg.minnorm_reference); break;
    case Determinizer::Random: labeling = random_det(table, cfg.seed); break;
    case Determinizer::MaxFreq: labeling = {LabelKind::Action, std::vector<Label>(table.size())}; break;
  }
  const bool per_node = cfg.determinizer == Determinizer::MaxFreq;

  struct Work {
    SubsetView view;
    std::optional<NodeId> parent;
    bool on_true;
    std::size_t depth;
    std::uint64_t seed;
  };
  std::vector<Node> nodes;
  std::vector<Work> stack;
  stack.push_back({SubsetView(table), std::nullopt, true, 0, cfg.seed});

  while (!stack.empty()) {
    deadline.check();
    Work w = std::move(stack.back());
    stack.pop_back();

    std::vector<Label> labels;
    if (per_node) {
      labels = maxfreq_assign(w.view);
    } else {
      labels.reserve(w.view.size());
      for (RowIndex r : w.view.rows()) labels.push_back(labeling.labels[r]);
    }

    const auto id = static_cast<NodeId>(nodes.size());
    if (w.parent) {
      auto& p = std::get<Inner>(nodes[*w.parent]);
      (w.on_true ? p.on_true : p.on_false) = id;
    }

    if (labels_entropy(labels) <= cfg.tolerance) {
      nodes.emplace_back(Leaf{labels.front()});
      if (per_node)
        for (RowIndex r : w.view.rows()) labeling.labels[r] = labels.front();
      continue;
    }
    if (cfg.max_depth && w.depth >= *cfg.max_depth)
      throw DepthExceeded("impure node at depth " + std::to_string(w.depth) + " (limit " +
                          std::to_string(*cfg.max_depth) + ")");

    LabeledView lv{w.view, labels};
    auto split = detail::choose_split(lv, cfg, w.seed, workers, deadline);
    if (!split)
      throw InconsistentData("no predicate separates states with different labels: " + detail::describe_rows(w.view));
    auto [t, f] = split_view(w.view, [&](std::size_t i) { return holds_unchecked(split->predicate, w.view.state(i)); });
    if (t.empty() || f.empty())
      throw InconsistentData("selected predicate does not split states: " + detail::describe_rows(w.view));

    nodes.emplace_back(Inner{std::move(split->predicate), 0, 0});
    stack.push_back({std::move(f), id, false, w.depth + 1, mix_seed(w.seed, 2)});
    stack.push_back({std::move(t), id, true, w.depth + 1, mix_seed(w.seed, 1)});
  }

  DecisionTree tree(table.state_dim(), labeling.kind, std::move(nodes));
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(tree), std::move(labeling), seconds};
}

inline DecisionTree build_tree(const ControllerTable& table, const LearnerConfig& cfg) {
  return learn(table, cfg).tree;
}

}  // namespace dtc
