#pragma once

#include <random>
#include <span>
#include <vector>

#include "dtc/model.hpp"

namespace dtc {

// Per-row labels the learner must reproduce exactly.
struct EffectiveLabeling {
  LabelKind kind = LabelKind::SetLabel;
  std::vector<Label> labels;  // indexed by table row
};

// Each distinct admissible set becomes one label; nothing is lost.
inline EffectiveLabeling unique_labels(const ControllerTable& table) {
  EffectiveLabeling out{LabelKind::SetLabel, std::vector<Label>(table.size())};
  for (std::size_t r = 0; r < table.size(); ++r) out.labels[r] = table.set_label(r);
  return out;
}

// Admissible action closest (Euclidean) to `reference`; empty reference means
// the origin. Ties go to the lowest action id.
inline EffectiveLabeling minnorm_det(const ControllerTable& table, std::span<const double> reference = {}) {
  std::vector<double> ref(reference.begin(), reference.end());
  if (ref.empty()) ref.assign(table.action_dim(), 0.0);
  if (ref.size() != table.action_dim()) throw DimensionError("min-norm reference has wrong dimension");
  std::vector<double> dist(table.action_count());
  for (std::size_t a = 0; a < dist.size(); ++a) {
    auto u = table.action(static_cast<ActionId>(a));
    double sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) sq += (u[k] - ref[k]) * (u[k] - ref[k]);
    dist[a] = sq;
  }
  EffectiveLabeling out{LabelKind::Action, std::vector<Label>(table.size())};
  for (std::size_t r = 0; r < table.size(); ++r) {
    const ActionSet& s = table.admissible(r);
    ActionId best = s.front();
    for (ActionId a : s)
      if (dist[a] < dist[best]) best = a;
    out.labels[r] = best;
  }
  return out;
}

// Uniformly random admissible action per row, reproducible per seed.
inline EffectiveLabeling random_det(const ControllerTable& table, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EffectiveLabeling out{LabelKind::Action, std::vector<Label>(table.size())};
  for (std::size_t r = 0; r < table.size(); ++r) {
    const ActionSet& s = table.admissible(r);
    if (s.size() == 1) {
      out.labels[r] = s.front();
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    out.labels[r] = s[pick(rng)];
  }
  return out;
}

// Number of rows in the view whose admissible set contains each action.
inline std::vector<std::size_t> action_frequencies(const SubsetView& view) {
  std::vector<std::size_t> freq(view.table().action_count(), 0);
  for (RowIndex r : view.rows())
    for (ActionId a : view.table().admissible(r)) ++freq[a];
  return freq;
}

// MaxFreq: every row takes the action of its own admissible set that is most
// frequent across the view (ties: lowest action id). Result is aligned with
// view.rows(). Must be recomputed for every node.
inline std::vector<Label> maxfreq_assign(const SubsetView& view) {
  auto freq = action_frequencies(view);
  std::vector<Label> out(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) {
    const ActionSet& s = view.table().admissible(view[i]);
    ActionId best = s.front();
    for (ActionId a : s)
      if (freq[a] > freq[best]) best = a;
    out[i] = best;
  }
  return out;
}

}  // namespace dtc
