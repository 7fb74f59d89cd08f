#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "dtc/model.hpp"

namespace dtc {

// How child entropies are combined into a split score.
enum class Aggregation {
  PaperSum,  // entr(true side) + entr(false side)
  Weighted,  // size-weighted mean of child entropies
};

// Score of a split that leaves one side empty.
inline constexpr double kDegenerateScore = std::numeric_limits<double>::infinity();

class LabelHistogram {
public:
  LabelHistogram() = default;
  explicit LabelHistogram(std::span<const Label> labels) {
    for (Label l : labels) add(l);
  }

  void add(Label label, std::size_t count = 1) {
    if (count == 0) return;
    counts_[label] += count;
    total_ += count;
  }
  std::size_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  std::size_t count(Label label) const {
    auto it = counts_.find(label);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::map<Label, std::size_t>& counts() const { return counts_; }

private:
  std::map<Label, std::size_t> counts_;
  std::size_t total_ = 0;
};

namespace detail {

// -sum p log2 p over the non-zero counts. Terms are accumulated in ascending
// count order, so the result depends only on the multiset of counts.
inline double entropy_of_counts(std::span<const std::size_t> counts, std::size_t total) {
  thread_local std::vector<std::size_t> scratch;
  scratch.clear();
  for (std::size_t c : counts)
    if (c) scratch.push_back(c);
  std::sort(scratch.begin(), scratch.end());
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (std::size_t c : scratch) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

inline double combine(double h_true, std::size_t n_true, double h_false, std::size_t n_false, Aggregation agg) {
  if (n_true == 0 || n_false == 0) return kDegenerateScore;
  if (agg == Aggregation::PaperSum) return h_true + h_false;
  return (static_cast<double>(n_true) * h_true + static_cast<double>(n_false) * h_false) /
         static_cast<double>(n_true + n_false);
}

}  // namespace detail

// Shannon entropy in bits.
inline double entropy(const LabelHistogram& h) {
  if (h.total() == 0) throw EmptyInput("entropy of an empty histogram");
  std::vector<std::size_t> counts;
  counts.reserve(h.distinct());
  for (const auto& [label, c] : h.counts()) counts.push_back(c);
  return detail::entropy_of_counts(counts, h.total());
}

// A view together with the effective label of each of its rows (aligned
// with view.rows()).
struct LabeledView {
  const SubsetView& view;
  std::span<const Label> labels;

  std::size_t size() const { return view.size(); }
};

inline double labels_entropy(std::span<const Label> labels) { return entropy(LabelHistogram(labels)); }

// Score of assigning row i to the true side iff goes_true[i].
inline double score_assignment(std::span<const Label> labels, std::span<const char> goes_true, Aggregation agg) {
  LabelHistogram t, f;
  for (std::size_t i = 0; i < labels.size(); ++i) (goes_true[i] ? t : f).add(labels[i]);
  if (t.total() == 0 || f.total() == 0) return kDegenerateScore;
  return detail::combine(entropy(t), t.total(), entropy(f), f.total(), agg);
}

inline double split_score(const LabeledView& lv, const Predicate& p, Aggregation agg) {
  std::vector<char> side(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) side[i] = holds(p, lv.view.state(i)) ? 1 : 0;
  return score_assignment(lv.labels, side, agg);
}

namespace detail {

// Labels of a view remapped to 0..classes-1 in ascending label order.
struct DenseLabels {
  std::vector<std::uint32_t> index;
  std::vector<Label> values;
  std::size_t classes() const { return values.size(); }
};

inline DenseLabels densify(std::span<const Label> labels) {
  DenseLabels d;
  d.values.assign(labels.begin(), labels.end());
  std::sort(d.values.begin(), d.values.end());
  d.values.erase(std::unique(d.values.begin(), d.values.end()), d.values.end());
  d.index.reserve(labels.size());
  for (Label l : labels)
    d.index.push_back(static_cast<std::uint32_t>(std::lower_bound(d.values.begin(), d.values.end(), l) - d.values.begin()));
  return d;
}

// Two-sided class counts for threshold sweeps. Keeps sum c*log2(c) per side
// so a cheap approximate score is available at each step; exact() recomputes
// through the same path as split_score.
class SweepCounts {
public:
  SweepCounts(const DenseLabels& labels, std::span<const double> xlogx)
      : xlogx_(xlogx), t_(labels.classes(), 0), f_(labels.classes(), 0) {
    for (auto c : labels.index) ++f_[c];
    n_f_ = labels.index.size();
    for (auto c : f_) s_f_ += xlogx_[c];
  }

  // Resets with every row on the true side instead.
  void all_true() {
    std::swap(t_, f_);
    std::swap(n_t_, n_f_);
    std::swap(s_t_, s_f_);
  }

  void move_to_true(std::uint32_t c) { shift(f_, n_f_, s_f_, t_, n_t_, s_t_, c); }
  void move_to_false(std::uint32_t c) { shift(t_, n_t_, s_t_, f_, n_f_, s_f_, c); }

  std::size_t n_true() const { return n_t_; }
  std::size_t n_false() const { return n_f_; }

  double approx(Aggregation agg) const {
    return combine(side_entropy(n_t_, s_t_), n_t_, side_entropy(n_f_, s_f_), n_f_, agg);
  }
  double exact(Aggregation agg) const {
    if (n_t_ == 0 || n_f_ == 0) return kDegenerateScore;
    return combine(entropy_of_counts(t_, n_t_), n_t_, entropy_of_counts(f_, n_f_), n_f_, agg);
  }

private:
  double side_entropy(std::size_t n, double s) const {
    if (n == 0) return 0.0;
    return std::max(0.0, (xlogx_[n] - s) / static_cast<double>(n));
  }
  void shift(std::vector<std::size_t>& from, std::size_t& n_from, double& s_from, std::vector<std::size_t>& to,
             std::size_t& n_to, double& s_to, std::uint32_t c) {
    s_from += xlogx_[from[c] - 1] - xlogx_[from[c]];
    --from[c];
    --n_from;
    s_to += xlogx_[to[c] + 1] - xlogx_[to[c]];
    ++to[c];
    ++n_to;
  }

  std::span<const double> xlogx_;
  std::vector<std::size_t> t_, f_;
  std::size_t n_t_ = 0, n_f_ = 0;
  double s_t_ = 0.0, s_f_ = 0.0;
};

// c*log2(c) for c in [0, n].
inline std::vector<double> xlogx_table(std::size_t n) {
  std::vector<double> t(n + 1, 0.0);
  for (std::size_t c = 2; c <= n; ++c) t[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
  return t;
}

// Slack between approximate and exact scores; exact rescoring happens for
// any candidate within this margin of the incumbent.
inline constexpr double kApproxSlack = 1e-9;

}  // namespace detail

}  // namespace dtc
