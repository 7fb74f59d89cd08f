#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dtc/model.hpp"
#include "dtc/runtime.hpp"
#include "dtc/scoring.hpp"

namespace dtc {

struct ScoredSplit {
  Predicate predicate;
  double score = kDegenerateScore;
};

// Randomized oblique hill-climbing (an OC1 variant scored by entropy).
struct Oc1Params {
  std::size_t restarts = 10;
  std::size_t jumps = 5;       // random jumps tried per stagnation
  std::size_t max_sweeps = 20; // coefficient sweeps per restart
  std::uint64_t seed = 0;
};

enum class TrainerKind { LogisticRegression, LinearSvm };

struct TrainerParams {
  TrainerKind kind = TrainerKind::LogisticRegression;
  double regularization = 1e-4;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-6;  // gradient-norm stop (logistic regression only)
  std::size_t patience = 100;  // epochs without gain before stopping (SVM only)
};

namespace detail {

inline double score_predicate(const SubsetView& view, const DenseLabels& dense, const Predicate& p, Aggregation agg) {
  std::vector<std::size_t> t(dense.classes(), 0), f(dense.classes(), 0);
  std::size_t nt = 0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (holds_unchecked(p, view.state(i))) {
      ++t[dense.index[i]];
      ++nt;
    } else {
      ++f[dense.index[i]];
    }
  }
  std::size_t nf = view.size() - nt;
  if (nt == 0 || nf == 0) return kDegenerateScore;
  return combine(entropy_of_counts(t, nt), nt, entropy_of_counts(f, nf), nf, agg);
}

// Threshold between two distinct sorted values, guaranteed lo <= t < hi.
inline double split_point(double lo, double hi) {
  double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

struct AxisCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = kDegenerateScore;
};

inline AxisCandidate best_threshold_on_feature(const SubsetView& view, const DenseLabels& dense,
                                               std::span<const double> xlogx, std::size_t feature, Aggregation agg) {
  const std::size_t n = view.size();
  std::vector<std::pair<double, std::uint32_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = {view.state(i)[feature], static_cast<std::uint32_t>(i)};
  std::sort(order.begin(), order.end());

  AxisCandidate best{feature, 0.0, kDegenerateScore};
  SweepCounts counts(dense, xlogx);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    counts.move_to_true(dense.index[order[k].second]);
    if (!(order[k].first < order[k + 1].first)) continue;
    double approx = counts.approx(agg);
    if (!(approx <= best.score + kApproxSlack)) continue;
    double exact = counts.exact(agg);
    if (exact < best.score) {
      best.threshold = split_point(order[k].first, order[k + 1].first);
      best.score = exact;
    }
  }
  return best;
}

}  // namespace detail

// Best x_i <= t over every feature and every midpoint between consecutive
// distinct values. Ties go to the lowest (feature, threshold).
inline std::optional<ScoredSplit> best_axis_split(const LabeledView& lv, Aggregation agg, std::size_t workers = 1) {
  if (lv.size() < 2) return std::nullopt;
  auto dense = detail::densify(lv.labels);
  auto xlogx = detail::xlogx_table(lv.size());
  const std::size_t d = lv.view.table().state_dim();
  auto per_feature = parallel_map(d, lv.size() >= 4096 ? workers : 1, [&](std::size_t f) {
    return detail::best_threshold_on_feature(lv.view, dense, xlogx, f, agg);
  });
  const detail::AxisCandidate* best = nullptr;
  for (const auto& c : per_feature)
    if (c.score < kDegenerateScore && (!best || c.score < best->score)) best = &c;
  if (!best) return std::nullopt;
  return ScoredSplit{AxisAligned{best->feature, best->threshold}, best->score};
}

namespace detail {

// Hill-climbing state for one OC1 restart. Coefficients are (w, b) acting on
// augmented points (x, -1), so w.x - b <= 0 is the predicate.
class ObliqueClimber {
public:
  ObliqueClimber(const SubsetView& view, const DenseLabels& dense, std::span<const double> xlogx, Aggregation agg)
      : view_(view), dense_(dense), xlogx_(xlogx), agg_(agg), d_(view.table().state_dim()) {}

  // Buffers reused across line searches of one restart. `v` holds w.x - b
  // for the current coefficients.
  struct Scratch {
    std::vector<double> v, v_next, q;
    std::vector<std::pair<double, std::uint32_t>> cuts;
    std::vector<std::size_t> t, f;
  };

  double exact(const std::vector<double>& coef) const { return score_predicate(view_, dense_, to_halfspace(coef), agg_); }

  Halfspace to_halfspace(const std::vector<double>& coef) const {
    return Halfspace{std::vector<double>(coef.begin(), coef.begin() + static_cast<std::ptrdiff_t>(d_)), coef[d_]};
  }

  // Same partition and score as score_predicate; also fills s.v_next.
  double rescore(const std::vector<double>& coef, Scratch& s) const {
    const std::size_t n = view_.size();
    std::span<const double> w(coef.data(), d_);
    const double b = coef[d_];
    s.t.assign(dense_.classes(), 0);
    s.f.assign(dense_.classes(), 0);
    s.v_next.resize(n);
    std::size_t nt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double lhs = dot(w, view_.state(i));
      s.v_next[i] = lhs - b;
      if (lhs <= b) {
        ++s.t[dense_.index[i]];
        ++nt;
      } else {
        ++s.f[dense_.index[i]];
      }
    }
    const std::size_t nf = n - nt;
    if (nt == 0 || nf == 0) return kDegenerateScore;
    return combine(entropy_of_counts(s.t, nt), nt, entropy_of_counts(s.f, nf), nf, agg_);
  }

  // Moves coef along `dir` by the step whose induced split scores best.
  // Returns the new exact score if it strictly improves on `current`.
  // `axis` names the single nonzero coordinate of `dir`, when there is one.
  std::optional<double> line_search(std::vector<double>& coef, const std::vector<double>& dir,
                                    std::optional<std::size_t> axis, double current, Scratch& s) const {
    const std::size_t n = view_.size();
    s.q.resize(n);
    s.cuts.clear();
    SweepCounts counts(dense_, xlogx_);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = view_.state(i);
      double qi;
      if (!axis) {
        qi = -dir[d_];
        for (std::size_t k = 0; k < d_; ++k) qi += dir[k] * x[k];
      } else {
        qi = *axis == d_ ? -1.0 : x[*axis];
      }
      s.q[i] = qi;
      // Side at step -> -infinity.
      if (qi > 0.0 || (qi == 0.0 && s.v[i] <= 0.0)) counts.move_to_true(dense_.index[i]);
      if (qi != 0.0) s.cuts.emplace_back(-s.v[i] / qi, static_cast<std::uint32_t>(i));
    }
    if (s.cuts.empty()) return std::nullopt;
    // Order within equal cut values is irrelevant: ties move together.
    std::sort(s.cuts.begin(), s.cuts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const auto& cuts = s.cuts;
    double best_approx = counts.approx(agg_);
    double best_step = cuts.front().first - std::max(1.0, std::abs(cuts.front().first));
    for (std::size_t k = 0; k < cuts.size();) {
      std::size_t end = k;
      while (end < cuts.size() && cuts[end].first == cuts[k].first) {
        std::uint32_t i = cuts[end].second;
        if (s.q[i] > 0.0) counts.move_to_false(dense_.index[i]);
        else counts.move_to_true(dense_.index[i]);
        ++end;
      }
      double a = counts.approx(agg_);
      if (a < best_approx) {
        best_approx = a;
        best_step = end < cuts.size() ? split_point(cuts[k].first, cuts[end].first)
                                      : cuts[k].first + std::max(1.0, std::abs(cuts[k].first));
      }
      k = end;
    }
    if (!std::isfinite(best_step) || !(best_approx < current + kApproxSlack)) return std::nullopt;
    std::vector<double> moved(coef);
    for (std::size_t k = 0; k <= d_; ++k) moved[k] += best_step * dir[k];
    double score = rescore(moved, s);
    if (!(score < current)) return std::nullopt;
    coef = std::move(moved);
    std::swap(s.v, s.v_next);
    return score;
  }

  std::pair<std::vector<double>, double> climb(std::vector<double> coef, double score, const Oc1Params& params,
                                               std::mt19937_64& rng, const Deadline& deadline) const {
    Scratch s;
    rescore(coef, s);
    std::swap(s.v, s.v_next);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(d_ + 1, 0.0);
    for (std::size_t sweep = 0; sweep < params.max_sweeps && score > 0.0; ++sweep) {
      deadline.check();
      bool improved = false;
      for (std::size_t j = 0; j <= d_; ++j) {
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[j] = 1.0;
        if (auto r = line_search(coef, dir, j, score, s)) {
          score = *r;
          improved = true;
        }
      }
      for (std::size_t t = 0; !improved && t < params.jumps; ++t) {
        for (auto& v : dir) v = gauss(rng);
        if (auto r = line_search(coef, dir, std::nullopt, score, s)) {
          score = *r;
          improved = true;
        }
      }
      if (!improved) break;
    }
    return {std::move(coef), score};
  }

private:
  const SubsetView& view_;
  const DenseLabels& dense_;
  std::span<const double> xlogx_;
  Aggregation agg_;
  std::size_t d_;
};

}  // namespace detail

// Oblique split search. Restart 0 starts from the axis optimum, so the result
// never scores worse than best_axis_split; when no restart improves on it,
// the axis predicate itself is returned.
inline std::optional<ScoredSplit> oc1_split(const LabeledView& lv, const Oc1Params& params, Aggregation agg,
                                            std::size_t workers = 1, const Deadline& deadline = {}) {
  auto axis = best_axis_split(lv, agg, workers);
  if (!axis || axis->score <= 0.0) return axis;
  const std::size_t d = lv.view.table().state_dim();
  auto dense = detail::densify(lv.labels);
  auto xlogx = detail::xlogx_table(lv.size());
  detail::ObliqueClimber climber(lv.view, dense, xlogx, agg);

  auto runs = parallel_map(std::max<std::size_t>(1, params.restarts), workers, [&](std::size_t r) {
    std::mt19937_64 rng(mix_seed(params.seed, r));
    std::vector<double> coef(d + 1, 0.0);
    double score = axis->score;
    if (r == 0) {
      const auto& a = std::get<AxisAligned>(axis->predicate);
      coef[a.feature] = 1.0;
      coef[d] = a.threshold;
    } else {
      std::normal_distribution<double> gauss(0.0, 1.0);
      double norm = 0.0;
      while (norm == 0.0) {
        norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          coef[k] = gauss(rng);
          norm += coef[k] * coef[k];
        }
      }
      for (std::size_t k = 0; k < d; ++k) coef[k] /= std::sqrt(norm);
      score = climber.exact(coef);
    }
    return climber.climb(std::move(coef), score, params, rng, deadline);
  });

  const std::pair<std::vector<double>, double>* best = nullptr;
  for (const auto& run : runs)
    if (!best || run.second < best->second) best = &run;
  if (!(best->second < axis->score)) return axis;
  return ScoredSplit{climber.to_halfspace(best->first), best->second};
}

namespace detail {

// Per-view standardization: zero mean, unit variance, constant features
// dropped. Rows are stored densely over the kept features.
struct Standardized {
  std::size_t rows = 0;
  std::vector<std::size_t> kept;
  std::vector<double> mean, scale;
  std::vector<double> z;  // rows x kept.size()

  std::span<const double> row(std::size_t i) const { return {z.data() + i * kept.size(), kept.size()}; }
};

inline Standardized standardize(std::span<const std::span<const double>> points, std::size_t dim) {
  Standardized s;
  s.rows = points.size();
  const double n = static_cast<double>(points.size());
  for (std::size_t f = 0; f < dim; ++f) {
    double mean = 0.0;
    for (auto p : points) mean += p[f];
    mean /= n;
    double var = 0.0;
    for (auto p : points) var += (p[f] - mean) * (p[f] - mean);
    var /= n;
    if (var > 0.0 && std::sqrt(var) > 1e-12 * std::max(1.0, std::abs(mean))) {
      s.kept.push_back(f);
      s.mean.push_back(mean);
      s.scale.push_back(std::sqrt(var));
    }
  }
  const std::size_t k = s.kept.size();
  s.z.resize(points.size() * k);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) s.z[i * k + j] = (points[i][s.kept[j]] - s.mean[j]) / s.scale[j];
  return s;
}

// Fits a linear separator in standardized space and returns it as a raw-space
// halfspace that holds on the positive side (margin >= 0).
inline Halfspace fit_linear(const TrainerParams& params, const Standardized& s, std::span<const char> positive,
                            std::size_t dim, const Deadline& deadline) {
  const std::size_t n = s.rows;
  const std::size_t k = s.kept.size();
  if (k == 0) throw TrainingDegenerate("all training points coincide");
  std::size_t n_pos = 0;
  for (char p : positive) n_pos += p ? 1 : 0;
  if (n_pos == 0 || n_pos == n) throw std::invalid_argument("both classes must be non-empty");

  // Balanced class weights, normalized so they sum to n.
  const double w_pos = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
  const double w_neg = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos));
  const double lambda = params.regularization;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> v(k + 1, 0.0);  // last entry is the intercept
  std::vector<double> grad(k + 1);
  auto margin = [&](std::size_t i, const std::vector<double>& u) {
    auto z = s.row(i);
    double m = u[k];
    for (std::size_t j = 0; j < k; ++j) m += u[j] * z[j];
    return m;
  };

  if (params.kind == TrainerKind::LogisticRegression) {
    double lipschitz = lambda;
    for (std::size_t i = 0; i < n; ++i) {
      auto z = s.row(i);
      double sq = 1.0;
      for (double zj : z) sq += zj * zj;
      lipschitz += 0.25 * inv_n * (positive[i] ? w_pos : w_neg) * sq;
    }
    const double step = 1.0 / lipschitz;
    // Accelerated gradient with adaptive restart: momentum is dropped
    // whenever the step direction opposes the gradient.
    auto gradient = [&](const std::vector<double>& u) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double y = positive[i] ? 1.0 : -1.0;
        double wt = positive[i] ? w_pos : w_neg;
        // d/dm log(1 + exp(-y m)) = -y / (1 + exp(y m))
        double g = -y * wt * inv_n / (1.0 + std::exp(y * margin(i, u)));
        auto z = s.row(i);
        for (std::size_t j = 0; j < k; ++j) grad[j] += g * z[j];
        grad[k] += g;
      }
      for (std::size_t j = 0; j < k; ++j) grad[j] += lambda * u[j];
    };
    std::vector<double> y = v, next(k + 1);
    double t = 1.0;
    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
      if (epoch % 64 == 0) deadline.check();
      gradient(y);
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      if (std::sqrt(norm) < params.tolerance) {
        v = y;
        break;
      }
      double dot_gd = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        next[j] = y[j] - step * grad[j];
        dot_gd += grad[j] * (next[j] - v[j]);
      }
      if (dot_gd > 0.0) {
        t = 1.0;
        y = next;
      } else {
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t j = 0; j <= k; ++j) y[j] = next[j] + (t - 1.0) / t_next * (next[j] - v[j]);
        t = t_next;
      }
      v.swap(next);
    }
  } else {
    // Pegasos-style batch subgradient descent on the regularized hinge loss;
    // the intercept is regularized with the weights. Keeps the best iterate
    // and stops once it has not improved by a relative 1e-6 for `patience`
    // epochs.
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> best = v;
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t last_gain = 1;
    for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
      if (epoch % 64 == 0) deadline.check();
      double hinge = 0.0;
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double y = positive[i] ? 1.0 : -1.0;
        double wt = positive[i] ? w_pos : w_neg;
        double m = y * margin(i, v);
        if (m < 1.0) {
          hinge += wt * (1.0 - m);
          auto z = s.row(i);
          for (std::size_t j = 0; j < k; ++j) grad[j] -= wt * inv_n * y * z[j];
          grad[k] -= wt * inv_n * y;
        }
      }
      double sq = 0.0;
      for (double u : v) sq += u * u;
      double obj = 0.5 * lambda * sq + hinge * inv_n;
      if (obj < best_obj) {
        if (obj < best_obj - 1e-6 * std::abs(best_obj)) last_gain = epoch;
        best_obj = obj;
        best = v;
      }
      if (epoch - last_gain > params.patience) break;
      const double eta = 1.0 / (lambda * static_cast<double>(epoch));
      for (std::size_t j = 0; j <= k; ++j) v[j] -= eta * (lambda * v[j] + grad[j]);
      double vn = 0.0;
      for (double u : v) vn += u * u;
      vn = std::sqrt(vn);
      if (vn > radius)
        for (double& u : v) u *= radius / vn;
    }
    v = std::move(best);
  }

  // margin >= 0  <=>  sum(-v_j / s_j) x_j <= c - sum(v_j m_j / s_j)
  Halfspace h{std::vector<double>(dim, 0.0), v[k]};
  for (std::size_t j = 0; j < k; ++j) {
    h.weights[s.kept[j]] = -v[j] / s.scale[j];
    h.bias -= v[j] * s.mean[j] / s.scale[j];
  }
  return h;
}

}  // namespace detail

// Trains a binary linear classifier separating `positives` from `negatives`.
// The returned halfspace holds on the side classified as positive.
inline Halfspace train_linear_classifier(const TrainerParams& params, const SubsetView& positives,
                                         const SubsetView& negatives, std::uint64_t seed = 0,
                                         const Deadline& deadline = {}) {
  (void)seed;  // both trainers are deterministic full-batch methods
  if (positives.empty() || negatives.empty()) throw std::invalid_argument("both classes must be non-empty");
  std::vector<std::span<const double>> points;
  std::vector<char> positive;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    points.push_back(positives.state(i));
    positive.push_back(1);
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    points.push_back(negatives.state(i));
    positive.push_back(0);
  }
  const std::size_t dim = positives.table().state_dim();
  auto s = detail::standardize(points, dim);
  return detail::fit_linear(params, s, positive, dim, deadline);
}

// One-vs-rest: trains LC_u for every label u in the view and keeps the
// halfspace whose split scores lowest (ties: lowest label).
inline std::optional<ScoredSplit> lc_split(const LabeledView& lv, const TrainerParams& params, Aggregation agg,
                                           std::uint64_t seed = 0, std::size_t workers = 1,
                                           const Deadline& deadline = {}) {
  (void)seed;
  auto dense = detail::densify(lv.labels);
  if (dense.classes() < 2) return std::nullopt;
  const std::size_t dim = lv.view.table().state_dim();
  std::vector<std::span<const double>> points(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) points[i] = lv.view.state(i);
  auto s = detail::standardize(points, dim);
  if (s.kept.empty()) return std::nullopt;

  auto fitted = parallel_map(dense.classes(), workers, [&](std::size_t c) {
    std::vector<char> positive(lv.size());
    for (std::size_t i = 0; i < lv.size(); ++i) positive[i] = dense.index[i] == c ? 1 : 0;
    Halfspace h = detail::fit_linear(params, s, positive, dim, deadline);
    double score = detail::score_predicate(lv.view, dense, h, agg);
    return ScoredSplit{std::move(h), score};
  });
  const ScoredSplit* best = nullptr;
  for (const auto& f : fitted)
    if (f.score < kDegenerateScore && (!best || f.score < best->score)) best = &f;
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace dtc
