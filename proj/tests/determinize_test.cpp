#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"

using namespace dtc;
using dtc::testing::action_id;
using dtc::testing::make_table;
using dtc::testing::Row;

namespace {

ControllerTable abc_table() {
  // x1:{a,b}, x2:{b}, x3:{b,c} with a=0, b=1, c=2
  return make_table(1, 1, {{{1}, {0}}, {{1}, {1}}, {{2}, {1}}, {{3}, {1}}, {{3}, {2}}});
}

}  // namespace

TEST(UniqueLabels, SetEquality) {
  auto t = make_table(1, 1, {{{1}, {0}}, {{2}, {0}}, {{2}, {1}}, {{3}, {1}}, {{3}, {0}}});
  auto l = unique_labels(t);
  EXPECT_EQ(l.kind, LabelKind::SetLabel);
  std::set<Label> distinct(l.labels.begin(), l.labels.end());
  EXPECT_EQ(distinct.size(), 2u);
  EXPECT_EQ(l.labels[1], l.labels[2]);
}

TEST(UniqueLabels, AllSubsetsOfThreeActions) {
  std::vector<Row> rows;
  for (int mask = 1; mask < 8; ++mask)
    for (int a = 0; a < 3; ++a)
      if (mask & (1 << a)) rows.push_back({{double(mask)}, {double(a)}});
  auto t = make_table(1, 1, rows);
  auto l = unique_labels(t);
  std::set<Label> distinct(l.labels.begin(), l.labels.end());
  EXPECT_EQ(distinct.size(), 7u);
}

TEST(UniqueLabels, DeterministicTableLabelsFollowActions) {
  auto t = dtc::testing::line_table({1, 2, 3, 4}, {5, 6, 5, 7});
  auto l = unique_labels(t);
  for (std::size_t r = 0; r < t.size(); ++r)
    for (std::size_t s = 0; s < t.size(); ++s)
      EXPECT_EQ(l.labels[r] == l.labels[s], t.admissible(r).front() == t.admissible(s).front());
}

TEST(MinNorm, Examples) {
  auto t = make_table(1, 1, {{{0}, {3.9}}, {{0}, {-3.7}}, {{1}, {2.0}}});
  auto l = minnorm_det(t);
  EXPECT_EQ(l.kind, LabelKind::Action);
  EXPECT_EQ(l.labels[0], action_id(t, {-3.7}));
  EXPECT_EQ(l.labels[1], action_id(t, {2.0}));
}

TEST(MinNorm, TieGoesToLowestActionId) {
  auto t = make_table(1, 2, {{{0}, {0, 1}}, {{0}, {1, 0}}});
  auto l = minnorm_det(t);
  EXPECT_EQ(l.labels[0], std::min(action_id(t, {1, 0}), action_id(t, {0, 1})));
}

TEST(MinNorm, ReferenceShiftsTheChoice) {
  auto t = make_table(1, 1, {{{0}, {3.9}}, {{0}, {-3.7}}});
  std::vector<double> ref{3.0};
  EXPECT_EQ(minnorm_det(t, ref).labels[0], action_id(t, {3.9}));
  std::vector<double> bad{1.0, 2.0};
  EXPECT_THROW(minnorm_det(t, bad), DimensionError);
}

TEST(MinNorm, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto t = generate_synthetic(random_spec(seed), seed);
    auto l = minnorm_det(t);
    for (std::size_t r = 0; r < t.size(); ++r) {
      double best = std::numeric_limits<double>::infinity();
      ActionId arg = 0;
      for (ActionId a : t.admissible(r)) {
        double n = 0.0;
        for (double v : t.action(a)) n += v * v;
        if (n < best) best = n, arg = a;
      }
      EXPECT_EQ(l.labels[r], arg);
    }
  }
}

TEST(RandomDet, SingletonsUnchanged) {
  auto t = dtc::testing::line_table({1, 2, 3}, {4, 5, 6});
  auto l = random_det(t, 17);
  for (std::size_t r = 0; r < t.size(); ++r) EXPECT_EQ(l.labels[r], t.admissible(r).front());
}

TEST(RandomDet, DeterministicPerSeedAndSound) {
  auto t = generate_synthetic(random_spec(3), 3);
  auto a = random_det(t, 9), b = random_det(t, 9);
  EXPECT_EQ(a.labels, b.labels);
  for (std::size_t r = 0; r < t.size(); ++r) EXPECT_TRUE(t.admissible(r).contains(a.labels[r]));
}

TEST(RandomDet, UniformOverTheSet) {
  std::vector<Row> rows;
  for (int i = 0; i < 10000; ++i)
    for (int a = 0; a < 3; ++a) rows.push_back({{double(i)}, {double(a)}});
  auto t = make_table(1, 1, rows);
  auto l = random_det(t, 2024);
  std::array<double, 3> count{};
  for (Label x : l.labels) count[x] += 1;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - 10000.0 / 3) * (c - 10000.0 / 3) / (10000.0 / 3);
  // 2 degrees of freedom, 99.9% quantile
  EXPECT_LT(chi2, 13.82);
}

TEST(MaxFreq, SharedActionWins) {
  auto t = abc_table();
  auto labels = maxfreq_assign(SubsetView(t));
  auto freq = action_frequencies(SubsetView(t));
  EXPECT_EQ(freq, (std::vector<std::size_t>{1, 3, 1}));
  for (Label l : labels) EXPECT_EQ(l, action_id(t, {1}));
  EXPECT_EQ(labels_entropy(labels), 0.0);
}

TEST(MaxFreq, DisjointSetsStaySplit) {
  auto t = make_table(1, 1, {{{1}, {0}}, {{2}, {1}}});
  auto labels = maxfreq_assign(SubsetView(t));
  EXPECT_NE(labels[0], labels[1]);
  EXPECT_DOUBLE_EQ(labels_entropy(labels), 1.0);
}

TEST(MaxFreq, SingletonsAreIdentity) {
  auto t = dtc::testing::line_table({1, 2, 3}, {0, 1, 0});
  auto labels = maxfreq_assign(SubsetView(t));
  for (std::size_t r = 0; r < t.size(); ++r) EXPECT_EQ(labels[r], t.admissible(r).front());
}

TEST(MaxFreq, TiesGoToLowestId) {
  auto t = make_table(1, 1, {{{1}, {5}}, {{1}, {6}}});
  EXPECT_EQ(maxfreq_assign(SubsetView(t))[0], action_id(t, {5}));
}

TEST(MaxFreq, SubViewCanDisagreeWithParent) {
  // parent: b is most frequent; within {x3, x4} alone c is
  auto t = make_table(1, 1, {{{1}, {1}}, {{2}, {1}}, {{3}, {1}}, {{3}, {2}}, {{4}, {2}}});
  auto parent = maxfreq_assign(SubsetView(t));
  SubsetView sub(t, {2, 3});
  auto child = maxfreq_assign(sub);
  EXPECT_EQ(parent[2], action_id(t, {1}));
  EXPECT_EQ(child[0], action_id(t, {2}));
}

TEST(Determinizers, AlwaysInsideTheAdmissibleSet) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    auto t = generate_synthetic(random_spec(seed), seed);
    auto m = minnorm_det(t);
    auto r = random_det(t, seed);
    auto f = maxfreq_assign(SubsetView(t));
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_TRUE(t.admissible(i).contains(m.labels[i]));
      EXPECT_TRUE(t.admissible(i).contains(r.labels[i]));
      EXPECT_TRUE(t.admissible(i).contains(f[i]));
    }
  }
}
