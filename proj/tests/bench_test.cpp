#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace dtc;

namespace {

BenchmarkOptions quick(std::vector<Method> methods) {
  BenchmarkOptions o;
  o.methods = std::move(methods);
  o.timeout_seconds = 60.0;
  return o;
}

ControllerTable shuffled(const ControllerTable& t, std::uint64_t seed) {
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  ControllerTableBuilder b(t.state_dim(), t.action_dim());
  for (std::size_t r : order)
    for (ActionId a : t.admissible(r)) b.add(t.state(r), t.action(a));
  return std::move(b).build();
}

}  // namespace

TEST(Bench, DeterministicCaseHasNotApplicableDeterminizers) {
  std::vector<BenchmarkCase> suite{{"det", dtc::testing::line_table({1, 2, 3}, {0, 1, 0})}};
  auto opts = quick({kAllMethods.begin(), kAllMethods.end()});
  auto rows = run_benchmark(suite, opts);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].lookup_table_size, 3u);
  for (std::size_t k = 0; k < opts.methods.size(); ++k) {
    auto status = rows[0].cells[k].status;
    if (is_determinizing(opts.methods[k])) EXPECT_EQ(status, BenchmarkCell::Status::NotApplicable);
    else EXPECT_EQ(status, BenchmarkCell::Status::Ok);
  }
  auto text = render_benchmark(rows, opts.methods);
  EXPECT_NE(text.find("n/a"), std::string::npos);
}

TEST(Bench, TinyTimeoutShowsInfinity) {
  std::vector<BenchmarkCase> suite{{"heater", generate_synthetic(two_heater_spec(true), 7)}};
  auto opts = quick({Method::Oc1});
  opts.timeout_seconds = 0.05;
  auto rows = run_benchmark(suite, opts);
  EXPECT_EQ(rows[0].cells[0].status, BenchmarkCell::Status::TimedOut);
  EXPECT_NE(render_benchmark(rows, opts.methods).find("∞"), std::string::npos);
  auto j = benchmark_json(rows, opts.methods);
  EXPECT_EQ(j[0]["paths"]["OC1"], "inf");
  EXPECT_EQ(j[0]["timeout"], true);
}

TEST(Bench, MedianOverSeeds) {
  EXPECT_EQ(detail::lower_median(std::vector<int>{5, 1, 3}), 3);
  EXPECT_EQ(detail::lower_median(std::vector<int>{7}), 7);
  EXPECT_EQ(detail::lower_median(std::vector<int>{4, 2}), 2);
  std::vector<BenchmarkCase> suite{{"r", generate_synthetic(random_spec(5), 5)}};
  auto opts = quick({Method::Cart, Method::MinNorm});
  auto rows = run_benchmark(suite, opts);
  for (const auto& c : rows[0].cells) {
    ASSERT_EQ(c.paths_per_seed.size(), 3u);
    EXPECT_EQ(c.paths, detail::lower_median(c.paths_per_seed));
  }
}

TEST(Bench, RowOrderDoesNotMatter) {
  auto t = generate_synthetic(random_spec(14), 14);
  auto u = shuffled(t, 1);
  for (Method m : {Method::Cart, Method::MinNorm}) {
    auto a = learn(t, method_config(m, 0)).tree.leaf_count();
    auto b = learn(u, method_config(m, 0)).tree.leaf_count();
    EXPECT_EQ(a, b) << method_name(m);
  }
}

TEST(Bench, ReportShape) {
  std::vector<BenchmarkCase> suite{{"a", dtc::testing::line_table({1, 2}, {0, 1})},
                                   {"b", dtc::testing::make_table(1, 1, {{{1}, {0}}, {{1}, {1}}, {{2}, {1}}})}};
  BenchmarkOptions opts;
  opts.seeds = {0};
  auto rows = run_benchmark(suite, opts);
  auto text = render_benchmark(rows, opts.methods);
  std::string header = text.substr(0, text.find('\n'));
  for (Method m : kAllMethods) EXPECT_NE(header.find(std::string(method_name(m))), std::string::npos);
  auto j = benchmark_json(rows, opts.methods);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["paths"].size(), 8u);
  EXPECT_EQ(j[1]["paths"]["MaxFreq"], 1);
  EXPECT_EQ(j[1]["timeout"], false);
}

TEST(Bench, Validation) {
  std::vector<BenchmarkCase> empty;
  EXPECT_THROW(run_benchmark(empty, BenchmarkOptions{}), std::invalid_argument);
  std::vector<BenchmarkCase> one{{"a", dtc::testing::line_table({1}, {0})}};
  BenchmarkOptions none;
  none.seeds.clear();
  EXPECT_THROW(run_benchmark(one, none), std::invalid_argument);
}
