#pragma once

#include <algorithm>
#include <array>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dtc/ingest.hpp"
#include "dtc/learner.hpp"
#include "dtc/runtime.hpp"
#include "dtc/verify.hpp"

namespace dtc {

// Comparison columns: four permissive-preserving predicate classes followed
// by determinizing methods with axis or logistic-regression splits.
enum class Method { Cart, LinSvm, LogReg, Oc1, MaxFreq, MaxFreqLc, MinNorm, MinNormLc };

inline constexpr std::array<Method, 8> kAllMethods = {Method::Cart,    Method::LinSvm,    Method::LogReg,
                                                      Method::Oc1,     Method::MaxFreq,   Method::MaxFreqLc,
                                                      Method::MinNorm, Method::MinNormLc};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Cart: return "CART";
    case Method::LinSvm: return "LinSVM";
    case Method::LogReg: return "LogReg";
    case Method::Oc1: return "OC1";
    case Method::MaxFreq: return "MaxFreq";
    case Method::MaxFreqLc: return "MaxFreqLC";
    case Method::MinNorm: return "MinNorm";
    case Method::MinNormLc: return "MinNormLC";
  }
  return "?";
}

inline bool is_determinizing(Method m) {
  return m == Method::MaxFreq || m == Method::MaxFreqLc || m == Method::MinNorm || m == Method::MinNormLc;
}

inline LearnerConfig method_config(Method m, std::uint64_t seed) {
  LearnerConfig c;
  c.seed = seed;
  c.workers = 1;
  switch (m) {
    case Method::Cart: break;
    case Method::LinSvm: c.split = SplitStrategy::LinSvm; break;
    case Method::LogReg: c.split = SplitStrategy::LogReg; break;
    case Method::Oc1: c.split = SplitStrategy::Oc1; break;
    case Method::MaxFreq: c.determinizer = Determinizer::MaxFreq; break;
    case Method::MaxFreqLc:
      c.determinizer = Determinizer::MaxFreq;
      c.split = SplitStrategy::LogReg;
      break;
    case Method::MinNorm: c.determinizer = Determinizer::MinNorm; break;
    case Method::MinNormLc:
      c.determinizer = Determinizer::MinNorm;
      c.split = SplitStrategy::LogReg;
      break;
  }
  return c;
}

struct BenchmarkCase {
  std::string name;
  ControllerTable table;
};

struct BenchmarkCell {
  enum class Status { Ok, NotApplicable, TimedOut, Failed };
  Status status = Status::Ok;
  std::size_t paths = 0;     // median over seeds
  double seconds = 0.0;      // median over seeds
  std::vector<std::size_t> paths_per_seed;
  std::string error;
};

struct BenchmarkRow {
  std::string name;
  std::size_t lookup_table_size = 0;
  std::vector<BenchmarkCell> cells;  // aligned with the method list
};

struct BenchmarkOptions {
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  double timeout_seconds = 60.0;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t workers = 1;
};

namespace detail {

template <class T>
T lower_median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

inline BenchmarkCell run_cell(const ControllerTable& table, Method m, const BenchmarkOptions& opts) {
  BenchmarkCell cell;
  if (is_determinizing(m) && table.is_deterministic()) {
    cell.status = BenchmarkCell::Status::NotApplicable;
    return cell;
  }
  std::vector<double> seconds;
  for (std::uint64_t seed : opts.seeds) {
    try {
      auto result = learn(table, method_config(m, seed), Deadline::after_seconds(opts.timeout_seconds));
      if (!check_exact(result.tree, table, result.labeling).passed()) {
        cell.status = BenchmarkCell::Status::Failed;
        cell.error = "tree does not reproduce the controller";
        return cell;
      }
      cell.paths_per_seed.push_back(result.tree.leaf_count());
      seconds.push_back(result.seconds);
    } catch (const Timeout&) {
      cell.status = BenchmarkCell::Status::TimedOut;
      return cell;
    } catch (const std::exception& e) {
      cell.status = BenchmarkCell::Status::Failed;
      cell.error = e.what();
      return cell;
    }
  }
  cell.paths = lower_median(cell.paths_per_seed);
  cell.seconds = lower_median(seconds);
  return cell;
}

inline std::string cell_text(const BenchmarkCell& c) {
  switch (c.status) {
    case BenchmarkCell::Status::Ok: return std::to_string(c.paths);
    case BenchmarkCell::Status::NotApplicable: return "n/a";
    case BenchmarkCell::Status::TimedOut: return "∞";
    case BenchmarkCell::Status::Failed: return "error";
  }
  return "?";
}

// Display width of UTF-8 text (counts code points).
inline std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace detail

// Runs every method on every case with a per-run wall-clock limit and
// reports median decision-path counts over the seeds. Cells are independent
// and run on up to opts.workers threads.
inline std::vector<BenchmarkRow> run_benchmark(std::span<const BenchmarkCase> suite, const BenchmarkOptions& opts) {
  if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
  if (opts.seeds.empty()) throw std::invalid_argument("benchmark needs at least one seed");
  const std::size_t per_row = opts.methods.size();
  auto cells = parallel_map(suite.size() * per_row, opts.workers, [&](std::size_t i) {
    return detail::run_cell(suite[i / per_row].table, opts.methods[i % per_row], opts);
  });
  std::vector<BenchmarkRow> rows;
  for (std::size_t c = 0; c < suite.size(); ++c) {
    BenchmarkRow row{suite[c].name, suite[c].table.size(), {}};
    for (std::size_t k = 0; k < per_row; ++k) row.cells.push_back(std::move(cells[c * per_row + k]));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string render_benchmark(const std::vector<BenchmarkRow>& rows, const std::vector<Method>& methods) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Case", "Lookup table"};
  for (Method m : methods) header.emplace_back(method_name(m));
  grid.push_back(header);
  for (const auto& r : rows) {
    std::vector<std::string> line{r.name, std::to_string(r.lookup_table_size)};
    for (const auto& c : r.cells) line.push_back(detail::cell_text(c));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid)
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], detail::display_width(line[k]));
  std::ostringstream os;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < grid[i].size(); ++k) {
      const auto& s = grid[i][k];
      std::string pad(width[k] - detail::display_width(s), ' ');
      if (k == 0) os << s << pad;
      else os << "  " << pad << s;
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

inline nlohmann::ordered_json benchmark_json(const std::vector<BenchmarkRow>& rows, const std::vector<Method>& methods) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["case"] = r.name;
    row["lookup_table"] = r.lookup_table_size;
    nlohmann::ordered_json paths, seconds;
    bool timeout = false;
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const auto& c = r.cells[k];
      std::string key(method_name(methods[k]));
      switch (c.status) {
        case BenchmarkCell::Status::Ok:
          paths[key] = c.paths;
          seconds[key] = c.seconds;
          break;
        case BenchmarkCell::Status::NotApplicable:
          paths[key] = "n/a";
          seconds[key] = nullptr;
          break;
        case BenchmarkCell::Status::TimedOut:
          paths[key] = "inf";
          seconds[key] = nullptr;
          timeout = true;
          break;
        case BenchmarkCell::Status::Failed:
          paths[key] = "error: " + c.error;
          seconds[key] = nullptr;
          break;
      }
    }
    row["paths"] = std::move(paths);
    row["seconds"] = std::move(seconds);
    row["timeout"] = timeout;
    out.push_back(std::move(row));
  }
  return out;
}

// Synthetic stand-ins for the case studies: a ten-feature two-heater
// controller, a cart-pole-shaped single-input controller, a deterministic
// grid controller and a noisy permissive one.
inline std::vector<BenchmarkCase> bundled_suite() {
  std::vector<BenchmarkCase> suite;
  suite.push_back({"two-heater-10d", generate_synthetic(two_heater_spec(true), 7)});
  suite.push_back({"cartpole-like", generate_synthetic(cartpole_like_spec(), 11)});
  suite.push_back({"deterministic-3d", generate_synthetic(deterministic_grid_spec(), 3)});
  SyntheticSpec spec;
  spec.grid = {FeatureGrid{-2.0, 0.25, 16}, FeatureGrid{0.0, 0.5, 12}, FeatureGrid{1.0, 1.0, 6}};
  spec.cuts = {{0, -0.9}, {0, 0.6}, {1, 2.2}, {2, 3.5}};
  spec.actions = {{-2, 0.5}, {-1, 0}, {0, 1}, {1, -0.5}, {2, 0}, {3, 1.5}, {4, -1}, {5, 0.25}};
  for (std::size_t r = 0; r < 12; ++r)
    spec.region_sets.push_back({static_cast<ActionId>(r % 8), static_cast<ActionId>((r * 3 + 1) % 8)});
  spec.noise_actions = {0, 2, 4, 6, 7};
  spec.max_extra = 2;
  spec.noise_rate = 0.35;
  spec.scatter = 0.02;
  suite.push_back({"random-permissive", generate_synthetic(spec, 5)});
  return suite;
}

}  // namespace dtc
