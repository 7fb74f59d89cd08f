#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dtc/error.hpp"
#include "dtc/format.hpp"
#include "dtc/model.hpp"

namespace dtc {

// Parsed three-line CSV preamble.
struct CsvHeader {
  bool permissive = true;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
};

inline constexpr std::string_view kCsvMagic = "#dtc-csv v1";

namespace detail {

inline std::size_t parse_dim(std::string_view text, std::string_view key) {
  if (text.substr(0, key.size()) != key) throw HeaderError("expected '" + std::string(key) + "' in dimension line");
  text.remove_prefix(key.size());
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0)
    throw HeaderError("invalid value for '" + std::string(key) + "'");
  return value;
}

inline CsvHeader parse_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw HeaderError(std::string("missing header line: ") + what);
    ++line_no;
    return trim(line);
  };
  if (next("format tag") != kCsvMagic) throw HeaderError("first line must be '" + std::string(kCsvMagic) + "'");
  CsvHeader h;
  auto mode = next("permissiveness");
  if (mode == "#PERMISSIVE") h.permissive = true;
  else if (mode == "#NON-PERMISSIVE") h.permissive = false;
  else throw HeaderError("second line must be '#PERMISSIVE' or '#NON-PERMISSIVE'");
  auto dims = next("dimensions");
  auto comma = dims.find(',');
  if (comma == std::string_view::npos) throw HeaderError("third line must be '#state_dim=<d>,action_dim=<m>'");
  h.state_dim = parse_dim(trim(dims.substr(0, comma)), "#state_dim=");
  h.action_dim = parse_dim(trim(dims.substr(comma + 1)), "action_dim=");
  return h;
}

}  // namespace detail

// Streams the CSV controller format: a three-line header followed by rows of
// d state fields and m action fields. Rows sharing a state are merged.
inline ControllerTable parse_csv(std::istream& in) {
  std::size_t line_no = 0;
  CsvHeader header = detail::parse_header(in, line_no);
  const std::size_t arity = header.state_dim + header.action_dim;
  ControllerTableBuilder builder(header.state_dim, header.action_dim, header.permissive);
  std::vector<double> fields(arity);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t count = 0;
    while (true) {
      auto comma = rest.find(',');
      auto field = trim(rest.substr(0, comma));
      if (count < arity) {
        auto value = parse_number(field);
        if (!value || !std::isfinite(*value))
          throw ParseError(line_no, count + 1, "'" + std::string(field) + "' is not a finite number");
        fields[count] = *value;
      }
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != arity)
      throw MalformedRow(line_no, "expected " + std::to_string(arity) + " fields, found " + std::to_string(count));
    std::span<const double> all(fields);
    auto added = builder.add(all.first(header.state_dim), all.subspan(header.state_dim));
    if (!header.permissive && added == ControllerTableBuilder::AddResult::NewAction)
      throw MalformedRow(line_no, "second action for a state in a non-permissive controller");
  }
  if (builder.rows() == 0) throw EmptyController("controller has no data rows");
  return std::move(builder).build();
}

inline ControllerTable parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_csv(in);
}

inline ControllerTable parse_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_csv(in);
}

// One row per (state, admissible action) pair, in table order.
inline void write_csv(std::ostream& out, const ControllerTable& table) {
  const bool permissive = table.declared_permissive() || !table.is_deterministic();
  out << kCsvMagic << '\n' << (permissive ? "#PERMISSIVE" : "#NON-PERMISSIVE") << '\n';
  out << "#state_dim=" << table.state_dim() << ",action_dim=" << table.action_dim() << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::string prefix;
    for (double v : table.state(r)) prefix += format_number(v) + ',';
    for (ActionId a : table.admissible(r)) {
      out << prefix;
      auto u = table.action(a);
      for (std::size_t k = 0; k < u.size(); ++k) out << (k ? "," : "") << format_number(u[k]);
      out << '\n';
    }
  }
}

inline std::string serialize_csv(const ControllerTable& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

// ---------------------------------------------------------------------------
// Synthetic controllers

struct FeatureGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 1;
};

// Region boundary x[feature] <= threshold.
struct RegionCut {
  std::size_t feature = 0;
  double threshold = 0.0;
};

// Grid-shaped controller whose states are partitioned into regions by axis
// cuts (regions are the cells of all cuts). Each region carries a base
// admissible set; states may additionally receive random noise actions (with
// probability `noise_rate`) or, with probability `scatter`, the base set of a
// random region.
struct SyntheticSpec {
  std::vector<FeatureGrid> grid;
  std::vector<RegionCut> cuts;
  std::vector<std::vector<double>> actions;
  std::vector<std::vector<ActionId>> region_sets;
  std::vector<ActionId> noise_actions;
  std::size_t max_extra = 0;
  double noise_rate = 1.0;
  double scatter = 0.0;
  bool permissive = true;
};

namespace detail {

struct RegionLayout {
  std::vector<std::size_t> features;              // features carrying cuts, ascending
  std::vector<std::vector<double>> thresholds;    // sorted per entry of `features`
  std::size_t regions = 1;

  std::size_t region_of(std::span<const double> x) const {
    std::size_t r = 0;
    for (std::size_t k = 0; k < features.size(); ++k) {
      const auto& t = thresholds[k];
      auto bin = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x[features[k]]) - t.begin());
      r = r * (t.size() + 1) + bin;
    }
    return r;
  }
};

inline RegionLayout region_layout(const SyntheticSpec& spec) {
  RegionLayout layout;
  for (const auto& c : spec.cuts)
    if (std::find(layout.features.begin(), layout.features.end(), c.feature) == layout.features.end())
      layout.features.push_back(c.feature);
  std::sort(layout.features.begin(), layout.features.end());
  for (std::size_t f : layout.features) {
    std::vector<double> t;
    for (const auto& c : spec.cuts)
      if (c.feature == f) t.push_back(c.threshold);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    layout.regions *= t.size() + 1;
    layout.thresholds.push_back(std::move(t));
  }
  return layout;
}

inline void validate(const SyntheticSpec& spec, const RegionLayout& layout) {
  if (spec.grid.empty()) throw SpecError("grid has no features");
  for (const auto& g : spec.grid) {
    if (g.count == 0) throw SpecError("grid feature with zero points");
    if (!std::isfinite(g.start) || !std::isfinite(g.step) || !(g.step > 0.0)) throw SpecError("invalid grid spacing");
  }
  for (const auto& c : spec.cuts) {
    if (c.feature >= spec.grid.size()) throw SpecError("cut on a feature outside the grid");
    if (!std::isfinite(c.threshold)) throw SpecError("non-finite cut threshold");
  }
  if (spec.actions.empty()) throw SpecError("no actions");
  const std::size_t m = spec.actions.front().size();
  if (m == 0) throw SpecError("actions must have dimension >= 1");
  for (const auto& a : spec.actions)
    if (a.size() != m) throw SpecError("actions differ in dimension");
  for (std::size_t i = 0; i < spec.actions.size(); ++i)
    for (std::size_t j = i + 1; j < spec.actions.size(); ++j)
      if (spec.actions[i] == spec.actions[j]) throw SpecError("duplicate action vectors");
  if (spec.region_sets.size() != layout.regions)
    throw SpecError("expected " + std::to_string(layout.regions) + " region sets, got " +
                    std::to_string(spec.region_sets.size()));
  auto check_id = [&](ActionId a) {
    if (a >= spec.actions.size()) throw SpecError("action id " + std::to_string(a) + " out of range");
  };
  for (const auto& s : spec.region_sets) {
    if (s.empty()) throw SpecError("region with an empty admissible set");
    std::for_each(s.begin(), s.end(), check_id);
  }
  std::for_each(spec.noise_actions.begin(), spec.noise_actions.end(), check_id);
  if (spec.max_extra > spec.noise_actions.size()) throw SpecError("max_extra exceeds the noise pool");
  if (!(spec.scatter >= 0.0 && spec.scatter <= 1.0)) throw SpecError("scatter must lie in [0, 1]");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) throw SpecError("noise_rate must lie in [0, 1]");
  if (!spec.permissive) {
    if (spec.max_extra > 0) throw SpecError("noise actions require a permissive controller");
    for (const auto& s : spec.region_sets)
      if (s.size() != 1) throw SpecError("non-permissive controller needs singleton region sets");
  }
}

}  // namespace detail

inline std::size_t region_count(const SyntheticSpec& spec) { return detail::region_layout(spec).regions; }

// Pure function of (spec, seed). States enumerate the grid with the last
// feature varying fastest; action ids equal indices into spec.actions.
inline ControllerTable generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  auto layout = detail::region_layout(spec);
  detail::validate(spec, layout);
  const std::size_t d = spec.grid.size();
  ControllerTableBuilder builder(d, spec.actions.front().size(), spec.permissive);
  for (const auto& a : spec.actions) builder.intern_action(a);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_region(0, layout.regions - 1);
  std::uniform_int_distribution<std::size_t> extra_count(0, spec.max_extra);

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  std::vector<ActionId> pool = spec.noise_actions;
  while (true) {
    for (std::size_t f = 0; f < d; ++f) x[f] = spec.grid[f].start + static_cast<double>(idx[f]) * spec.grid[f].step;
    std::size_t region = layout.region_of(x);
    if (spec.scatter > 0.0 && coin(rng) < spec.scatter) region = any_region(rng);
    std::vector<ActionId> set = spec.region_sets[region];
    if (spec.max_extra > 0 && (spec.noise_rate >= 1.0 || coin(rng) < spec.noise_rate)) {
      std::size_t k = extra_count(rng);
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        set.push_back(pool[i]);
      }
    }
    for (ActionId a : ActionSet(set)) builder.add(x, a);

    std::size_t f = d;
    while (f > 0 && ++idx[f - 1] == spec.grid[f - 1].count) idx[--f] = 0;
    if (f == 0) break;
  }
  return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Bundled specs

// Ten-feature controller in the shape of a two-heater building: regions cut
// by x[1] <= 20.625 and x[4] <= 20.625, each with its own heater action.
// With `noisy`, each state also admits 0..1 extra actions from a three-action
// pool, so admissible sets vary state by state while every state still
// contains its region's action. Without it, region r admits exactly
// {heater action r, private fallback r}: four distinct sets.
inline SyntheticSpec two_heater_spec(bool noisy = true) {
  SyntheticSpec s;
  s.grid.assign(10, FeatureGrid{20.0, 0.5, 2});
  // 19.5, 20.25, 21.0, 21.75: the midpoint of the middle pair is 20.625
  s.grid[1] = s.grid[4] = FeatureGrid{19.5, 0.75, 4};
  s.cuts = {{1, 20.625}, {4, 20.625}};
  s.actions = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
  if (noisy) {
    s.actions.insert(s.actions.end(), {{2, 2}, {2, 0}, {0, 2}});
    s.region_sets = {{0}, {1}, {2}, {3}};
    s.noise_actions = {4, 5, 6};
    s.max_extra = 1;
  } else {
    s.actions.insert(s.actions.end(), {{2, 2}, {2, 1}, {1, 2}, {2, 3}});
    s.region_sets = {{0, 4}, {1, 5}, {2, 6}, {3, 7}};
  }
  return s;
}

// Two-dimensional (angle, angular velocity) single-input controller whose
// regions follow the layout of a small cart-pole decision tree.
inline SyntheticSpec cartpole_like_spec() {
  SyntheticSpec s;
  s.grid = {FeatureGrid{2.24, 0.08, 24}, FeatureGrid{-2.0, 0.16, 26}};
  s.cuts = {{0, 2.6}, {0, 3.72}, {1, -0.85}, {1, -0.05}, {1, 0.05}};
  s.actions = {{2.2}, {3.6}, {-2.9}, {3.9}, {-1.6}, {-3.7}, {0.5}, {-0.5}, {1.0}};
  // region = theta_bin * 4 + omega_bin
  const ActionId table[3][4] = {{0, 1, 3, 4}, {0, 1, 5, 5}, {0, 2, 5, 5}};
  for (auto& row : table)
    for (ActionId a : row) s.region_sets.push_back({a});
  s.noise_actions = {6, 7, 8};
  s.max_extra = 2;
  return s;
}

// Deterministic three-dimensional controller with scattered exceptions.
inline SyntheticSpec deterministic_grid_spec() {
  SyntheticSpec s;
  s.grid = {FeatureGrid{0.0, 1.0, 12}, FeatureGrid{0.0, 1.0, 10}, FeatureGrid{-1.0, 0.25, 9}};
  s.cuts = {{0, 3.5}, {0, 7.5}, {1, 4.5}, {2, 0.1}};
  s.actions = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}};
  for (std::size_t r = 0; r < 12; ++r) s.region_sets.push_back({static_cast<ActionId>((r * 5) % 6)});
  s.scatter = 0.03;
  s.permissive = false;
  return s;
}

struct RandomSpecLimits {
  std::size_t max_state_dim = 5;
  std::size_t max_states = 2000;
  std::size_t max_actions = 10;
  std::size_t max_admissible = 4;
};

// Random but well-formed spec within `limits`; pure function of the seed.
inline SyntheticSpec random_spec(std::uint64_t seed, const RandomSpecLimits& limits = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  SyntheticSpec s;
  const std::size_t d = uniform(1, limits.max_state_dim);
  // Log-uniform state budget: small and large tables are equally likely.
  const double lo = std::log(static_cast<double>(std::min<std::size_t>(8, limits.max_states)));
  const double hi = std::log(static_cast<double>(limits.max_states));
  auto budget = static_cast<std::size_t>(std::exp(std::uniform_real_distribution<double>(lo, hi)(rng)));
  for (std::size_t f = 0; f < d; ++f) {
    // Share the state budget roughly evenly, never exceeding it.
    auto remaining = static_cast<double>(budget);
    auto cap = static_cast<std::size_t>(std::pow(remaining, 1.0 / static_cast<double>(d - f)));
    std::size_t count = uniform(1, std::max<std::size_t>(1, cap));
    budget = std::max<std::size_t>(1, budget / count);
    double step = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
    double start = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    s.grid.push_back({start, step, count});
  }
  const std::size_t n_cuts = uniform(0, 4);
  for (std::size_t c = 0; c < n_cuts; ++c) {
    std::size_t f = uniform(0, d - 1);
    const auto& g = s.grid[f];
    double span = g.step * static_cast<double>(g.count);
    double t = g.start + std::uniform_real_distribution<double>(0.0, span)(rng);
    s.cuts.push_back({f, t});
  }
  const std::size_t m = uniform(1, 2);
  const std::size_t n_actions = uniform(2, limits.max_actions);
  for (std::size_t a = 0; a < n_actions; ++a) {
    std::vector<double> u(m);
    // Distinct by construction: the first coordinate encodes the id.
    u[0] = static_cast<double>(a) - static_cast<double>(n_actions) / 2.0;
    for (std::size_t k = 1; k < m; ++k) u[k] = std::round(std::uniform_real_distribution<double>(-3, 3)(rng) * 4) / 4;
    s.actions.push_back(std::move(u));
  }
  const bool permissive = uniform(0, 3) != 0;
  s.permissive = permissive;
  const std::size_t max_base = permissive ? std::min<std::size_t>(limits.max_admissible, n_actions) : 1;
  std::vector<ActionId> ids(n_actions);
  for (std::size_t a = 0; a < n_actions; ++a) ids[a] = static_cast<ActionId>(a);
  const std::size_t regions = region_count(s);
  std::size_t base_size = uniform(1, max_base);
  for (std::size_t r = 0; r < regions; ++r) {
    std::shuffle(ids.begin(), ids.end(), rng);
    s.region_sets.emplace_back(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(base_size));
  }
  if (permissive && base_size < limits.max_admissible) {
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t pool = uniform(1, n_actions);
    s.noise_actions.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(pool));
    s.max_extra = std::min(pool, uniform(0, limits.max_admissible - base_size));
    s.noise_rate = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
  }
  s.scatter = std::uniform_real_distribution<double>(0.0, 0.03)(rng);
  return s;
}

}  // namespace dtc
