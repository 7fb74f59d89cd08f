#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "dtc/dtc.hpp"

namespace fs = std::filesystem;
using namespace dtc;

namespace {

const std::map<std::string, SplitStrategy> kSplits{
    {"axis", SplitStrategy::Axis}, {"oc1", SplitStrategy::Oc1}, {"logreg", SplitStrategy::LogReg},
    {"linsvm", SplitStrategy::LinSvm}};
const std::map<std::string, Determinizer> kDeterminizers{
    {"none", Determinizer::None}, {"maxfreq", Determinizer::MaxFreq}, {"minnorm", Determinizer::MinNorm},
    {"random", Determinizer::Random}};
const std::map<std::string, Aggregation> kAggregations{{"paper-sum", Aggregation::PaperSum},
                                                       {"weighted", Aggregation::Weighted}};

struct TableOptions {
  std::string input;
  std::string format = "csv";
  std::string names_file;
};

struct LabelOptions {
  std::string determinize = "none";
  std::string reference;
  std::uint64_t seed = 0;
};

struct BuildOptions {
  TableOptions table;
  LabelOptions labels;
  std::string predicates = "axis";
  std::string aggregation = "paper-sum";
  double timeout = 0.0;
  std::size_t max_depth = 0;
  std::size_t workers = 0;
  std::string output_dir = ".";
  std::string name;
  bool json = false;
  bool no_time = false;
};

struct VerifyOptions {
  TableOptions table;
  LabelOptions labels;
  std::string artifacts = ".";
  std::string name;
};

struct BenchOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  double timeout = 60.0;
  std::size_t workers = 1;
  std::string json;
};

struct SynthOptions {
  std::string preset = "two-heater";
  std::uint64_t seed = 7;
  std::string output;
};

void add_table_options(CLI::App* cmd, TableOptions& o) {
  cmd->add_option("-i,--input", o.input, "controller table")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "input format")->check(CLI::IsMember({"csv"}));
  cmd->add_option("--names", o.names_file, "feature names, one per line")->check(CLI::ExistingFile);
}

void add_label_options(CLI::App* cmd, LabelOptions& o) {
  cmd->add_option("--determinize", o.determinize, "none|maxfreq|minnorm|random")
      ->check(CLI::IsMember({"none", "maxfreq", "minnorm", "random"}));
  cmd->add_option("--reference", o.reference, "min-norm reference action, comma separated");
  cmd->add_option("--seed", o.seed, "random seed");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

ControllerTable load_table(const TableOptions& o) {
  try {
    return parse_csv_file(o.input);
  } catch (const Error& e) {
    throw Error(o.input + ": " + e.what());
  }
}

std::optional<FeatureNames> load_names(const TableOptions& o, std::size_t dim) {
  if (o.names_file.empty()) return std::nullopt;
  FeatureNames names;
  std::istringstream in(read_file(o.names_file));
  std::string line;
  while (std::getline(in, line)) {
    auto name = trim(line);
    if (!name.empty()) names.emplace_back(name);
  }
  if (names.size() != dim)
    throw DimensionError(o.names_file + ": expected " + std::to_string(dim) + " names, got " +
                         std::to_string(names.size()));
  return names;
}

std::vector<double> parse_reference(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    auto v = parse_number(trim(part));
    if (!v) throw Error("bad --reference component '" + part + "'");
    out.push_back(*v);
  }
  return out;
}

std::string default_name(const std::string& input) { return fs::path(input).stem().string(); }

int run_build(const BuildOptions& o) {
  auto table = load_table(o.table);
  auto names = load_names(o.table, table.state_dim());
  LearnerConfig cfg;
  cfg.split = kSplits.at(o.predicates);
  cfg.determinizer = kDeterminizers.at(o.labels.determinize);
  cfg.aggregation = kAggregations.at(o.aggregation);
  cfg.seed = o.labels.seed;
  cfg.minnorm_reference = parse_reference(o.labels.reference);
  if (o.max_depth) cfg.max_depth = o.max_depth;
  cfg.workers = o.workers;
  Deadline deadline = o.timeout > 0.0 ? Deadline::after_seconds(o.timeout) : Deadline{};

  auto result = learn(table, cfg, deadline);
  auto stats = compute_stats(result.tree, o.no_time ? 0.0 : result.seconds);

  fs::path dir(o.output_dir);
  fs::create_directories(dir);
  const std::string name = o.name.empty() ? default_name(o.table.input) : o.name;
  const FeatureNames* fn = names ? &*names : nullptr;
  write_file(dir / (name + ".dot"), emit_dot(result.tree, table, fn));
  write_file(dir / (name + ".c"), emit_c(result.tree, table));
  write_file(dir / (name + ".stats.json"), stats_json(stats).dump(2) + "\n");
  write_file(dir / (name + ".quantizer.json"), quantizer_json(extract_quantizer(result.tree, table)).dump(2) + "\n");

  if (o.json) std::cout << stats_json(stats).dump() << '\n';
  else std::cout << stats_line(stats) << '\n';
  return 0;
}

// Actions the tree returns at a leaf, as vectors.
std::vector<std::vector<double>> leaf_vectors(const DecisionTree& tree, const ControllerTable& table, Label label) {
  std::vector<std::vector<double>> out;
  for (ActionId a : leaf_actions(table, tree.label_kind(), label)) {
    auto u = table.action(a);
    out.emplace_back(u.begin(), u.end());
  }
  return out;
}

int run_verify(const VerifyOptions& o) {
  auto table = load_table(o.table);
  auto names = load_names(o.table, table.state_dim());
  const std::string name = o.name.empty() ? default_name(o.table.input) : o.name;
  fs::path dir(o.artifacts);

  auto tree = read_dot(read_file(dir / (name + ".dot")), table, names ? &*names : nullptr);
  auto program = CProgram::parse(read_file(dir / (name + ".c")));
  auto quantizer = quantizer_from_json(nlohmann::json::parse(read_file(dir / (name + ".quantizer.json"))));

  VerifyReport report;
  auto det = kDeterminizers.at(o.labels.determinize);
  if (det == Determinizer::None && tree.label_kind() != LabelKind::SetLabel)
    throw Error("tree is determinized; pass the --determinize used for the build");
  switch (det) {
    case Determinizer::None: report = check_exact(tree, table, unique_labels(table)); break;
    case Determinizer::MinNorm:
      report = check_exact(tree, table, minnorm_det(table, parse_reference(o.labels.reference)));
      break;
    case Determinizer::Random: report = check_exact(tree, table, random_det(table, o.labels.seed)); break;
    case Determinizer::MaxFreq: report = check_admissible(tree, table); break;
  }

  std::size_t code_mismatch = 0, quantizer_mismatch = 0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    auto x = table.state(r);
    auto expected = leaf_vectors(tree, table, evaluate(tree, x));
    auto run = program.run(x);
    const std::size_t m = table.action_dim();
    bool ok = run.result.size() == expected.size() * m &&
              (!program.returns_count() || (run.returned && *run.returned == static_cast<int>(expected.size())));
    for (std::size_t i = 0; ok && i < expected.size(); ++i)
      for (std::size_t k = 0; k < m; ++k)
        ok = ok && run.result[i * m + k] && *run.result[i * m + k] == static_cast<float>(expected[i][k]);
    code_mismatch += !ok;
    auto symbol = quantizer.locate(x);
    quantizer_mismatch += !symbol || quantizer.decode(*symbol) != expected;
  }

  std::cout << "rows=" << report.rows_checked << " violations=" << report.violations.size()
            << " code_mismatches=" << code_mismatch << " quantizer_mismatches=" << quantizer_mismatch << '\n';
  for (std::size_t i = 0; i < report.violations.size() && i < 5; ++i) {
    const auto& v = report.violations[i];
    std::cout << "  row " << v.row << " x=" << detail::action_tuple(v.state) << '\n';
  }
  bool ok = report.passed() && code_mismatch == 0 && quantizer_mismatch == 0;
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int run_bench(const BenchOptions& o) {
  std::vector<BenchmarkCase> suite;
  if (o.inputs.empty()) {
    suite = bundled_suite();
  } else {
    for (const auto& path : o.inputs) suite.push_back({default_name(path), load_table({path, "csv", ""})});
  }
  BenchmarkOptions opts;
  opts.timeout_seconds = o.timeout;
  opts.seeds = o.seeds;
  opts.workers = o.workers;
  if (!o.methods.empty()) {
    opts.methods.clear();
    for (const auto& m : o.methods) {
      auto it = std::find_if(kAllMethods.begin(), kAllMethods.end(), [&](Method k) { return method_name(k) == m; });
      if (it == kAllMethods.end()) throw Error("unknown method " + m);
      opts.methods.push_back(*it);
    }
  }
  auto rows = run_benchmark(suite, opts);
  std::cout << render_benchmark(rows, opts.methods);
  if (!o.json.empty()) write_file(o.json, benchmark_json(rows, opts.methods).dump(2) + "\n");
  return 0;
}

int run_synth(const SynthOptions& o) {
  SyntheticSpec spec;
  if (o.preset == "two-heater") spec = two_heater_spec(true);
  else if (o.preset == "two-heater-clean") spec = two_heater_spec(false);
  else if (o.preset == "cartpole") spec = cartpole_like_spec();
  else if (o.preset == "grid") spec = deterministic_grid_spec();
  else spec = random_spec(o.seed);
  auto table = generate_synthetic(spec, o.seed);
  if (o.output.empty()) write_csv(std::cout, table);
  else write_file(o.output, serialize_csv(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-tree representation of controller lookup tables"};
  app.require_subcommand(1);

  BuildOptions build;
  auto* b = app.add_subcommand("build", "learn a tree and write .dot/.c/.stats.json/.quantizer.json");
  add_table_options(b, build.table);
  add_label_options(b, build.labels);
  b->add_option("--predicates", build.predicates, "axis|oc1|logreg|linsvm")
      ->check(CLI::IsMember({"axis", "oc1", "logreg", "linsvm"}));
  b->add_option("--aggregation", build.aggregation, "paper-sum|weighted")
      ->check(CLI::IsMember({"paper-sum", "weighted"}));
  b->add_option("--timeout", build.timeout, "wall-clock limit in seconds (0: none)")->check(CLI::NonNegativeNumber);
  b->add_option("--max-depth", build.max_depth, "depth limit (0: none)");
  b->add_option("--workers", build.workers, "threads (0: DTC_WORKERS or 1)");
  b->add_option("-o,--output-dir", build.output_dir, "artifact directory");
  b->add_option("--name", build.name, "artifact base name (default: input stem)");
  b->add_flag("--json", build.json, "print stats as JSON");
  b->add_flag("--no-time", build.no_time, "record 0 construction seconds for reproducible artifacts");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "re-check built artifacts against a table");
  add_table_options(v, verify.table);
  add_label_options(v, verify.labels);
  v->add_option("-a,--artifacts", verify.artifacts, "artifact directory");
  v->add_option("--name", verify.name, "artifact base name (default: input stem)");

  BenchOptions bench;
  auto* be = app.add_subcommand("bench", "compare all methods on a suite of controllers");
  be->add_option("-i,--input", bench.inputs, "CSV files (default: bundled synthetic suite)")->check(CLI::ExistingFile);
  be->add_option("--methods", bench.methods, "subset of columns, e.g. CART OC1");
  be->add_option("--seeds", bench.seeds, "seeds for the median");
  be->add_option("--timeout", bench.timeout, "per-run limit in seconds")->check(CLI::PositiveNumber);
  be->add_option("--workers", bench.workers, "cells run in parallel")->check(CLI::PositiveNumber);
  be->add_option("--json", bench.json, "also write the report as JSON");

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "write a synthetic controller CSV");
  s->add_option("--preset", synth.preset, "two-heater|two-heater-clean|cartpole|grid|random")
      ->check(CLI::IsMember({"two-heater", "two-heater-clean", "cartpole", "grid", "random"}));
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("-o,--output", synth.output, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (b->parsed()) return run_build(build);
    if (v->parsed()) return run_verify(verify);
    if (be->parsed()) return run_bench(bench);
    return run_synth(synth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
