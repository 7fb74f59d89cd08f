#pragma once

#include <algorithm>
#include <vector>

#include "dtc/determinize.hpp"
#include "dtc/export.hpp"
#include "dtc/model.hpp"

namespace dtc {

enum class VerifyMode { Permissive, Determinized };

struct Violation {
  RowIndex row = 0;
  std::vector<double> state;
  std::vector<ActionId> expected;  // admissible set, or the required action
  std::vector<ActionId> got;       // actions the tree returns
};

struct VerifyReport {
  VerifyMode mode = VerifyMode::Permissive;
  std::size_t rows_checked = 0;
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
};

// Permissive trees must return exactly each row's admissible set;
// determinized trees must return an admissible action equal to the
// labeling's choice for the row.
inline VerifyReport check_exact(const DecisionTree& tree, const ControllerTable& table,
                                const EffectiveLabeling& labeling) {
  VerifyReport report;
  report.mode = tree.label_kind() == LabelKind::SetLabel ? VerifyMode::Permissive : VerifyMode::Determinized;
  for (std::size_t r = 0; r < table.size(); ++r) {
    auto x = table.state(r);
    Label got = evaluate(tree, x);
    const ActionSet& admissible = table.admissible(r);
    bool ok = false;
    std::vector<ActionId> expected;
    std::vector<ActionId> returned;
    if (report.mode == VerifyMode::Permissive) {
      expected = admissible.ids();
      returned = got < table.sets().size() ? table.sets().set(got).ids() : std::vector<ActionId>{};
      ok = returned == expected;
    } else {
      Label want = r < labeling.labels.size() ? labeling.labels[r] : got;
      expected = {want};
      returned = {got};
      ok = admissible.contains(got) && got == want;
    }
    ++report.rows_checked;
    if (!ok)
      report.violations.push_back({static_cast<RowIndex>(r), std::vector<double>(x.begin(), x.end()),
                                   std::move(expected), std::move(returned)});
  }
  return report;
}

// Determinized check without a recorded labeling: only membership of the
// returned action in each admissible set is required.
inline VerifyReport check_admissible(const DecisionTree& tree, const ControllerTable& table) {
  EffectiveLabeling any{LabelKind::Action, {}};
  VerifyReport report = check_exact(tree, table, any);
  return report;
}

}  // namespace dtc
