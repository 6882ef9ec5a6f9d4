#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smtm/classify.hpp"
#include "smtm/matrix.hpp"

namespace smtm {

struct CategoryResult {
  std::string category;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent when the category has no positive or no negative
};

struct EvalReport {
  std::vector<CategoryResult> per_category;
  double macro_f1 = 0.0;
  std::optional<double> macro_auc;
  std::size_t runs_aggregated = 1;
  // Across-run spread; zero for a single run.
  double macro_f1_stddev = 0.0;
  double macro_auc_stddev = 0.0;
};

// 2TP / (2TP + FP + FN), with 0/0 taken as 0.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

// Per-category F1 and its unweighted mean. Throws DataError when the label
// lists differ in length.
EvalReport macro_f1(std::span<const LabelSet> predicted, std::span<const LabelSet> gold,
                    const std::vector<std::string>& categories);

// Probability that a random positive outscores a random negative, ties
// counting one half. nullopt without both classes.
std::optional<double> rank_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

// Fills per-category AUC into `report` (which must come from macro_f1 over
// the same categories) and sets macro_auc over the computable categories.
// Throws DataError when no category is computable.
void add_macro_auc(EvalReport& report, const Matrix<double>& scores, std::span<const LabelSet> gold);

// macro_f1 followed by add_macro_auc; checks that document ids line up.
EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<std::string>& doc_ids, std::span<const LabelSet> gold,
                    const std::vector<std::string>& categories);

// Means across runs. Per-category counts are summed, F1/AUC averaged.
EvalReport aggregate_reports(std::span<const EvalReport> runs);

// CSV sorted by F1 ascending, ties by category name.
std::string per_category_csv(const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace smtm
