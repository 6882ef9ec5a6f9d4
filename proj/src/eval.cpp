#include "smtm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "smtm/error.hpp"
#include "smtm/log.hpp"

namespace smtm {

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

EvalReport macro_f1(std::span<const LabelSet> predicted, std::span<const LabelSet> gold,
                    const std::vector<std::string>& categories) {
  if (predicted.size() != gold.size()) {
    throw DataError("predictions cover " + std::to_string(predicted.size()) + " documents, gold " +
                    std::to_string(gold.size()));
  }
  const std::size_t num_cats = categories.size();
  EvalReport report;
  report.per_category.resize(num_cats);
  for (std::size_t c = 0; c < num_cats; ++c) report.per_category[c].category = categories[c];

  std::vector<std::uint8_t> in_pred(num_cats), in_gold(num_cats);
  for (std::size_t d = 0; d < gold.size(); ++d) {
    std::fill(in_pred.begin(), in_pred.end(), 0);
    std::fill(in_gold.begin(), in_gold.end(), 0);
    for (auto c : predicted[d]) in_pred.at(c) = 1;
    for (auto c : gold[d]) in_gold.at(c) = 1;
    for (std::size_t c = 0; c < num_cats; ++c) {
      auto& r = report.per_category[c];
      if (in_pred[c] && in_gold[c]) ++r.tp;
      else if (in_pred[c]) ++r.fp;
      else if (in_gold[c]) ++r.fn;
    }
  }
  double total = 0.0;
  for (auto& r : report.per_category) {
    r.f1 = f1_score(r.tp, r.fp, r.fn);
    total += r.f1;
  }
  report.macro_f1 = num_cats ? total / static_cast<double>(num_cats) : 0.0;
  return report;
}

std::optional<double> rank_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives (Mann-Whitney U).
  double positive_rank_sum = 0.0;
  std::size_t num_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        positive_rank_sum += midrank;
        ++num_pos;
      }
    }
    i = j;
  }
  const std::size_t num_neg = n - num_pos;
  if (num_pos == 0 || num_neg == 0) return std::nullopt;
  const auto p = static_cast<double>(num_pos);
  const auto q = static_cast<double>(num_neg);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

void add_macro_auc(EvalReport& report, const Matrix<double>& scores, std::span<const LabelSet> gold) {
  if (scores.rows() != gold.size() || scores.cols() != report.per_category.size()) {
    throw DataError("score matrix does not match the evaluated documents/categories");
  }
  std::vector<double> column(scores.rows());
  std::vector<std::uint8_t> positive(scores.rows());
  double total = 0.0;
  std::size_t computable = 0;
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    for (std::size_t d = 0; d < scores.rows(); ++d) {
      column[d] = scores(d, c);
      positive[d] = std::find(gold[d].begin(), gold[d].end(), c) != gold[d].end();
    }
    auto& r = report.per_category[c];
    r.auc = rank_auc(column, positive);
    if (!r.auc) {
      log::warn("category '" + r.category + "' lacks positive or negative documents; AUC skipped");
      continue;
    }
    total += *r.auc;
    ++computable;
  }
  if (computable == 0) throw DataError("no category has both positive and negative documents");
  report.macro_auc = total / static_cast<double>(computable);
}

EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<std::string>& doc_ids, std::span<const LabelSet> gold,
                    const std::vector<std::string>& categories) {
  if (predictions.size() != doc_ids.size()) {
    throw DataError("predictions cover " + std::to_string(predictions.size()) +
                    " documents, corpus has " + std::to_string(doc_ids.size()));
  }
  std::vector<LabelSet> labels(predictions.size());
  Matrix<double> scores(predictions.size(), categories.size());
  for (std::size_t d = 0; d < predictions.size(); ++d) {
    if (predictions[d].doc_id != doc_ids[d]) {
      throw DataError("prediction for '" + predictions[d].doc_id + "' where '" + doc_ids[d] +
                      "' was expected");
    }
    if (predictions[d].scores.size() != categories.size()) {
      throw DataError("prediction for '" + doc_ids[d] + "' has the wrong number of scores");
    }
    labels[d] = predictions[d].assigned;
    std::copy(predictions[d].scores.begin(), predictions[d].scores.end(), scores.row(d).begin());
  }
  auto report = macro_f1(labels, gold, categories);
  add_macro_auc(report, scores, gold);
  return report;
}

namespace {

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

EvalReport aggregate_reports(std::span<const EvalReport> runs) {
  if (runs.empty()) throw DataError("no runs to aggregate");
  EvalReport out;
  out.runs_aggregated = runs.size();
  const std::size_t num_cats = runs.front().per_category.size();
  out.per_category.resize(num_cats);
  std::vector<double> f1s, aucs;
  for (std::size_t c = 0; c < num_cats; ++c) {
    auto& r = out.per_category[c];
    r.category = runs.front().per_category[c].category;
    double f1_total = 0.0, auc_total = 0.0;
    std::size_t auc_runs = 0;
    for (const auto& run : runs) {
      const auto& src = run.per_category.at(c);
      r.tp += src.tp;
      r.fp += src.fp;
      r.fn += src.fn;
      f1_total += src.f1;
      if (src.auc) {
        auc_total += *src.auc;
        ++auc_runs;
      }
    }
    r.f1 = f1_total / static_cast<double>(runs.size());
    if (auc_runs) r.auc = auc_total / static_cast<double>(auc_runs);
  }
  for (const auto& run : runs) {
    f1s.push_back(run.macro_f1);
    if (run.macro_auc) aucs.push_back(*run.macro_auc);
  }
  out.macro_f1 = std::accumulate(f1s.begin(), f1s.end(), 0.0) / static_cast<double>(f1s.size());
  out.macro_f1_stddev = stddev(f1s);
  if (!aucs.empty()) {
    out.macro_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(aucs.size());
    out.macro_auc_stddev = stddev(aucs);
  }
  return out;
}

std::string per_category_csv(const EvalReport& report) {
  std::vector<const CategoryResult*> rows;
  for (const auto& r : report.per_category) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const CategoryResult* a, const CategoryResult* b) {
    return a->f1 != b->f1 ? a->f1 < b->f1 : a->category < b->category;
  });
  std::ostringstream out;
  out << "category,tp,fp,fn,f1,auc\n";
  char buf[64];
  for (const auto* r : rows) {
    out << '"' << r->category << "\"," << r->tp << ',' << r->fp << ',' << r->fn << ',';
    std::snprintf(buf, sizeof buf, "%.6f", r->f1);
    out << buf << ',';
    if (r->auc) {
      std::snprintf(buf, sizeof buf, "%.6f", *r->auc);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char buf[256];
  std::size_t width = 8;
  for (const auto& r : report.per_category) width = std::max(width, r.category.size());
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s %8s %8s %8s\n", static_cast<int>(width), "category",
                "TP", "FP", "FN", "F1", "AUC");
  out << buf;
  for (const auto& r : report.per_category) {
    std::snprintf(buf, sizeof buf, "%-*s %8zu %8zu %8zu %8.4f ", static_cast<int>(width),
                  r.category.c_str(), r.tp, r.fp, r.fn, r.f1);
    out << buf;
    if (r.auc) {
      std::snprintf(buf, sizeof buf, "%8.4f\n", *r.auc);
    } else {
      std::snprintf(buf, sizeof buf, "%8s\n", "-");
    }
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "Macro-F1  %.4f", report.macro_f1);
  out << buf;
  if (report.runs_aggregated > 1) {
    std::snprintf(buf, sizeof buf, " (sd %.4f over %zu runs)", report.macro_f1_stddev,
                  report.runs_aggregated);
    out << buf;
  }
  out << '\n';
  if (report.macro_auc) {
    std::snprintf(buf, sizeof buf, "Macro-AUC %.4f", *report.macro_auc);
    out << buf;
    if (report.runs_aggregated > 1) {
      std::snprintf(buf, sizeof buf, " (sd %.4f over %zu runs)", report.macro_auc_stddev,
                    report.runs_aggregated);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace smtm
