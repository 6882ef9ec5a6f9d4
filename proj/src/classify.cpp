#include "smtm/classify.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "smtm/error.hpp"
#include "smtm/log.hpp"

namespace smtm {

Matrix<double> category_scores(const ModelState& state, const PosteriorEstimates& est) {
  const std::size_t num_cats = state.num_categories;
  const auto uniform = 1.0 / static_cast<double>(num_cats);

  // p(c|w) for every vocabulary word, computed once.
  Matrix<double> posterior(state.vocab_size, num_cats);
  for (std::size_t w = 0; w < state.vocab_size; ++w) {
    double total = 0.0;
    for (std::size_t c = 0; c < num_cats; ++c) {
      posterior(w, c) = est.phi(c, w) * est.category_prior[c];
      total += posterior(w, c);
    }
    for (double& v : posterior.row(w)) v /= total;
  }

  Matrix<double> scores(state.num_docs, num_cats, uniform);
  for (std::size_t d = 0; d < state.num_docs; ++d) {
    const std::size_t begin = state.doc_begin(d);
    const std::size_t end = state.doc_end(d);
    if (begin == end) continue;
    auto row = scores.row(d);
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t t = begin; t < end; ++t) {
      const auto pw = posterior.row(state.words[t]);
      for (std::size_t c = 0; c < num_cats; ++c) row[c] += pw[c];
    }
    const double length = static_cast<double>(end - begin);
    double total = 0.0;
    for (double& v : row) {
      v /= length;
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return scores;
}

std::vector<LabelSet> assigned_labels(const ModelState& state, const Matrix<double>& scores) {
  std::vector<LabelSet> labels(state.num_docs);
  for (std::size_t d = 0; d < state.num_docs; ++d) {
    for (std::size_t c = 0; c < state.num_categories; ++c) {
      if (state.alpha(d, c)) labels[d].push_back(static_cast<CategoryId>(c));
    }
    if (labels[d].empty()) {
      const auto row = scores.row(d);
      labels[d].push_back(static_cast<CategoryId>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  }
  return labels;
}

std::vector<std::vector<DocIndex>> topk_labels(const Matrix<double>& scores, std::size_t k) {
  if (k < 1) throw ConfigError("top-k needs k >= 1");
  const std::size_t num_docs = scores.rows();
  if (k > num_docs) {
    log::warn("top-k of " + std::to_string(k) + " exceeds the " + std::to_string(num_docs) +
              " documents; clamped");
    k = num_docs;
  }
  std::vector<std::vector<DocIndex>> positives(scores.cols());
  std::vector<DocIndex> order(num_docs);
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    std::iota(order.begin(), order.end(), DocIndex{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](DocIndex a, DocIndex b) {
                        return scores(a, c) != scores(b, c) ? scores(a, c) > scores(b, c) : a < b;
                      });
    positives[c].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(positives[c].begin(), positives[c].end());
  }
  return positives;
}

std::vector<LabelSet> labels_from_positives(const std::vector<std::vector<DocIndex>>& positives,
                                            std::size_t num_docs) {
  std::vector<LabelSet> labels(num_docs);
  for (std::size_t c = 0; c < positives.size(); ++c) {
    for (DocIndex d : positives[c]) labels.at(d).push_back(static_cast<CategoryId>(c));
  }
  return labels;
}

std::vector<Prediction> predict(const Corpus& corpus, const ModelState& state,
                                const Hyperparams& hyper) {
  const auto est = estimate(state, hyper);
  const auto scores = category_scores(state, est);
  const auto labels = hyper.variant.sparsity
                          ? assigned_labels(state, scores)
                          : labels_from_positives(topk_labels(scores, hyper.top_k), state.num_docs);
  std::vector<Prediction> out(state.num_docs);
  for (std::size_t d = 0; d < state.num_docs; ++d) {
    out[d].doc_id = corpus.doc_ids()[d];
    out[d].assigned = labels[d];
    const auto row = scores.row(d);
    out[d].scores.assign(row.begin(), row.end());
  }
  return out;
}

namespace {

std::string format_score(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(line);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

void write_predictions_tsv(std::ostream& out, const std::vector<Prediction>& predictions,
                           const std::vector<std::string>& categories) {
  out << "doc_id\tlabels";
  for (const auto& name : categories) out << '\t' << name;
  out << '\n';
  for (const auto& p : predictions) {
    out << p.doc_id << '\t';
    for (std::size_t k = 0; k < p.assigned.size(); ++k) {
      out << (k ? ";" : "") << categories.at(p.assigned[k]);
    }
    for (double s : p.scores) out << '\t' << format_score(s);
    out << '\n';
  }
}

std::vector<Prediction> read_predictions_tsv(std::istream& in,
                                             const std::vector<std::string>& categories) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("predictions: missing header");
  const auto header = split(line, '\t');
  if (header.size() != categories.size() + 2 ||
      !std::equal(categories.begin(), categories.end(), header.begin() + 2)) {
    throw DataError("predictions: header does not match the category list");
  }
  std::vector<Prediction> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto where = "predictions line " + std::to_string(line_no);
    if (fields.size() != categories.size() + 2) throw DataError(where + ": wrong column count");
    Prediction p;
    p.doc_id = fields[0];
    if (!fields[1].empty()) {
      for (const auto& name : split(fields[1], ';')) {
        auto it = std::find(categories.begin(), categories.end(), name);
        if (it == categories.end()) throw DataError(where + ": unknown category '" + name + "'");
        p.assigned.push_back(static_cast<CategoryId>(it - categories.begin()));
      }
    }
    for (std::size_t c = 0; c < categories.size(); ++c) {
      const auto& f = fields[2 + c];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw DataError(where + ": bad score '" + f + "'");
      }
      p.scores.push_back(v);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace smtm
