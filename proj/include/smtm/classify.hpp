#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smtm/corpus.hpp"
#include "smtm/matrix.hpp"
#include "smtm/model.hpp"

namespace smtm {

using LabelSet = std::vector<CategoryId>;

struct Prediction {
  std::string doc_id;
  LabelSet assigned;
  std::vector<double> scores;  // p(c|d), sums to 1
};

// p(c|d) as the per-token average of p(c|w) = phi_c[w] p(c) / sum_c' phi_c'[w] p(c'),
// row-normalized. Empty documents get the uniform row.
Matrix<double> category_scores(const ModelState& state, const PosteriorEstimates& estimates);

// {c : alpha_dc = 1}; an empty row falls back to the argmax of `scores`
// (lowest category id on ties).
std::vector<LabelSet> assigned_labels(const ModelState& state, const Matrix<double>& scores);

// For each category, the k highest-scoring documents (lower index wins ties).
// k > D is clamped to D with a warning.
std::vector<std::vector<DocIndex>> topk_labels(const Matrix<double>& scores, std::size_t k);

// Inverts per-category positive lists into per-document label sets.
std::vector<LabelSet> labels_from_positives(const std::vector<std::vector<DocIndex>>& positives,
                                            std::size_t num_docs);

// Selector labels, or top-k labels when the sparsity variant is off.
std::vector<Prediction> predict(const Corpus& corpus, const ModelState& state,
                                const Hyperparams& hyper);

// Header "doc_id\tlabels\t<category>..."; labels joined by ';'.
void write_predictions_tsv(std::ostream& out, const std::vector<Prediction>& predictions,
                           const std::vector<std::string>& categories);
std::vector<Prediction> read_predictions_tsv(std::istream& in,
                                             const std::vector<std::string>& categories);

}  // namespace smtm
