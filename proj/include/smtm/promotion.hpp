#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "smtm/corpus.hpp"
#include "smtm/matrix.hpp"

namespace smtm {

// Static promotion amounts for the biased urn updates. Frozen before
// sampling starts.
struct PromotionTables {
  Matrix<double> cat_promo;   // D x C, each row sums to C
  Matrix<double> word_promo;  // W x C, each column sums to W
  double mu = 0.3;
  double epsilon = 0.01;
};

// u = 1 where I(d,c) = 1 and mu elsewhere, rescaled so each row sums to C.
// A row with no seed evidence under mu = 0 falls back to all ones.
Matrix<double> build_category_promotion(const Matrix<std::uint8_t>& indicator, double mu);

// Word relevance from seed co-occurrence: p(w|s) = df(w,s) / df(s), averaged
// over each category's seeds, then normalized as in normalize_word_relevance.
Matrix<double> build_word_promotion(const Corpus& corpus, const SeedConfig& seeds,
                                    double epsilon);

// Takes raw relevance v (W x C) to the promotion table: v_n = max(v / sum_c v, eps)
// per word (0/0 taken as 0), then each column rescaled to sum to W.
Matrix<double> normalize_word_relevance(const Matrix<double>& relevance, double epsilon);

// All-ones table, i.e. plain unit urn updates for words.
Matrix<double> uniform_word_promotion(std::size_t vocab_size, std::size_t num_categories);

struct WordVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& word) const;
};

// Text layout: one "word v1 v2 ... vk" per line. A leading "count dim"
// header line, as written by word2vec, is skipped.
WordVectors load_word_vectors(const std::filesystem::path& path);
WordVectors parse_word_vectors(std::istream& in);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Same pipeline as build_word_promotion with p(w|s) = (cos(s,w) + 1) / 2.
// Vocabulary words without a vector score cosine 0; seeds without a vector
// are skipped with a warning.
Matrix<double> build_word_promotion_embedding(const WordVectors& vectors, const SeedConfig& seeds,
                                              const Vocabulary& vocabulary, double epsilon);

// Debug dump: "word\tcategory\tvalue" rows, top_n per category by value.
void write_word_promotion_tsv(std::ostream& out, const Matrix<double>& word_promo,
                              const Vocabulary& vocabulary, const SeedConfig& seeds,
                              std::size_t top_n);

}  // namespace smtm
