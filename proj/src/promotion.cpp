#include "smtm/promotion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "smtm/error.hpp"
#include "smtm/log.hpp"

namespace smtm {

Matrix<double> build_category_promotion(const Matrix<std::uint8_t>& indicator, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in [0, 1]");
  const std::size_t num_docs = indicator.rows();
  const std::size_t num_cats = indicator.cols();
  Matrix<double> promo(num_docs, num_cats, 1.0);
  if (mu == 1.0) return promo;

  const auto c_total = static_cast<double>(num_cats);
  for (std::size_t d = 0; d < num_docs; ++d) {
    auto row = promo.row(d);
    double total = 0.0;
    for (std::size_t c = 0; c < num_cats; ++c) {
      row[c] = indicator(d, c) ? 1.0 : mu;
      total += row[c];
    }
    if (total == 0.0) {
      std::fill(row.begin(), row.end(), 1.0);
      continue;
    }
    for (double& u : row) u = u / total * c_total;
  }
  return promo;
}

Matrix<double> normalize_word_relevance(const Matrix<double>& relevance, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const std::size_t vocab = relevance.rows();
  const std::size_t num_cats = relevance.cols();
  Matrix<double> normalized(vocab, num_cats, 0.0);
  for (std::size_t w = 0; w < vocab; ++w) {
    const auto v = relevance.row(w);
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (std::size_t c = 0; c < num_cats; ++c) {
      const double share = total > 0.0 ? v[c] / total : 0.0;
      normalized(w, c) = std::max(share, epsilon);
    }
  }
  const auto w_total = static_cast<double>(vocab);
  for (std::size_t c = 0; c < num_cats; ++c) {
    double column = 0.0;
    for (std::size_t w = 0; w < vocab; ++w) column += normalized(w, c);
    for (std::size_t w = 0; w < vocab; ++w) normalized(w, c) = normalized(w, c) / column * w_total;
  }
  return normalized;
}

Matrix<double> build_word_promotion(const Corpus& corpus, const SeedConfig& seeds,
                                    double epsilon) {
  const std::size_t vocab = corpus.vocab_size();
  const std::size_t num_cats = seeds.num_categories();

  // Distinct words per document, for counting co-occurrence with each seed.
  std::vector<std::vector<WordId>> distinct(corpus.num_docs());
  for (DocIndex d = 0; d < corpus.num_docs(); ++d) {
    auto& words = distinct[d] = corpus.document(d);
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
  }

  Matrix<double> relevance(vocab, num_cats, 0.0);
  std::vector<std::size_t> co_df(vocab);
  for (CategoryId c = 0; c < num_cats; ++c) {
    const auto& seed_ids = seeds.seeds[c];
    if (seed_ids.empty()) throw ConsistencyError("category without seeds reached word promotion");
    for (WordId s : seed_ids) {
      const auto& docs = corpus.postings(s);
      if (docs.empty()) {
        throw ConsistencyError("seed '" + corpus.vocabulary().word(s) + "' has zero document frequency");
      }
      std::fill(co_df.begin(), co_df.end(), 0);
      for (DocIndex d : docs) {
        for (WordId w : distinct[d]) ++co_df[w];
      }
      const double df_s = static_cast<double>(docs.size());
      const double weight = 1.0 / static_cast<double>(seed_ids.size());
      for (std::size_t w = 0; w < vocab; ++w) {
        if (co_df[w]) relevance(w, c) += static_cast<double>(co_df[w]) / df_s * weight;
      }
    }
  }
  return normalize_word_relevance(relevance, epsilon);
}

Matrix<double> uniform_word_promotion(std::size_t vocab_size, std::size_t num_categories) {
  return Matrix<double>(vocab_size, num_categories, 1.0);
}

const std::vector<double>* WordVectors::find(const std::string& word) const {
  auto it = vectors.find(word);
  return it == vectors.end() ? nullptr : &it->second;
}

WordVectors parse_word_vectors(std::istream& in) {
  WordVectors table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw DataError("word vectors line " + std::to_string(line_no) + ": bad number '" + token +
                        "'");
      }
    }
    if (line_no == 1 && values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) {
      continue;  // word2vec "count dim" header
    }
    if (values.empty()) {
      throw DataError("word vectors line " + std::to_string(line_no) + ": no components");
    }
    if (table.dim == 0) table.dim = values.size();
    if (values.size() != table.dim) {
      throw DataError("word vectors line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.dim) + " components, got " +
                      std::to_string(values.size()));
    }
    table.vectors.insert_or_assign(std::move(word), std::move(values));
  }
  return table;
}

WordVectors load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_word_vectors(in);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

Matrix<double> build_word_promotion_embedding(const WordVectors& vectors, const SeedConfig& seeds,
                                              const Vocabulary& vocabulary, double epsilon) {
  const std::size_t vocab = vocabulary.size();
  const std::size_t num_cats = seeds.num_categories();
  std::vector<const std::vector<double>*> word_vecs(vocab);
  for (WordId w = 0; w < vocab; ++w) word_vecs[w] = vectors.find(vocabulary.word(w));

  Matrix<double> relevance(vocab, num_cats, 0.0);
  for (CategoryId c = 0; c < num_cats; ++c) {
    std::vector<WordId> usable;
    for (WordId s : seeds.seeds[c]) {
      if (word_vecs[s]) {
        usable.push_back(s);
      } else {
        log::warn("seed word '" + vocabulary.word(s) + "' of category '" + seeds.categories[c] +
                  "' has no vector; dropped");
      }
    }
    if (usable.empty()) {
      throw DataError("category '" + seeds.categories[c] + "' has no seed word with a vector");
    }
    const double weight = 1.0 / static_cast<double>(usable.size());
    for (WordId s : usable) {
      for (WordId w = 0; w < vocab; ++w) {
        const double cos = word_vecs[w] ? cosine_similarity(*word_vecs[s], *word_vecs[w]) : 0.0;
        relevance(w, c) += (cos + 1.0) / 2.0 * weight;
      }
    }
  }
  return normalize_word_relevance(relevance, epsilon);
}

void write_word_promotion_tsv(std::ostream& out, const Matrix<double>& word_promo,
                              const Vocabulary& vocabulary, const SeedConfig& seeds,
                              std::size_t top_n) {
  out << "word\tcategory\tpromotion\n";
  std::vector<WordId> order(word_promo.rows());
  for (CategoryId c = 0; c < seeds.num_categories(); ++c) {
    std::iota(order.begin(), order.end(), WordId{0});
    const std::size_t n = std::min(top_n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](WordId a, WordId b) {
                        if (word_promo(a, c) != word_promo(b, c)) return word_promo(a, c) > word_promo(b, c);
                        return a < b;
                      });
    for (std::size_t k = 0; k < n; ++k) {
      out << vocabulary.word(order[k]) << '\t' << seeds.categories[c] << '\t'
          << word_promo(order[k], c) << '\n';
    }
  }
}

}  // namespace smtm
