#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "smtm/corpus.hpp"
#include "smtm/matrix.hpp"
#include "smtm/promotion.hpp"
#include "smtm/rng.hpp"

namespace smtm {

enum class WordPromotionMode : std::uint8_t { cooccurrence, embedding, none };

// Selector conditional. `printed` is the published product of Gamma terms;
// `collapsed` is the textbook collapsed spike-and-slab ratio, kept for
// experiments only.
enum class AlphaForm : std::uint8_t { printed, collapsed };

#ifdef SMTM_ALPHA_COLLAPSED_DEFAULT
inline constexpr AlphaForm kDefaultAlphaForm = AlphaForm::collapsed;
#else
inline constexpr AlphaForm kDefaultAlphaForm = AlphaForm::printed;
#endif

struct Variant {
  bool sparsity = true;
  bool category_promotion = true;
  WordPromotionMode word_promotion = WordPromotionMode::cooccurrence;

  bool operator==(const Variant&) const = default;
};

struct Hyperparams {
  double mu = 0.3;
  double pi = 1.0;
  double p = 1.0;
  double q = 1.0;
  double beta0 = 0.01;
  double beta1 = 0.01;
  double gamma0 = 0.0;  // 0 selects 50 / C once C is known
  double gamma1 = 1e-7;
  double epsilon = 0.01;
  int iterations = 100;
  int runs = 10;
  std::uint64_t rng_seed = 1;
  Variant variant;
  std::size_t top_k = 0;  // labels per category under the no-sparsity variant
  int recount_interval = 20;
  AlphaForm alpha_form = kDefaultAlphaForm;

  // Copy with gamma0 filled in for `num_categories`.
  Hyperparams resolved(std::size_t num_categories) const;
  // mu actually used for category promotion (1 when that promotion is off).
  double effective_mu() const { return variant.category_promotion ? mu : 1.0; }
  // Throws ConfigError. Expects a resolved gamma0.
  void validate() const;
};

std::string to_string(WordPromotionMode mode);
WordPromotionMode parse_word_promotion_mode(const std::string& name);

// Full Gibbs state of one chain. Tokens are stored flattened in document
// order; document d owns positions [doc_offsets[d], doc_offsets[d+1]).
struct ModelState {
  std::size_t num_docs = 0;
  std::size_t num_categories = 0;
  std::size_t vocab_size = 0;

  std::vector<std::size_t> doc_offsets;
  std::vector<WordId> words;
  std::vector<std::uint8_t> x;  // 0 background, 1 category-topic
  std::vector<std::int32_t> z;  // category where x == 1, else -1

  Matrix<std::uint8_t> alpha;          // D x C selectors
  std::vector<std::uint32_t> alpha_count;

  double n_background = 0.0;       // n_0
  double n_category = 0.0;         // n_1
  std::vector<double> n_bg_word;   // n_{0,w}
  Matrix<double> n_word_cat;       // n_{c,w}, stored W x C
  std::vector<double> n_cat;       // sum_w n_{c,w}
  Matrix<double> n_doc_cat;        // n_{d,c}
  std::vector<double> n_doc;       // n_{d,.}

  std::size_t total_tokens() const noexcept { return words.size(); }
  std::size_t doc_begin(std::size_t d) const { return doc_offsets[d]; }
  std::size_t doc_end(std::size_t d) const { return doc_offsets[d + 1]; }
};

// Urn updates for one token (position t of document d), using the token's
// current (x, z). Removal clamps values in (-1e-6, 0) to zero and throws
// ConsistencyError below that.
void add_token(ModelState& state, std::size_t d, std::size_t t, const PromotionTables& promos);
void remove_token(ModelState& state, std::size_t d, std::size_t t, const PromotionTables& promos);

// Random start: x uniform on {0,1}; z uniform over the categories whose
// seeds occur in the document (all categories if none do); all selectors on.
ModelState init_state(const Corpus& corpus, const Matrix<std::uint8_t>& indicator,
                      const PromotionTables& promos, Rng& rng);

// State with the given assignments and count tables rebuilt from scratch.
ModelState state_from_assignments(const Corpus& corpus, std::size_t num_categories,
                                  std::vector<std::uint8_t> x, std::vector<std::int32_t> z,
                                  Matrix<std::uint8_t> alpha, const PromotionTables& promos);

// Recomputes every count table from (x, z, promotions), replacing the
// incrementally maintained values.
void recount(ModelState& state, const PromotionTables& promos);

// Largest discrepancy between the stored tables and a fresh recount, as
// |stored - exact| / max(1, |exact|).
double max_count_drift(const ModelState& state, const PromotionTables& promos);

struct PosteriorEstimates {
  std::vector<double> phi0;        // W
  Matrix<double> phi;              // C x W
  Matrix<double> theta;            // D x C
  double lambda = 0.5;
  std::vector<double> category_prior;  // p(c) from smoothed category-token mass
};

PosteriorEstimates estimate(const ModelState& state, const Hyperparams& hyper);

// Top n words of category c by phi, ties broken by word id.
std::vector<std::pair<std::string, double>> top_words(const PosteriorEstimates& estimates,
                                                      const Vocabulary& vocabulary, CategoryId c,
                                                      std::size_t n);

// Everything needed to rebuild a trained state against its corpus.
struct Checkpoint {
  std::uint64_t corpus_hash = 0;
  std::uint32_t run_index = 0;
  std::uint64_t chain_seed = 0;
  Hyperparams hyper;
  SeedConfig seeds;
  PromotionTables promos;
  std::vector<std::uint8_t> x;
  std::vector<std::int32_t> z;
  Matrix<std::uint8_t> alpha;
};

Checkpoint make_checkpoint(const Corpus& corpus, const SeedConfig& seeds, const Hyperparams& hyper,
                           const PromotionTables& promos, const ModelState& state,
                           std::uint32_t run_index, std::uint64_t chain_seed);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Throws ConfigError when the checkpoint was trained on a different corpus.
ModelState restore_state(const Checkpoint& checkpoint, const Corpus& corpus);

}  // namespace smtm
