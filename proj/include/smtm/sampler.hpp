#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>

#include "smtm/corpus.hpp"
#include "smtm/model.hpp"
#include "smtm/promotion.hpp"
#include "smtm/rng.hpp"

namespace smtm {

// Unnormalized joint weights for (x, z) of token t in document d, written to
// out[0] (background) and out[1 + c] (category c). The token must already be
// removed from the counts. Returns the total weight.
double token_weights(const ModelState& state, std::size_t d, std::size_t t,
                     const Hyperparams& hyper, std::span<double> out);

// Removes token t, draws a new (x, z), adds it back.
void sample_token(ModelState& state, std::size_t d, std::size_t t, const PromotionTables& promos,
                  const Hyperparams& hyper, Rng& rng);

struct AlphaLogWeights {
  double on = 0.0;
  double off = 0.0;

  // Normalized probability of alpha = 1 (log-sum-exp).
  double prob_on() const;
};

// Selector conditional for one (d, c) in log space. `doc_cat_count` is
// n_{d,c}; `rest_count` is the document's category mass outside c;
// `rest_selected` is the number of selectors on outside c.
AlphaLogWeights alpha_log_weights(double doc_cat_count, double rest_count,
                                  std::size_t rest_selected, std::size_t num_categories,
                                  const Hyperparams& hyper);
AlphaLogWeights alpha_log_weights(const ModelState& state, std::size_t d, std::size_t c,
                                  const Hyperparams& hyper);

void sample_alpha(ModelState& state, std::size_t d, std::size_t c, const Hyperparams& hyper,
                  Rng& rng);

// One full sweep: every token in document-major order, then every selector
// (d-major, c-minor) unless sparsity is disabled.
void run_iteration(ModelState& state, const PromotionTables& promos, const Hyperparams& hyper,
                   Rng& rng);

// Builds both promotion tables as configured by hyper.variant. `vectors` is
// required for the embedding mode.
PromotionTables build_promotions(const Corpus& corpus, const SeedConfig& seeds,
                                 const Matrix<std::uint8_t>& indicator, const Hyperparams& hyper,
                                 const WordVectors* vectors = nullptr);

struct IterationStats {
  int iteration = 0;
  double category_background_ratio = 0.0;  // n1 / n0
  double mean_selected = 0.0;              // mean |alpha_d|
};

IterationStats iteration_stats(const ModelState& state, int iteration);
void write_stats_csv_header(std::ostream& out);
void write_stats_csv_row(std::ostream& out, const IterationStats& stats);

struct ChainResult {
  Hyperparams hyper;  // resolved
  PromotionTables promos;
  ModelState state;
};

// Called after each completed iteration (1-based).
using IterationObserver = std::function<void(int iteration, const ModelState& state)>;

// Promotions, random start, hyper.iterations sweeps with an exact recount
// every hyper.recount_interval sweeps. Returns the final state.
ChainResult run_chain(const Corpus& corpus, const SeedConfig& seeds, const Hyperparams& hyper,
                      std::uint64_t rng_seed, const WordVectors* vectors = nullptr,
                      const IterationObserver& observer = {});

}  // namespace smtm
