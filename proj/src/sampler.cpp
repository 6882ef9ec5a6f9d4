#include "smtm/sampler.hpp"

#include <cmath>
#include <ostream>
#include <vector>

#include "smtm/error.hpp"

namespace smtm {
namespace {

// lgamma without touching the global signgam, so chains may run in parallel.
double log_gamma(double v) {
  if (!(v > 0.0)) throw ConsistencyError("log-gamma argument must be positive");
#if defined(__GLIBC__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(v, &sign);
#else
  return std::lgamma(v);
#endif
}

}  // namespace

double token_weights(const ModelState& s, std::size_t d, std::size_t t, const Hyperparams& hyper,
                     std::span<double> out) {
  const WordId w = s.words[t];
  const std::size_t num_cats = s.num_categories;
  const auto vocab_d = static_cast<double>(s.vocab_size);

  const double switch_total = s.n_background + s.n_category + 2.0 * hyper.pi;
  const double background_share = (s.n_background + hyper.pi) / switch_total;
  const double category_share = (s.n_category + hyper.pi) / switch_total;

  out[0] = background_share * (s.n_bg_word[w] + hyper.beta0) /
           (s.n_background + vocab_d * hyper.beta0);
  double total = out[0];

  const auto alpha = s.alpha.row(d);
  const auto doc_counts = s.n_doc_cat.row(d);
  double doc_total = 0.0;
  for (std::size_t c = 0; c < num_cats; ++c) {
    doc_total += alpha[c] * doc_counts[c] + alpha[c] * hyper.gamma0 + hyper.gamma1;
  }
  const auto word_counts = s.n_word_cat.row(w);
  for (std::size_t c = 0; c < num_cats; ++c) {
    const double word_part = (word_counts[c] + hyper.beta1) / (s.n_cat[c] + vocab_d * hyper.beta1);
    const double doc_part =
        (alpha[c] * doc_counts[c] + alpha[c] * hyper.gamma0 + hyper.gamma1) / doc_total;
    out[1 + c] = category_share * word_part * doc_part;
    total += out[1 + c];
  }

  if (!std::isfinite(total) || !(total > 0.0)) {
    throw ConsistencyError("token weights degenerate at document " + std::to_string(d));
  }
  for (std::size_t k = 0; k <= num_cats; ++k) {
    if (!(out[k] >= 0.0)) {
      throw ConsistencyError("negative or NaN token weight at document " + std::to_string(d));
    }
  }
  return total;
}

void sample_token(ModelState& s, std::size_t d, std::size_t t, const PromotionTables& promos,
                  const Hyperparams& hyper, Rng& rng) {
  thread_local std::vector<double> weights;
  weights.resize(s.num_categories + 1);
  remove_token(s, d, t, promos);
  const double total = token_weights(s, d, t, hyper, weights);
  const std::size_t k = rng.categorical(weights, total);
  if (k == 0) {
    s.x[t] = 0;
    s.z[t] = -1;
  } else {
    s.x[t] = 1;
    s.z[t] = static_cast<std::int32_t>(k - 1);
  }
  add_token(s, d, t, promos);
}

double AlphaLogWeights::prob_on() const {
  // 1 / (1 + exp(off - on)), stable for either sign.
  const double diff = off - on;
  if (diff > 0.0) {
    const double e = std::exp(-diff);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(diff));
}

AlphaLogWeights alpha_log_weights(double doc_cat_count, double rest_count,
                                  std::size_t rest_selected, std::size_t num_categories,
                                  const Hyperparams& hyper) {
  const double g0 = hyper.gamma0;
  const double g1 = hyper.gamma1;
  const auto selected = static_cast<double>(rest_selected);
  const double smooth = static_cast<double>(num_categories) * g1;
  const double on_prior = std::log(hyper.p + selected);
  const double off_prior =
      std::log(hyper.q + static_cast<double>(num_categories) - selected - 1.0);

  AlphaLogWeights lw;
  if (hyper.alpha_form == AlphaForm::printed) {
    lw.on = log_gamma(doc_cat_count + g0 + g1) + log_gamma(selected * g0 + smooth + rest_count) +
            log_gamma(selected * g0 + g0 + smooth) + on_prior;
    lw.off = log_gamma(g0 + g1) + log_gamma(selected * g0 + g0 + smooth + rest_count) +
             log_gamma(selected * g0 + smooth) + off_prior;
  } else {
    const double doc_total = rest_count + doc_cat_count;
    lw.on = log_gamma(doc_cat_count + g0 + g1) - log_gamma(g0 + g1) +
            log_gamma((selected + 1.0) * g0 + smooth) -
            log_gamma((selected + 1.0) * g0 + smooth + doc_total) + on_prior;
    lw.off = log_gamma(doc_cat_count + g1) - log_gamma(g1) + log_gamma(selected * g0 + smooth) -
             log_gamma(selected * g0 + smooth + doc_total) + off_prior;
  }
  return lw;
}

namespace {

AlphaLogWeights selector_weights(const ModelState& s, std::size_t d, std::size_t c,
                                 std::size_t rest_selected, const Hyperparams& hyper) {
  const auto counts = s.n_doc_cat.row(d);
  double rest = 0.0;
  for (std::size_t k = 0; k < s.num_categories; ++k) {
    if (k != c) rest += counts[k];
  }
  return alpha_log_weights(counts[c], rest, rest_selected, s.num_categories, hyper);
}

}  // namespace

AlphaLogWeights alpha_log_weights(const ModelState& s, std::size_t d, std::size_t c,
                                  const Hyperparams& hyper) {
  return selector_weights(s, d, c, s.alpha_count[d] - s.alpha(d, c), hyper);
}

void sample_alpha(ModelState& s, std::size_t d, std::size_t c, const Hyperparams& hyper, Rng& rng) {
  s.alpha_count[d] -= s.alpha(d, c);
  const double on = selector_weights(s, d, c, s.alpha_count[d], hyper).prob_on();
  s.alpha(d, c) = rng.uniform() < on ? 1 : 0;
  s.alpha_count[d] += s.alpha(d, c);
}

void run_iteration(ModelState& s, const PromotionTables& promos, const Hyperparams& hyper,
                   Rng& rng) {
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    for (std::size_t t = s.doc_begin(d); t < s.doc_end(d); ++t) sample_token(s, d, t, promos, hyper, rng);
  }
  if (!hyper.variant.sparsity) return;
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    for (std::size_t c = 0; c < s.num_categories; ++c) sample_alpha(s, d, c, hyper, rng);
  }
}

PromotionTables build_promotions(const Corpus& corpus, const SeedConfig& seeds,
                                 const Matrix<std::uint8_t>& indicator, const Hyperparams& hyper,
                                 const WordVectors* vectors) {
  PromotionTables promos;
  promos.mu = hyper.effective_mu();
  promos.epsilon = hyper.epsilon;
  promos.cat_promo = build_category_promotion(indicator, promos.mu);
  switch (hyper.variant.word_promotion) {
    case WordPromotionMode::cooccurrence:
      promos.word_promo = build_word_promotion(corpus, seeds, hyper.epsilon);
      break;
    case WordPromotionMode::embedding:
      if (!vectors) throw ConfigError("embedding word promotion needs a word vector table");
      promos.word_promo =
          build_word_promotion_embedding(*vectors, seeds, corpus.vocabulary(), hyper.epsilon);
      break;
    case WordPromotionMode::none:
      promos.word_promo = uniform_word_promotion(corpus.vocab_size(), seeds.num_categories());
      break;
  }
  return promos;
}

IterationStats iteration_stats(const ModelState& s, int iteration) {
  IterationStats stats;
  stats.iteration = iteration;
  stats.category_background_ratio =
      s.n_background > 0.0 ? s.n_category / s.n_background : 0.0;
  double selected = 0.0;
  for (auto count : s.alpha_count) selected += count;
  stats.mean_selected = s.num_docs ? selected / static_cast<double>(s.num_docs) : 0.0;
  return stats;
}

void write_stats_csv_header(std::ostream& out) { out << "iteration,n1_over_n0,mean_selected\n"; }

void write_stats_csv_row(std::ostream& out, const IterationStats& stats) {
  out << stats.iteration << ',' << stats.category_background_ratio << ',' << stats.mean_selected
      << '\n';
}

ChainResult run_chain(const Corpus& corpus, const SeedConfig& seeds, const Hyperparams& hyper,
                      std::uint64_t rng_seed, const WordVectors* vectors,
                      const IterationObserver& observer) {
  ChainResult result;
  result.hyper = hyper.resolved(seeds.num_categories());
  result.hyper.validate();
  const auto indicator = seed_presence(corpus, seeds);
  result.promos = build_promotions(corpus, seeds, indicator, result.hyper, vectors);
  Rng rng(rng_seed);
  result.state = init_state(corpus, indicator, result.promos, rng);
  for (int it = 1; it <= result.hyper.iterations; ++it) {
    run_iteration(result.state, result.promos, result.hyper, rng);
    if (result.hyper.recount_interval > 0 && it % result.hyper.recount_interval == 0) {
      recount(result.state, result.promos);
    }
    if (observer) observer(it, result.state);
  }
  return result;
}

}  // namespace smtm
