// Property-based acceptance suite. Prints one PASS/FAIL line per criterion
// and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smtm/classify.hpp"
#include "smtm/eval.hpp"
#include "smtm/log.hpp"
#include "smtm/model.hpp"
#include "smtm/promotion.hpp"
#include "smtm/sampler.hpp"
#include "smtm/synth.hpp"

using namespace smtm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double chain_macro_f1(const fixture::Planted& p, const ModelState& s, const Hyperparams& h) {
  return evaluate(predict(p.corpus, s, h), p.corpus.doc_ids(), p.gold, p.seeds.categories).macro_f1;
}

Outcome count_consistency() {
  const auto start = Clock::now();
  const auto p = fixture::planted(SynthSpec{});
  Hyperparams h;
  h.iterations = 100;
  h.recount_interval = 0;
  double worst = 0.0;
  bool exact_total = true;
  const auto total = static_cast<double>(p.corpus.total_tokens());
  const auto promos = build_promotions(p.corpus, p.seeds, seed_presence(p.corpus, p.seeds),
                                       h.resolved(p.seeds.num_categories()));
  run_chain(p.corpus, p.seeds, h, 7, nullptr, [&](int, const ModelState& s) {
    worst = std::max(worst, oracle::table_drift(s, oracle::recount(s, promos)));
    if (s.n_background + s.n_category != total) exact_total = false;
  });
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && exact_total && secs < 30.0,
          "max rel drift " + fmt("%.3g", worst) + ", n0+n1 exact " + (exact_total ? "yes" : "no") +
              ", " + fmt("%.2f s", secs)};
}

Outcome spu_degeneration() {
  SynthSpec spec;
  spec.docs = 50;
  const auto p = fixture::planted(spec);
  Hyperparams h;
  h.mu = 1.0;
  h.variant.word_promotion = WordPromotionMode::none;
  h.iterations = 20;
  h.recount_interval = 0;
  const Hyperparams hr = h.resolved(p.seeds.num_categories());
  const auto indicator = seed_presence(p.corpus, p.seeds);
  const std::uint64_t seed = 11;

  oracle::SpuReference ref(p.corpus, indicator, hr, seed);
  bool same = true;
  int first_diff = 0;
  const auto promos = build_promotions(p.corpus, p.seeds, indicator, hr);
  bool unit = true;
  for (double v : promos.cat_promo.values()) unit = unit && v == 1.0;
  for (double v : promos.word_promo.values()) unit = unit && v == 1.0;

  Rng rng(seed);
  ModelState s = init_state(p.corpus, indicator, promos, rng);
  auto matches = [&] {
    if (s.x != ref.x()) return false;
    for (std::size_t t = 0; t < s.z.size(); ++t) {
      if (s.z[t] != ref.z()[t]) return false;
    }
    return std::ranges::equal(s.alpha.values(), ref.alpha());
  };
  same = matches();
  for (int it = 1; it <= 20 && same; ++it) {
    run_iteration(s, promos, hr, rng);
    ref.sweep();
    if (!matches()) {
      same = false;
      first_diff = it;
    }
  }
  return {same && unit, std::string("unit increments ") + (unit ? "yes" : "no") + ", traces " +
                            (same ? "identical over 20 iterations"
                                  : "diverge at iteration " + std::to_string(first_diff))};
}

Outcome promotion_normalization() {
  std::mt19937_64 rng(3);
  double worst_row = 0.0;
  for (double mu : {0.0, 0.3, 1.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t C = 2 + rng() % 9;
      Matrix<std::uint8_t> ind(1, C, 0);
      const double density = (rng() % 100) / 100.0;
      for (std::size_t c = 0; c < C; ++c) ind(0, c) = (rng() % 1000) / 1000.0 < density;
      const auto P = build_category_promotion(ind, mu);
      double sum = 0.0;
      for (double v : P.row(0)) sum += v;
      worst_row = std::max(worst_row, std::abs(sum - static_cast<double>(C)));
    }
  }
  double worst_col = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = fixture::random_corpus(rng, 10 + rng() % 40, 8 + rng() % 40, 30);
    const auto seeds = fixture::random_seeds(rng, corpus, 2 + rng() % 4);
    const auto promo = build_word_promotion(corpus, seeds, 0.01);
    for (std::size_t c = 0; c < seeds.num_categories(); ++c) {
      double sum = 0.0;
      for (std::size_t w = 0; w < promo.rows(); ++w) sum += promo(w, c);
      worst_col = std::max(worst_col, std::abs(sum - static_cast<double>(corpus.vocab_size())));
    }
  }
  Matrix<std::uint8_t> hand(1, 4, 0);
  hand(0, 0) = 1;
  const auto P = build_category_promotion(hand, 0.3);
  const double expect[4] = {2.1053, 0.6316, 0.6316, 0.6316};
  bool hand_ok = true;
  for (int c = 0; c < 4; ++c) hand_ok = hand_ok && std::round(P(0, c) * 1e4) / 1e4 == expect[c];
  return {worst_row <= 1e-9 && worst_col <= 1e-6 && hand_ok,
          "row err " + fmt("%.2g", worst_row) + ", column err " + fmt("%.2g", worst_col) +
              ", hand case " + (hand_ok ? "ok" : "wrong")};
}

Outcome selector_oracle() {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int draws = 100000;
  int configs = 0, failures = 0, saturated = 0;
  double worst_z = 0.0, worst_formula = 0.0;
  Rng rng(99);
  while (configs < 50) {
    const std::size_t C = 2 + gen() % 7;
    Hyperparams h = Hyperparams{}.resolved(C);
    const double n_dc = unit(gen) < 0.3 ? 0.0 : unit(gen) * 4.0;
    const std::size_t A = gen() % C;
    const double rest = A == 0 && unit(gen) < 0.5 ? 0.0 : unit(gen) * 40.0;

    ModelState s;
    s.num_docs = 1;
    s.num_categories = C;
    s.n_doc_cat = Matrix<double>(1, C, 0.0);
    s.alpha = Matrix<std::uint8_t>(1, C, 0);
    const std::size_t c = 0;
    s.n_doc_cat(0, c) = n_dc;
    for (std::size_t k = 1; k < C; ++k) s.n_doc_cat(0, k) = rest / static_cast<double>(C - 1);
    for (std::size_t k = 1; k <= A; ++k) s.alpha(0, k) = 1;
    s.alpha_count = {static_cast<std::uint32_t>(A)};

    const double expected = oracle::selector_prob_on(n_dc, rest, static_cast<double>(A),
                                                     static_cast<double>(C), h);
    worst_formula = std::max(worst_formula, std::abs(alpha_log_weights(s, 0, c, h).prob_on() - expected));
    // Too few expected hits for a normal band; covered by the exact comparison only.
    if (draws * std::min(expected, 1.0 - expected) < 10.0) {
      ++saturated;
      continue;
    }
    int on = 0;
    for (int i = 0; i < draws; ++i) {
      sample_alpha(s, 0, c, h, rng);
      on += s.alpha(0, c);
    }
    const double freq = static_cast<double>(on) / draws;
    const double sigma = std::sqrt(expected * (1.0 - expected) / draws);
    const double z = std::abs(freq - expected) / sigma;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++failures;
    ++configs;
  }
  return {failures == 0 && worst_formula <= 1e-12,
          std::to_string(configs) + " sampled configs, worst |z| " + fmt("%.2f", worst_z) + ", " +
              std::to_string(failures) + " outside 3 sigma; formula diff " + fmt("%.2g", worst_formula) +
              " over " + std::to_string(configs + saturated) + " configs"};
}

Outcome token_oracle() {
  std::mt19937_64 gen(17);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t D = 1 + gen() % 5, W = 2 + gen() % 9, C = 2 + gen() % 2;
    const auto corpus = fixture::random_corpus(gen, D, W, 6);
    const auto seeds = fixture::random_seeds(gen, corpus, C);
    Hyperparams h;
    h.mu = (gen() % 11) / 10.0;
    const Hyperparams hr = h.resolved(C);
    const auto indicator = seed_presence(corpus, seeds);
    const auto promos = build_promotions(corpus, seeds, indicator, hr);
    Rng rng(gen());
    ModelState s = init_state(corpus, indicator, promos, rng);
    for (int it = 0; it < 3; ++it) run_iteration(s, promos, hr, rng);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t c = 0; c < C; ++c) {
        if (gen() % 3 == 0) s.alpha(d, c) = 0;
      }
    }
    std::vector<double> got(C + 1);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t t = s.doc_begin(d); t < s.doc_end(d); ++t) {
        const auto want = oracle::token_weights(s, promos, d, t, hr);
        remove_token(s, d, t, promos);
        token_weights(s, d, t, hr, got);
        add_token(s, d, t, promos);
        for (std::size_t k = 0; k <= C; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
      }
    }
  }
  return {worst <= 1e-12, "max abs diff " + fmt("%.3g", worst)};
}

Outcome synthetic_recovery() {
  const auto start = Clock::now();
  const auto p = fixture::planted(SynthSpec{});
  std::vector<EvalReport> reports;
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto res = run_chain(p.corpus, p.seeds, Hyperparams{}, derive_seed(1, r));
    auto preds = predict(p.corpus, res.state, res.hyper);
    reports.push_back(evaluate(preds, p.corpus.doc_ids(), p.gold, p.seeds.categories));
  }
  const auto agg = aggregate_reports(reports);
  const double secs = seconds_since(start);
  const double auc = agg.macro_auc.value_or(0.0);
  return {agg.macro_f1 >= 0.9 && auc >= 0.95 && secs < 60.0,
          "Macro-F1 " + fmt("%.4f", agg.macro_f1) + ", Macro-AUC " + fmt("%.4f", auc) + ", " +
              fmt("%.2f s", secs)};
}

Outcome metric_correctness() {
  bool ok = true;
  std::string notes;
  {
    // A: predicted d0,d1, gold d0 -> TP 1, FP 1, FN 0.
    // B: predicted d0, gold d0,d2 -> TP 1, FP 0, FN 1.
    const std::vector<LabelSet> p3 = {{0, 1}, {0}, {}};
    const std::vector<LabelSet> g3 = {{0, 1}, {}, {1}};
    const auto rep = macro_f1(p3, g3, {"A", "B"});
    const bool hand = rep.per_category[0].tp == 1 && rep.per_category[0].fp == 1 &&
                      rep.per_category[0].fn == 0 && rep.per_category[1].tp == 1 &&
                      rep.per_category[1].fp == 0 && rep.per_category[1].fn == 1 &&
                      rep.macro_f1 == 2.0 / 3.0;
    ok = ok && hand;
    notes += std::string("F1 2/3 ") + (hand ? "ok" : "wrong");
  }
  {
    const double s[] = {0.9, 0.4, 0.6, 0.1};
    const std::uint8_t y[] = {1, 1, 0, 0};
    const auto auc = rank_auc(s, y);
    const bool hand = auc && *auc == 0.75;
    ok = ok && hand;
    notes += std::string(", AUC 3/4 ") + (hand ? "ok" : "wrong");
  }
  std::mt19937_64 gen(23);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 19;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> pos(n);
    const int levels = 1 + static_cast<int>(gen() % 8);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(gen() % levels) / levels;
      pos[i] = gen() % 2;
    }
    pos[0] = 1;
    pos[1] = 0;
    const auto auc = rank_auc(scores, pos);
    if (!auc) {
      ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(*auc - oracle::trapezoid_auc(scores, pos)));
    ++compared;
  }
  ok = ok && worst <= 1e-12;
  notes += ", rank vs trapezoid max diff " + fmt("%.2g", worst) + " on " + std::to_string(compared);
  {
    const double s[] = {0.9, 0.8, 0.3, 0.1};
    const double flat[] = {0.5, 0.5, 0.5, 0.5};
    const std::uint8_t y[] = {1, 1, 0, 0};
    const bool ends = rank_auc(s, y) == 1.0 && rank_auc(flat, y) == 0.5;
    const std::vector<LabelSet> g = {{0}, {1}, {0, 1}};
    const bool perfect = macro_f1(g, g, {"A", "B"}).macro_f1 == 1.0;
    ok = ok && ends && perfect;
    notes += std::string(", endpoints ") + (ends && perfect ? "ok" : "wrong");
  }
  return {ok, notes};
}

Outcome ablation_ordering() {
  double full = 0, no_sparsity = 0, no_cat = 0, no_word = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthSpec spec;
    spec.rng_seed = seed;
    const auto p = fixture::planted(spec);
    std::size_t labels = 0;
    for (const auto& g : p.gold) labels += g.size();
    const auto C = p.seeds.num_categories();
    auto run = [&](Hyperparams h) {
      const auto res = run_chain(p.corpus, p.seeds, h, derive_seed(seed, 1));
      return chain_macro_f1(p, res.state, res.hyper) / 5.0;
    };
    full += run(Hyperparams{});
    Hyperparams h;
    h.variant.sparsity = false;
    h.top_k = static_cast<std::size_t>(std::llround(static_cast<double>(labels) / static_cast<double>(C)));
    no_sparsity += run(h);
    h = Hyperparams{};
    h.variant.category_promotion = false;
    no_cat += run(h);
    h = Hyperparams{};
    h.variant.word_promotion = WordPromotionMode::none;
    no_word += run(h);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "full %.4f, -sparsity %.4f, -category %.4f, -word %.4f", full,
                no_sparsity, no_cat, no_word);
  return {full >= no_sparsity && full >= no_cat && full >= no_word, buf};
}

Outcome convergence_plateau() {
  const auto p = fixture::planted(SynthSpec{});
  Hyperparams h = Hyperparams{}.resolved(p.seeds.num_categories());
  double f2 = 0, f50 = 0, f100 = 0;
  run_chain(p.corpus, p.seeds, h, derive_seed(1, 0), nullptr, [&](int it, const ModelState& s) {
    if (it == 2) f2 = chain_macro_f1(p, s, h);
    if (it == 50) f50 = chain_macro_f1(p, s, h);
    if (it == 100) f100 = chain_macro_f1(p, s, h);
  });
  char buf[160];
  std::snprintf(buf, sizeof buf, "F1 at 2/50/100: %.4f / %.4f / %.4f", f2, f50, f100);
  return {f100 > f2 && std::abs(f100 - f50) < 0.05, buf};
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome determinism() {
  const fs::path root = fs::path(SMTM_TEST_WORK_DIR) / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = quoted(SMTM_CLI_PATH);
  auto sh = [&](const std::string& cmd) { return std::system((cmd + " 2>>" + quoted(root / "log.txt")).c_str()); };
  if (sh(cli + " synth --output-dir " + quoted(root / "syn")) != 0 ||
      sh(cli + " preprocess --input " + quoted(root / "syn" / "corpus.jsonl") + " --output " +
         quoted(root / "corpus.json") + " > /dev/null") != 0) {
    return {false, "data preparation failed, see " + (root / "log.txt").string()};
  }
  std::vector<std::string> outputs;
  for (int pass = 0; pass < 2; ++pass) {
    const auto dir = root / ("pass" + std::to_string(pass));
    const std::string jobs = pass == 0 ? "1" : "2";
    if (sh(cli + " train --corpus " + quoted(root / "corpus.json") + " --seeds " +
           quoted(root / "syn" / "seeds.txt") + " --runs 2 --iterations 40 --rng-seed 5 --jobs " +
           jobs + " --output-dir " + quoted(dir)) != 0 ||
        sh(cli + " predict --corpus " + quoted(root / "corpus.json") + " --runs-dir " + quoted(dir)) != 0) {
      return {false, "pipeline failed, see " + (root / "log.txt").string()};
    }
    std::string all;
    for (const char* name : {"predictions_000.tsv", "predictions_001.tsv"}) {
      std::ifstream in(dir / name, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      all += ss.str();
    }
    outputs.push_back(all);
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, std::to_string(outputs[0].size()) + " bytes, " +
                    (same ? "identical (1 vs 2 jobs)" : "different")};
}

}  // namespace

int main() {
  log::set_sink([](log::Level level, std::string_view msg) {
    if (level == log::Level::warning) std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data());
  });
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"count consistency", count_consistency},
      {"SPU degeneration", spu_degeneration},
      {"promotion normalization", promotion_normalization},
      {"selector sampler oracle", selector_oracle},
      {"token distribution oracle", token_oracle},
      {"synthetic recovery", synthetic_recovery},
      {"metric correctness", metric_correctness},
      {"ablation ordering", ablation_ordering},
      {"convergence plateau", convergence_plateau},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
