#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smtm/error.hpp"
#include "smtm/model.hpp"
#include "smtm/sampler.hpp"

using namespace smtm;

namespace {

PromotionTables unit_promos(std::size_t D, std::size_t W, std::size_t C) {
  PromotionTables p;
  p.cat_promo = Matrix<double>(D, C, 1.0);
  p.word_promo = Matrix<double>(W, C, 1.0);
  return p;
}

struct Small {
  Corpus corpus;
  SeedConfig seeds;
  PromotionTables promos;
  Hyperparams hyper;
};

Small small_setup(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Small s;
  s.corpus = fixture::random_corpus(gen, 6, 9, 8);
  s.seeds = fixture::random_seeds(gen, s.corpus, 3);
  s.hyper = Hyperparams{}.resolved(3);
  s.promos = build_promotions(s.corpus, s.seeds, seed_presence(s.corpus, s.seeds), s.hyper);
  return s;
}

}  // namespace

TEST_CASE("hyperparameter defaults and validation") {
  Hyperparams h;
  CHECK(h.mu == 0.3);
  CHECK(h.pi == 1.0);
  CHECK(h.p == 1.0);
  CHECK(h.q == 1.0);
  CHECK(h.beta0 == 0.01);
  CHECK(h.beta1 == 0.01);
  CHECK(h.gamma1 == 1e-7);
  CHECK(h.epsilon == 0.01);
  CHECK(h.iterations == 100);
  CHECK(h.runs == 10);
  CHECK(h.resolved(23).gamma0 == doctest::Approx(50.0 / 23));
  CHECK_NOTHROW(h.resolved(20).validate());

  auto bad = [](auto mutate) {
    Hyperparams b = Hyperparams{}.resolved(4);
    mutate(b);
    return b;
  };
  CHECK_THROWS_AS(bad([](Hyperparams& b) { b.mu = 1.2; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](Hyperparams& b) { b.beta0 = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](Hyperparams& b) { b.gamma1 = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](Hyperparams& b) { b.runs = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](Hyperparams& b) { b.variant.sparsity = false; }).validate(), ConfigError);
  CHECK_NOTHROW(bad([](Hyperparams& b) {
                  b.variant.sparsity = false;
                  b.top_k = 3;
                }).validate());
  CHECK(bad([](Hyperparams& b) { b.variant.category_promotion = false; }).effective_mu() == 1.0);
}

TEST_CASE("word promotion mode names round trip") {
  for (auto m : {WordPromotionMode::cooccurrence, WordPromotionMode::embedding, WordPromotionMode::none}) {
    CHECK(parse_word_promotion_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_word_promotion_mode("bogus"), ConfigError);
}

TEST_CASE("single token placed in a category gets the promoted amounts") {
  const auto corpus = fixture::corpus_of({{"w"}});
  PromotionTables promos;
  promos.cat_promo = Matrix<double>(1, 2, 0.0);
  promos.cat_promo(0, 0) = 1.4;
  promos.cat_promo(0, 1) = 0.6;
  promos.word_promo = Matrix<double>(1, 2, 1.0);
  promos.word_promo(0, 1) = 0.25;
  const auto s = state_from_assignments(corpus, 2, {1}, {1}, Matrix<std::uint8_t>(1, 2, 1), promos);
  CHECK(s.n_doc_cat(0, 1) == 0.6);
  CHECK(s.n_word_cat(0, 1) == 0.25);
  CHECK(s.n_cat[1] == 0.25);
  CHECK(s.n_doc[0] == 0.6);
  CHECK(s.n_category == 1.0);
  CHECK(s.n_background == 0.0);
}

TEST_CASE("remove then add restores every count") {
  auto sm = small_setup(3);
  Rng rng(4);
  auto s = init_state(sm.corpus, seed_presence(sm.corpus, sm.seeds), sm.promos, rng);
  for (int i = 0; i < 2; ++i) run_iteration(s, sm.promos, sm.hyper, rng);
  const ModelState before = s;
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    for (std::size_t t = s.doc_begin(d); t < s.doc_end(d); ++t) {
      remove_token(s, d, t, sm.promos);
      add_token(s, d, t, sm.promos);
    }
  }
  CHECK(std::abs(s.n_background - before.n_background) <= 1e-12);
  for (std::size_t i = 0; i < s.n_word_cat.values().size(); ++i) {
    CHECK(std::abs(s.n_word_cat.values()[i] - before.n_word_cat.values()[i]) <= 1e-12);
  }
  for (std::size_t i = 0; i < s.n_doc_cat.values().size(); ++i) {
    CHECK(std::abs(s.n_doc_cat.values()[i] - before.n_doc_cat.values()[i]) <= 1e-12);
  }
}

TEST_CASE("removal below the tolerance is an internal fault") {
  const auto corpus = fixture::corpus_of({{"w"}});
  auto promos = unit_promos(1, 1, 2);
  auto s = state_from_assignments(corpus, 2, {0}, {-1}, Matrix<std::uint8_t>(1, 2, 1), promos);
  remove_token(s, 0, 0, promos);
  CHECK(s.n_background == 0.0);
  CHECK_THROWS_AS(remove_token(s, 0, 0, promos), ConsistencyError);

  auto t = state_from_assignments(corpus, 2, {0}, {-1}, Matrix<std::uint8_t>(1, 2, 1), promos);
  t.n_background = 1.0 - 5e-7;
  t.n_bg_word[0] = 1.0 - 5e-7;
  remove_token(t, 0, 0, promos);
  CHECK(t.n_background == 0.0);
}

TEST_CASE("init_state matches a from-scratch recount and skips empty documents") {
  std::mt19937_64 gen(8);
  auto corpus = fixture::corpus_of({{"a", "b", "c"}, {}, {"a", "a", "d"}});
  auto seeds = fixture::seeds_of("x: a\ny: d\n", corpus);
  const auto hyper = Hyperparams{}.resolved(2);
  const auto ind = seed_presence(corpus, seeds);
  const auto promos = build_promotions(corpus, seeds, ind, hyper);
  Rng rng(5);
  const auto s = init_state(corpus, ind, promos, rng);
  CHECK(oracle::table_drift(s, oracle::recount(s, promos)) <= 1e-12);
  CHECK(s.n_doc[1] == 0.0);
  CHECK(s.n_doc_cat(1, 0) == 0.0);
  CHECK(s.n_doc_cat(1, 1) == 0.0);
  CHECK(s.n_background + s.n_category == 6.0);
  for (std::size_t t = 0; t < s.x.size(); ++t) {
    if (s.x[t]) {
      const auto d = t < 3 ? 0u : 2u;
      // Documents with seed evidence start inside their seeded categories.
      if (d == 0) CHECK(s.z[t] == 0);
    } else {
      CHECK(s.z[t] == -1);
    }
  }
}

TEST_CASE("recount repairs drifted tables") {
  auto sm = small_setup(9);
  Rng rng(1);
  auto s = init_state(sm.corpus, seed_presence(sm.corpus, sm.seeds), sm.promos, rng);
  s.n_cat[0] += 0.5;
  CHECK(max_count_drift(s, sm.promos) > 0.1);
  recount(s, sm.promos);
  CHECK(max_count_drift(s, sm.promos) == 0.0);
  CHECK(oracle::table_drift(s, oracle::recount(s, sm.promos)) <= 1e-12);
}

TEST_CASE("estimates at zero counts are uniform") {
  const auto corpus = fixture::corpus_of({{}, {}, {"a", "b", "c", "d"}});
  auto promos = unit_promos(3, 4, 3);
  const auto x = std::vector<std::uint8_t>(4, 0);
  const auto z = std::vector<std::int32_t>(4, -1);
  auto s = state_from_assignments(corpus, 3, x, z, Matrix<std::uint8_t>(3, 3, 1), promos);
  const auto est = estimate(s, Hyperparams{}.resolved(3));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(est.theta(0, c) == doctest::Approx(1.0 / 3));
    for (std::size_t w = 0; w < 4; ++w) CHECK(est.phi(c, w) == doctest::Approx(0.25));
    CHECK(est.category_prior[c] == doctest::Approx(1.0 / 3));
  }
  for (double v : est.phi0) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("lambda is one half at balanced switch counts") {
  const auto corpus = fixture::corpus_of({{"a", "b"}});
  auto promos = unit_promos(1, 2, 2);
  auto s = state_from_assignments(corpus, 2, {0, 1}, {-1, 0}, Matrix<std::uint8_t>(1, 2, 1), promos);
  CHECK(estimate(s, Hyperparams{}.resolved(2)).lambda == doctest::Approx(0.5));
}

TEST_CASE("top words ordering") {
  const auto corpus = fixture::corpus_of({{"senate", "a", "b"}});
  auto promos = unit_promos(1, 3, 2);
  auto s = state_from_assignments(corpus, 2, {1, 0, 0}, {0, -1, -1}, Matrix<std::uint8_t>(1, 2, 1), promos);
  const auto est = estimate(s, Hyperparams{}.resolved(2));
  const auto top1 = top_words(est, corpus.vocabulary(), 0, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].first == "senate");
  CHECK(top1[0].second == est.phi(0, 0));
  const auto all = top_words(est, corpus.vocabulary(), 0, 3);
  CHECK(all.size() == 3);
  // Category 1 is uniform, so the tie-break gives id order.
  const auto uni = top_words(est, corpus.vocabulary(), 1, 2);
  CHECK(uni[0].first == "senate");
  CHECK(uni[1].first == "a");
}

TEST_CASE("checkpoint round trip and corpus check") {
  const auto dir = std::filesystem::path(SMTM_TEST_WORK_DIR) / "model";
  std::filesystem::create_directories(dir);
  auto sm = small_setup(21);
  Hyperparams h = sm.hyper;
  h.iterations = 3;
  const auto res = run_chain(sm.corpus, sm.seeds, h, 77);
  const auto ck = make_checkpoint(sm.corpus, sm.seeds, res.hyper, res.promos, res.state, 4, 77);
  save_checkpoint(ck, dir / "a.ckpt");
  const auto back = load_checkpoint(dir / "a.ckpt");
  CHECK(back.corpus_hash == sm.corpus.content_hash());
  CHECK(back.run_index == 4);
  CHECK(back.chain_seed == 77);
  CHECK(back.hyper.gamma0 == res.hyper.gamma0);
  CHECK(back.hyper.iterations == 3);
  CHECK(back.hyper.variant == res.hyper.variant);
  CHECK(back.seeds.categories == sm.seeds.categories);
  CHECK(back.seeds.seeds == sm.seeds.seeds);
  CHECK(back.promos.cat_promo == res.promos.cat_promo);
  CHECK(back.promos.word_promo == res.promos.word_promo);
  CHECK(back.x == res.state.x);
  CHECK(back.z == res.state.z);
  CHECK(back.alpha == res.state.alpha);

  const auto restored = restore_state(back, sm.corpus);
  CHECK(max_count_drift(res.state, res.promos) <= 1e-9);
  CHECK(restored.n_word_cat.values().size() == res.state.n_word_cat.values().size());
  for (std::size_t i = 0; i < restored.n_doc_cat.values().size(); ++i) {
    CHECK(restored.n_doc_cat.values()[i] == doctest::Approx(res.state.n_doc_cat.values()[i]));
  }

  const auto other = fixture::corpus_of({{"zz"}});
  CHECK_THROWS_AS(restore_state(back, other), ConfigError);

  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), DataError);
  {
    std::ifstream in(dir / "a.ckpt", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream(dir / "cut.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), DataError);
}
