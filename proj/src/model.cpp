#include "smtm/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "smtm/error.hpp"
#include "smtm/log.hpp"

namespace smtm {

Hyperparams Hyperparams::resolved(std::size_t num_categories) const {
  Hyperparams h = *this;
  if (h.gamma0 == 0.0 && num_categories > 0) h.gamma0 = 50.0 / static_cast<double>(num_categories);
  return h;
}

void Hyperparams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in [0, 1]");
  positive(pi, "pi");
  positive(p, "p");
  positive(q, "q");
  positive(beta0, "beta0");
  positive(beta1, "beta1");
  positive(gamma0, "gamma0");
  positive(gamma1, "gamma1");
  positive(epsilon, "epsilon");
  if (!(gamma1 < gamma0 / 1000.0)) throw ConfigError("gamma1 must be below gamma0 / 1000");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (recount_interval < 0) throw ConfigError("recount interval must be >= 0");
  if (!variant.sparsity && top_k < 1) {
    throw ConfigError("the no-sparsity variant needs top_k >= 1");
  }
}

std::string to_string(WordPromotionMode mode) {
  switch (mode) {
    case WordPromotionMode::cooccurrence: return "cooccurrence";
    case WordPromotionMode::embedding: return "embedding";
    case WordPromotionMode::none: return "none";
  }
  return "?";
}

WordPromotionMode parse_word_promotion_mode(const std::string& name) {
  if (name == "cooccurrence") return WordPromotionMode::cooccurrence;
  if (name == "embedding") return WordPromotionMode::embedding;
  if (name == "none") return WordPromotionMode::none;
  throw ConfigError("unknown word promotion mode '" + name + "'");
}

namespace {

constexpr double kNegativeTolerance = 1e-6;

void subtract_count(double& value, double amount) {
  value -= amount;
  if (value < 0.0) {
    if (value < -kNegativeTolerance) {
      throw ConsistencyError("count went negative (" + std::to_string(value) + ")");
    }
    log::debug("clamped small negative count to zero");
    value = 0.0;
  }
}

ModelState empty_state(const Corpus& corpus, std::size_t num_categories) {
  ModelState s;
  s.num_docs = corpus.num_docs();
  s.num_categories = num_categories;
  s.vocab_size = corpus.vocab_size();
  s.doc_offsets.reserve(s.num_docs + 1);
  s.doc_offsets.push_back(0);
  s.words.reserve(corpus.total_tokens());
  for (const auto& doc : corpus.documents()) {
    s.words.insert(s.words.end(), doc.begin(), doc.end());
    s.doc_offsets.push_back(s.words.size());
  }
  s.x.assign(s.words.size(), 0);
  s.z.assign(s.words.size(), -1);
  s.alpha = Matrix<std::uint8_t>(s.num_docs, num_categories, 1);
  s.alpha_count.assign(s.num_docs, static_cast<std::uint32_t>(num_categories));
  return s;
}

void zero_counts(ModelState& s) {
  s.n_background = 0.0;
  s.n_category = 0.0;
  s.n_bg_word.assign(s.vocab_size, 0.0);
  s.n_word_cat = Matrix<double>(s.vocab_size, s.num_categories, 0.0);
  s.n_cat.assign(s.num_categories, 0.0);
  s.n_doc_cat = Matrix<double>(s.num_docs, s.num_categories, 0.0);
  s.n_doc.assign(s.num_docs, 0.0);
}

}  // namespace

void add_token(ModelState& s, std::size_t d, std::size_t t, const PromotionTables& promos) {
  const WordId w = s.words[t];
  if (s.x[t] == 0) {
    s.n_background += 1.0;
    s.n_bg_word[w] += 1.0;
    return;
  }
  const auto c = static_cast<std::size_t>(s.z[t]);
  const double doc_amount = promos.cat_promo(d, c);
  const double word_amount = promos.word_promo(w, c);
  s.n_category += 1.0;
  s.n_doc_cat(d, c) += doc_amount;
  s.n_doc[d] += doc_amount;
  s.n_word_cat(w, c) += word_amount;
  s.n_cat[c] += word_amount;
}

void remove_token(ModelState& s, std::size_t d, std::size_t t, const PromotionTables& promos) {
  const WordId w = s.words[t];
  if (s.x[t] == 0) {
    subtract_count(s.n_background, 1.0);
    subtract_count(s.n_bg_word[w], 1.0);
    return;
  }
  const auto c = static_cast<std::size_t>(s.z[t]);
  const double doc_amount = promos.cat_promo(d, c);
  const double word_amount = promos.word_promo(w, c);
  subtract_count(s.n_category, 1.0);
  subtract_count(s.n_doc_cat(d, c), doc_amount);
  subtract_count(s.n_doc[d], doc_amount);
  subtract_count(s.n_word_cat(w, c), word_amount);
  subtract_count(s.n_cat[c], word_amount);
}

ModelState init_state(const Corpus& corpus, const Matrix<std::uint8_t>& indicator,
                      const PromotionTables& promos, Rng& rng) {
  const std::size_t num_cats = indicator.cols();
  ModelState s = empty_state(corpus, num_cats);
  zero_counts(s);
  std::vector<std::int32_t> candidates;
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    candidates.clear();
    for (std::size_t c = 0; c < num_cats; ++c) {
      if (indicator(d, c)) candidates.push_back(static_cast<std::int32_t>(c));
    }
    for (std::size_t t = s.doc_begin(d); t < s.doc_end(d); ++t) {
      s.x[t] = static_cast<std::uint8_t>(rng.index(2));
      if (s.x[t] == 1) {
        s.z[t] = candidates.empty() ? static_cast<std::int32_t>(rng.index(num_cats))
                                    : candidates[rng.index(candidates.size())];
      }
      add_token(s, d, t, promos);
    }
  }
  return s;
}

ModelState state_from_assignments(const Corpus& corpus, std::size_t num_categories,
                                  std::vector<std::uint8_t> x, std::vector<std::int32_t> z,
                                  Matrix<std::uint8_t> alpha, const PromotionTables& promos) {
  ModelState s = empty_state(corpus, num_categories);
  if (x.size() != s.words.size() || z.size() != s.words.size() || alpha.rows() != s.num_docs ||
      alpha.cols() != num_categories) {
    throw DataError("assignment arrays do not match the corpus shape");
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] > 1 || (x[t] == 1 && (z[t] < 0 || static_cast<std::size_t>(z[t]) >= num_categories))) {
      throw DataError("invalid token assignment at position " + std::to_string(t));
    }
    if (x[t] == 0) z[t] = -1;
  }
  s.x = std::move(x);
  s.z = std::move(z);
  s.alpha = std::move(alpha);
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    const auto row = s.alpha.row(d);
    s.alpha_count[d] = static_cast<std::uint32_t>(std::count(row.begin(), row.end(), 1));
  }
  recount(s, promos);
  return s;
}

void recount(ModelState& s, const PromotionTables& promos) {
  zero_counts(s);
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    for (std::size_t t = s.doc_begin(d); t < s.doc_end(d); ++t) add_token(s, d, t, promos);
  }
}

double max_count_drift(const ModelState& state, const PromotionTables& promos) {
  ModelState exact = state;
  recount(exact, promos);
  double worst = 0.0;
  auto compare = [&worst](double stored, double truth) {
    worst = std::max(worst, std::abs(stored - truth) / std::max(1.0, std::abs(truth)));
  };
  auto compare_all = [&](std::span<const double> a, std::span<const double> b) {
    for (std::size_t k = 0; k < a.size(); ++k) compare(a[k], b[k]);
  };
  compare(state.n_background, exact.n_background);
  compare(state.n_category, exact.n_category);
  compare_all(state.n_bg_word, exact.n_bg_word);
  compare_all(state.n_word_cat.values(), exact.n_word_cat.values());
  compare_all(state.n_cat, exact.n_cat);
  compare_all(state.n_doc_cat.values(), exact.n_doc_cat.values());
  compare_all(state.n_doc, exact.n_doc);
  return worst;
}

PosteriorEstimates estimate(const ModelState& s, const Hyperparams& hyper) {
  const std::size_t vocab = s.vocab_size;
  const std::size_t num_cats = s.num_categories;
  const auto vocab_d = static_cast<double>(vocab);
  PosteriorEstimates est;

  est.phi0.resize(vocab);
  const double bg_total = s.n_background + vocab_d * hyper.beta0;
  for (std::size_t w = 0; w < vocab; ++w) est.phi0[w] = (s.n_bg_word[w] + hyper.beta0) / bg_total;

  est.phi = Matrix<double>(num_cats, vocab);
  est.category_prior.resize(num_cats);
  double prior_total = 0.0;
  for (std::size_t c = 0; c < num_cats; ++c) {
    const double total = s.n_cat[c] + vocab_d * hyper.beta1;
    for (std::size_t w = 0; w < vocab; ++w) est.phi(c, w) = (s.n_word_cat(w, c) + hyper.beta1) / total;
    est.category_prior[c] = total;
    prior_total += total;
  }
  for (double& prior : est.category_prior) prior /= prior_total;

  est.theta = Matrix<double>(s.num_docs, num_cats);
  for (std::size_t d = 0; d < s.num_docs; ++d) {
    double total = 0.0;
    for (std::size_t c = 0; c < num_cats; ++c) {
      const double a = s.alpha(d, c);
      est.theta(d, c) = a * s.n_doc_cat(d, c) + a * hyper.gamma0 + hyper.gamma1;
      total += est.theta(d, c);
    }
    for (double& v : est.theta.row(d)) v /= total;
  }

  est.lambda = (s.n_category + hyper.pi) / (s.n_background + s.n_category + 2.0 * hyper.pi);
  return est;
}

std::vector<std::pair<std::string, double>> top_words(const PosteriorEstimates& estimates,
                                                      const Vocabulary& vocabulary, CategoryId c,
                                                      std::size_t n) {
  const auto row = estimates.phi.row(c);
  std::vector<WordId> order(row.size());
  std::iota(order.begin(), order.end(), WordId{0});
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](WordId a, WordId b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.emplace_back(vocabulary.word(order[k]), row[order[k]]);
  return out;
}

// Checkpoint bundle: little-endian fields behind an 8-byte magic and a
// version word, terminated by an end marker to catch truncation.
namespace {

constexpr char kMagic[8] = {'S', 'M', 'T', 'M', 'C', 'K', 'P', 'T'};
constexpr char kEndMarker[4] = {'E', 'N', 'D', '!'};
constexpr std::uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void raw(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void matrix(const Matrix<double>& m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.values()) f64(v);
  }
  void matrix(const Matrix<std::uint8_t>& m) {
    u64(m.rows());
    u64(m.cols());
    raw(m.values().data(), m.values().size());
  }

 private:
  void uint(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    raw(buf, static_cast<std::size_t>(bytes));
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::string s(bounded(u32(), 1u << 20), '\0');
    raw(s.data(), s.size());
    return s;
  }
  Matrix<double> f64_matrix() {
    const auto rows = bounded(u64(), 1ull << 32);
    const auto cols = bounded(u64(), 1ull << 32);
    Matrix<double> m(rows, cols);
    for (double& v : m.values()) v = f64();
    return m;
  }
  Matrix<std::uint8_t> u8_matrix() {
    const auto rows = bounded(u64(), 1ull << 32);
    const auto cols = bounded(u64(), 1ull << 32);
    Matrix<std::uint8_t> m(rows, cols);
    raw(m.values().data(), m.values().size());
    return m;
  }
  std::size_t bounded(std::uint64_t v, std::uint64_t limit) {
    if (v > limit) fail("implausible size field");
    return static_cast<std::size_t>(v);
  }
  [[noreturn]] void fail(const std::string& what) { throw DataError(name_ + ": checkpoint " + what); }

 private:
  std::uint64_t uint(int bytes) {
    unsigned char buf[8];
    raw(buf, static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::string name_;
};

}  // namespace

Checkpoint make_checkpoint(const Corpus& corpus, const SeedConfig& seeds, const Hyperparams& hyper,
                           const PromotionTables& promos, const ModelState& state,
                           std::uint32_t run_index, std::uint64_t chain_seed) {
  return Checkpoint{corpus.content_hash(), run_index, chain_seed, hyper,    seeds,
                    promos,                state.x,   state.z,    state.alpha};
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  Writer w(out);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(ck.corpus_hash);
  w.u32(ck.run_index);
  w.u64(ck.chain_seed);

  const auto& h = ck.hyper;
  for (double v : {h.mu, h.pi, h.p, h.q, h.beta0, h.beta1, h.gamma0, h.gamma1, h.epsilon}) w.f64(v);
  w.i32(h.iterations);
  w.i32(h.runs);
  w.u64(h.rng_seed);
  w.u8(h.variant.sparsity);
  w.u8(h.variant.category_promotion);
  w.u8(static_cast<std::uint8_t>(h.variant.word_promotion));
  w.u64(h.top_k);
  w.i32(h.recount_interval);
  w.u8(static_cast<std::uint8_t>(h.alpha_form));

  w.u32(static_cast<std::uint32_t>(ck.seeds.num_categories()));
  for (std::size_t c = 0; c < ck.seeds.num_categories(); ++c) {
    w.str(ck.seeds.categories[c]);
    w.u32(static_cast<std::uint32_t>(ck.seeds.seeds[c].size()));
    for (WordId s : ck.seeds.seeds[c]) w.u32(s);
  }

  w.f64(ck.promos.mu);
  w.f64(ck.promos.epsilon);
  w.matrix(ck.promos.cat_promo);
  w.matrix(ck.promos.word_promo);

  w.u64(ck.x.size());
  w.raw(ck.x.data(), ck.x.size());
  w.u64(ck.z.size());
  for (auto v : ck.z) w.i32(v);
  w.matrix(ck.alpha);
  w.raw(kEndMarker, sizeof kEndMarker);
  if (!out) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Reader r(in, path.string());
  char magic[8];
  r.raw(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) r.fail("bad magic");
  if (r.u32() != kCheckpointVersion) r.fail("unsupported version");

  Checkpoint ck;
  ck.corpus_hash = r.u64();
  ck.run_index = r.u32();
  ck.chain_seed = r.u64();
  auto& h = ck.hyper;
  for (double* v : {&h.mu, &h.pi, &h.p, &h.q, &h.beta0, &h.beta1, &h.gamma0, &h.gamma1, &h.epsilon}) {
    *v = r.f64();
  }
  h.iterations = r.i32();
  h.runs = r.i32();
  h.rng_seed = r.u64();
  h.variant.sparsity = r.u8() != 0;
  h.variant.category_promotion = r.u8() != 0;
  const auto mode = r.u8();
  if (mode > static_cast<std::uint8_t>(WordPromotionMode::none)) r.fail("bad word promotion mode");
  h.variant.word_promotion = static_cast<WordPromotionMode>(mode);
  h.top_k = r.bounded(r.u64(), 1ull << 40);
  h.recount_interval = r.i32();
  const auto form = r.u8();
  if (form > static_cast<std::uint8_t>(AlphaForm::collapsed)) r.fail("bad alpha form");
  h.alpha_form = static_cast<AlphaForm>(form);

  const auto num_cats = r.bounded(r.u32(), 1u << 20);
  for (std::size_t c = 0; c < num_cats; ++c) {
    ck.seeds.categories.push_back(r.str());
    std::vector<WordId> ids(r.bounded(r.u32(), 1u << 24));
    for (auto& s : ids) s = r.u32();
    ck.seeds.seeds.push_back(std::move(ids));
  }

  ck.promos.mu = r.f64();
  ck.promos.epsilon = r.f64();
  ck.promos.cat_promo = r.f64_matrix();
  ck.promos.word_promo = r.f64_matrix();

  ck.x.resize(r.bounded(r.u64(), 1ull << 40));
  r.raw(ck.x.data(), ck.x.size());
  ck.z.resize(r.bounded(r.u64(), 1ull << 40));
  for (auto& v : ck.z) v = r.i32();
  ck.alpha = r.u8_matrix();
  char end[4];
  r.raw(end, sizeof end);
  if (!std::equal(std::begin(end), std::end(end), std::begin(kEndMarker))) r.fail("bad end marker");
  return ck;
}

ModelState restore_state(const Checkpoint& ck, const Corpus& corpus) {
  if (ck.corpus_hash != corpus.content_hash()) {
    throw ConfigError("checkpoint was trained on a different corpus (content hash mismatch)");
  }
  const std::size_t num_cats = ck.seeds.num_categories();
  if (ck.promos.cat_promo.rows() != corpus.num_docs() || ck.promos.cat_promo.cols() != num_cats ||
      ck.promos.word_promo.rows() != corpus.vocab_size() || ck.promos.word_promo.cols() != num_cats) {
    throw DataError("checkpoint promotion tables do not match the corpus shape");
  }
  return state_from_assignments(corpus, num_cats, ck.x, ck.z, ck.alpha, ck.promos);
}

}  // namespace smtm
