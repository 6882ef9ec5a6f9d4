#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smtm/classify.hpp"
#include "smtm/corpus.hpp"
#include "smtm/eval.hpp"
#include "smtm/synth.hpp"

namespace fixture {

// Corpus with documents given as lists of already-clean words.
inline smtm::Corpus corpus_of(const std::vector<std::vector<std::string>>& docs) {
  smtm::Vocabulary vocab;
  std::vector<std::string> ids;
  std::vector<std::vector<smtm::WordId>> tokens;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    ids.push_back("d" + std::to_string(d));
    std::vector<smtm::WordId> row;
    for (const auto& w : docs[d]) row.push_back(vocab.intern(w));
    tokens.push_back(std::move(row));
  }
  return smtm::Corpus(std::move(vocab), std::move(ids), std::move(tokens));
}

inline smtm::SeedConfig seeds_of(const std::string& text, const smtm::Corpus& corpus) {
  std::istringstream in(text);
  return smtm::parse_seed_config(in, corpus);
}

// Random corpus over words "a0".."a{W-1}"; every word appears at least once.
inline smtm::Corpus random_corpus(std::mt19937_64& rng, std::size_t docs, std::size_t vocab,
                                  std::size_t max_len) {
  std::vector<std::vector<std::string>> text(docs);
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  for (auto& doc : text) {
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) doc.push_back("a" + std::to_string(word(rng)));
  }
  for (std::size_t w = 0; w < vocab; ++w) text[w % docs].push_back("a" + std::to_string(w));
  return corpus_of(text);
}

// Seeds: category c takes word a{c}, plus a random extra word.
inline smtm::SeedConfig random_seeds(std::mt19937_64& rng, const smtm::Corpus& corpus,
                                     std::size_t cats) {
  std::uniform_int_distribution<std::size_t> word(0, corpus.vocab_size() - 1);
  std::string text;
  for (std::size_t c = 0; c < cats; ++c) {
    text += "k" + std::to_string(c) + ": a" + std::to_string(c) + " a" + std::to_string(word(rng)) + "\n";
  }
  return seeds_of(text, corpus);
}

struct Planted {
  smtm::SynthCorpus synth;
  smtm::Corpus corpus;
  smtm::SeedConfig seeds;
  std::vector<smtm::LabelSet> gold;
};

inline Planted planted(const smtm::SynthSpec& spec) {
  Planted p{smtm::generate_synthetic(spec), {}, {}, {}};
  p.corpus = smtm::preprocess(p.synth.documents, smtm::PreprocessOptions{});
  std::istringstream in(smtm::seed_file_text(p.synth));
  p.seeds = smtm::parse_seed_config(in, p.corpus);
  p.gold = smtm::gold_category_sets(p.corpus, p.seeds);
  return p;
}

}  // namespace fixture
