#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "smtm/matrix.hpp"

namespace smtm {

using WordId = std::uint32_t;
using DocIndex = std::uint32_t;
using CategoryId = std::uint32_t;

// Bidirectional word <-> dense id map.
class Vocabulary {
 public:
  // Returns the id of `word`, assigning the next free id on first sight.
  WordId intern(std::string_view word);
  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
};

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::vector<std::string>> labels;
};

struct PreprocessOptions {
  std::unordered_set<std::string> stopwords;
  std::size_t min_token_len = 3;
  std::size_t min_df = 5;
  bool lowercase = true;
};

// Tokenized corpus over a dense vocabulary. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  // Builds the document-frequency index from `documents`. Token ids must be
  // below vocabulary.size().
  Corpus(Vocabulary vocabulary, std::vector<std::string> doc_ids,
         std::vector<std::vector<WordId>> documents,
         std::vector<std::optional<std::vector<std::string>>> gold_labels = {},
         bool lowercased = true);

  std::size_t num_docs() const noexcept { return documents_.size(); }
  std::size_t vocab_size() const noexcept { return vocabulary_.size(); }
  std::size_t total_tokens() const noexcept { return total_tokens_; }

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<WordId>& document(DocIndex d) const { return documents_.at(d); }
  const std::vector<std::vector<WordId>>& documents() const noexcept { return documents_; }
  std::size_t doc_length(DocIndex d) const { return documents_.at(d).size(); }

  // Sorted, duplicate-free list of documents containing `w`.
  const std::vector<DocIndex>& postings(WordId w) const { return postings_.at(w); }
  std::size_t doc_frequency(WordId w) const { return postings_.at(w).size(); }

  // Gold label names per document; nullopt where the record carried none.
  const std::vector<std::optional<std::vector<std::string>>>& gold_labels() const noexcept {
    return gold_labels_;
  }
  bool has_labels() const noexcept;
  bool lowercased() const noexcept { return lowercased_; }

  // Stable 64-bit content hash over vocabulary, doc ids and token streams.
  std::uint64_t content_hash() const noexcept { return hash_; }

 private:
  Vocabulary vocabulary_;
  std::vector<std::string> doc_ids_;
  std::vector<std::vector<WordId>> documents_;
  std::vector<std::optional<std::vector<std::string>>> gold_labels_;
  std::vector<std::vector<DocIndex>> postings_;
  std::size_t total_tokens_ = 0;
  bool lowercased_ = true;
  std::uint64_t hash_ = 0;
};

struct SeedConfig {
  std::vector<std::string> categories;
  // Resolved seed word ids per category, sorted and unique.
  std::vector<std::vector<WordId>> seeds;

  std::size_t num_categories() const noexcept { return categories.size(); }
  std::optional<CategoryId> find(std::string_view name) const;
};

struct CorpusStats {
  std::size_t num_docs = 0;
  std::size_t vocab_size = 0;
  double avg_length = 0.0;
  std::size_t empty_docs = 0;
  std::optional<double> cardinality;
};

// Splits on non-alphanumeric ASCII characters. Bytes >= 0x80 (UTF-8
// sequences) are kept as word characters; only ASCII is case-folded.
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessOptions& opts);

// JSON-lines records {"id": str, "text": str, "labels": [str]?}.
std::vector<RawDocument> read_jsonl(std::istream& in);
std::vector<RawDocument> read_jsonl(const std::filesystem::path& path);

std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path);

// Seed file: one "name: seed seed ..." per line; blank lines and lines
// starting with '#' are ignored.
SeedConfig parse_seed_config(std::istream& in, const Corpus& corpus);
SeedConfig load_seed_config(const std::filesystem::path& path, const Corpus& corpus);

// I(d,c) = 1 iff document d contains at least one seed word of c.
Matrix<std::uint8_t> seed_presence(const Corpus& corpus, const SeedConfig& seeds);

CorpusStats corpus_stats(const Corpus& corpus);

// Maps each document's gold label names to category ids of `seeds`; label
// names not in the seed config are ignored. Documents without labels map to
// empty sets.
std::vector<std::vector<CategoryId>> gold_category_sets(const Corpus& corpus,
                                                        const SeedConfig& seeds);

// Versioned JSON bundle.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace smtm
