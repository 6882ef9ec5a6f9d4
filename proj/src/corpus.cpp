#include "smtm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "smtm/error.hpp"
#include "smtm/log.hpp"

namespace smtm {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
}

void fnv_mix_u64(std::uint64_t& h, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  fnv_mix(h, buf, 8);
}

void fnv_mix_str(std::uint64_t& h, std::string_view s) {
  fnv_mix_u64(h, s.size());
  fnv_mix(h, s.data(), s.size());
}

bool is_word_byte(unsigned char ch) {
  return ch >= 0x80 || (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') ||
         (ch >= 'A' && ch <= 'Z');
}

std::size_t codepoint_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; }));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

WordId Vocabulary::intern(std::string_view word) {
  auto it = ids_.find(std::string(word));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Corpus::Corpus(Vocabulary vocabulary, std::vector<std::string> doc_ids,
               std::vector<std::vector<WordId>> documents,
               std::vector<std::optional<std::vector<std::string>>> gold_labels, bool lowercased)
    : vocabulary_(std::move(vocabulary)),
      doc_ids_(std::move(doc_ids)),
      documents_(std::move(documents)),
      gold_labels_(std::move(gold_labels)),
      lowercased_(lowercased) {
  if (doc_ids_.size() != documents_.size()) {
    throw DataError("corpus: doc id count does not match document count");
  }
  if (gold_labels_.empty()) gold_labels_.resize(documents_.size());
  if (gold_labels_.size() != documents_.size()) {
    throw DataError("corpus: label count does not match document count");
  }

  const std::size_t vocab = vocabulary_.size();
  postings_.assign(vocab, {});
  hash_ = kFnvOffset;
  fnv_mix_u64(hash_, vocab);
  for (const auto& w : vocabulary_.words()) fnv_mix_str(hash_, w);
  fnv_mix_u64(hash_, documents_.size());

  for (DocIndex d = 0; d < documents_.size(); ++d) {
    const auto& doc = documents_[d];
    fnv_mix_str(hash_, doc_ids_[d]);
    fnv_mix_u64(hash_, doc.size());
    for (WordId w : doc) {
      if (w >= vocab) {
        throw DataError("corpus: token id " + std::to_string(w) + " out of range in document " +
                        doc_ids_[d]);
      }
      fnv_mix_u64(hash_, w);
      auto& list = postings_[w];
      if (list.empty() || list.back() != d) list.push_back(d);
    }
    total_tokens_ += doc.size();
  }
}

bool Corpus::has_labels() const noexcept {
  return std::any_of(gold_labels_.begin(), gold_labels_.end(),
                     [](const auto& l) { return l.has_value(); });
}

std::optional<CategoryId> SeedConfig::find(std::string_view name) const {
  auto it = std::find(categories.begin(), categories.end(), name);
  if (it == categories.end()) return std::nullopt;
  return static_cast<CategoryId>(it - categories.begin());
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      auto token = text.substr(start, i - start);
      tokens.push_back(lowercase ? ascii_lower(token) : std::string(token));
    }
  }
  return tokens;
}

Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessOptions& opts) {
  if (opts.min_token_len < 1) throw ConfigError("min_token_len must be >= 1");
  if (opts.min_df < 1) throw ConfigError("min_df must be >= 1");
  if (raw.empty()) throw DataError("preprocess: no input documents");

  std::unordered_set<std::string> stopwords;
  for (const auto& s : opts.stopwords) stopwords.insert(opts.lowercase ? ascii_lower(s) : s);

  // Stopword and length filter, then document frequency over what survives.
  std::vector<std::vector<std::string>> filtered(raw.size());
  std::unordered_map<std::string, std::size_t> df;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    for (auto& token : tokenize(raw[d].text, opts.lowercase)) {
      if (codepoint_length(token) < opts.min_token_len) continue;
      if (stopwords.contains(token)) continue;
      filtered[d].push_back(std::move(token));
    }
    std::unordered_set<std::string_view> seen(filtered[d].begin(), filtered[d].end());
    for (auto word : seen) ++df[std::string(word)];
  }

  Vocabulary vocabulary;
  std::vector<std::string> doc_ids;
  std::vector<std::vector<WordId>> documents(raw.size());
  std::vector<std::optional<std::vector<std::string>>> labels;
  std::unordered_set<std::string> id_seen;
  std::size_t empty = 0;
  std::string empty_examples;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    if (!id_seen.insert(raw[d].id).second) {
      throw DataError("preprocess: duplicate document id '" + raw[d].id + "'");
    }
    for (const auto& token : filtered[d]) {
      if (df[token] >= opts.min_df) documents[d].push_back(vocabulary.intern(token));
    }
    if (documents[d].empty()) {
      if (empty < 5) empty_examples += (empty ? ", " : "") + raw[d].id;
      ++empty;
    }
    doc_ids.push_back(raw[d].id);
    labels.push_back(raw[d].labels);
  }
  if (vocabulary.size() == 0) throw DataError("preprocess: corpus is empty after filtering");
  if (empty > 0) {
    log::warn(std::to_string(empty) + " document(s) empty after preprocessing (" + empty_examples +
              (empty > 5 ? ", ..." : "") + ")");
  }
  return Corpus(std::move(vocabulary), std::move(doc_ids), std::move(documents), std::move(labels),
                opts.lowercase);
}

std::vector<RawDocument> read_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("text") || !record["text"].is_string()) {
      throw DataError(where + ": record needs string fields 'id' and 'text'");
    }
    RawDocument doc{record["id"].get<std::string>(), record["text"].get<std::string>(), {}};
    if (record.contains("labels") && !record["labels"].is_null()) {
      const auto& labels = record["labels"];
      if (!labels.is_array()) throw DataError(where + ": 'labels' must be a list of strings");
      std::vector<std::string> names;
      for (const auto& l : labels) {
        if (!l.is_string()) throw DataError(where + ": 'labels' must be a list of strings");
        names.push_back(l.get<std::string>());
      }
      doc.labels = std::move(names);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> read_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_jsonl(in);
}

std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::unordered_set<std::string> words;
  std::string word;
  while (in >> word) {
    if (word.starts_with('#')) {
      std::getline(in, word);
      continue;
    }
    words.insert(word);
  }
  return words;
}

SeedConfig parse_seed_config(std::istream& in, const Corpus& corpus) {
  SeedConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto where = "seed file line " + std::to_string(line_no);
    const auto colon = content.find(':');
    if (colon == std::string_view::npos) throw DataError(where + ": expected 'name: seeds'");
    const std::string name(trim(content.substr(0, colon)));
    if (name.empty()) throw DataError(where + ": empty category name");
    if (config.find(name)) throw DataError(where + ": duplicate category '" + name + "'");

    std::string words(content.substr(colon + 1));
    std::replace(words.begin(), words.end(), ',', ' ');
    std::istringstream ws(words);
    std::vector<WordId> resolved;
    std::string seed;
    while (ws >> seed) {
      if (corpus.lowercased()) seed = ascii_lower(seed);
      if (auto id = corpus.vocabulary().find(seed)) {
        resolved.push_back(*id);
      } else {
        log::warn("seed word '" + seed + "' of category '" + name +
                  "' is not in the vocabulary; dropped");
      }
    }
    std::sort(resolved.begin(), resolved.end());
    resolved.erase(std::unique(resolved.begin(), resolved.end()), resolved.end());
    if (resolved.empty()) {
      throw DataError(where + ": category '" + name + "' has no seed word in the vocabulary");
    }
    config.categories.push_back(name);
    config.seeds.push_back(std::move(resolved));
  }
  if (config.num_categories() < 2) throw DataError("seed file must define at least 2 categories");
  return config;
}

SeedConfig load_seed_config(const std::filesystem::path& path, const Corpus& corpus) {
  auto in = open_input(path);
  return parse_seed_config(in, corpus);
}

Matrix<std::uint8_t> seed_presence(const Corpus& corpus, const SeedConfig& seeds) {
  Matrix<std::uint8_t> indicator(corpus.num_docs(), seeds.num_categories(), 0);
  for (CategoryId c = 0; c < seeds.num_categories(); ++c) {
    for (WordId s : seeds.seeds[c]) {
      for (DocIndex d : corpus.postings(s)) indicator(d, c) = 1;
    }
  }
  return indicator;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.num_docs = corpus.num_docs();
  stats.vocab_size = corpus.vocab_size();
  if (stats.num_docs > 0) {
    stats.avg_length =
        static_cast<double>(corpus.total_tokens()) / static_cast<double>(stats.num_docs);
  }
  for (const auto& doc : corpus.documents()) stats.empty_docs += doc.empty() ? 1 : 0;
  if (corpus.has_labels()) {
    std::size_t labeled = 0;
    std::size_t total = 0;
    for (const auto& labels : corpus.gold_labels()) {
      if (!labels) continue;
      ++labeled;
      total += std::unordered_set<std::string>(labels->begin(), labels->end()).size();
    }
    stats.cardinality = static_cast<double>(total) / static_cast<double>(labeled);
  }
  return stats;
}

std::vector<std::vector<CategoryId>> gold_category_sets(const Corpus& corpus,
                                                        const SeedConfig& seeds) {
  std::vector<std::vector<CategoryId>> gold(corpus.num_docs());
  for (DocIndex d = 0; d < corpus.num_docs(); ++d) {
    const auto& labels = corpus.gold_labels()[d];
    if (!labels) continue;
    for (const auto& name : *labels) {
      if (auto c = seeds.find(name)) gold[d].push_back(*c);
    }
    std::sort(gold[d].begin(), gold[d].end());
    gold[d].erase(std::unique(gold[d].begin(), gold[d].end()), gold[d].end());
  }
  return gold;
}

namespace {
constexpr const char* kCorpusFormat = "smtm-corpus";
constexpr int kCorpusVersion = 1;
}  // namespace

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  nlohmann::json bundle;
  bundle["format"] = kCorpusFormat;
  bundle["version"] = kCorpusVersion;
  bundle["lowercased"] = corpus.lowercased();
  bundle["vocabulary"] = corpus.vocabulary().words();
  auto& docs = bundle["documents"] = nlohmann::json::array();
  for (DocIndex d = 0; d < corpus.num_docs(); ++d) {
    nlohmann::json doc{{"id", corpus.doc_ids()[d]}, {"tokens", corpus.document(d)}};
    if (const auto& labels = corpus.gold_labels()[d]) doc["labels"] = *labels;
    docs.push_back(std::move(doc));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << bundle.dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json bundle;
  try {
    bundle = nlohmann::json::parse(in);
    if (bundle.value("format", "") != kCorpusFormat) {
      throw DataError(path.string() + ": not a corpus bundle");
    }
    if (bundle.value("version", 0) != kCorpusVersion) {
      throw DataError(path.string() + ": unsupported corpus bundle version");
    }
    Vocabulary vocabulary;
    for (const auto& w : bundle.at("vocabulary")) {
      const auto word = w.get<std::string>();
      if (vocabulary.intern(word) + 1 != vocabulary.size()) {
        throw DataError(path.string() + ": duplicate vocabulary entry '" + word + "'");
      }
    }
    std::vector<std::string> ids;
    std::vector<std::vector<WordId>> documents;
    std::vector<std::optional<std::vector<std::string>>> labels;
    for (const auto& doc : bundle.at("documents")) {
      ids.push_back(doc.at("id").get<std::string>());
      documents.push_back(doc.at("tokens").get<std::vector<WordId>>());
      if (doc.contains("labels")) {
        labels.emplace_back(doc["labels"].get<std::vector<std::string>>());
      } else {
        labels.emplace_back(std::nullopt);
      }
    }
    return Corpus(std::move(vocabulary), std::move(ids), std::move(documents), std::move(labels),
                  bundle.value("lowercased", true));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace smtm
