#include "smtm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "smtm/error.hpp"
#include "smtm/rng.hpp"

namespace smtm {

SynthCorpus generate_synthetic(const SynthSpec& spec) {
  const std::size_t num_cats = spec.categories;
  if (num_cats < 1) throw ConfigError("synthetic corpus needs at least one category");
  if (spec.docs < 1 || spec.doc_length < 1) throw ConfigError("synthetic corpus needs docs and tokens");
  if (spec.seeds_per_category < 1) throw ConfigError("need at least one seed per category");
  if (spec.vocab_size < num_cats * spec.seeds_per_category) {
    throw ConfigError("vocabulary too small for the requested seeds");
  }
  if (!(spec.background_fraction >= 0.0 && spec.background_fraction <= 1.0)) {
    throw ConfigError("background fraction must lie in [0, 1]");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) throw ConfigError("overlap must lie in [0, 1]");
  if (!(spec.background_vocab_share >= 0.0 && spec.background_vocab_share < 1.0)) {
    throw ConfigError("background vocabulary share must lie in [0, 1)");
  }
  const double concentration =
      spec.concentration > 0.0 ? spec.concentration : 50.0 / static_cast<double>(num_cats);

  SynthCorpus out;
  const std::size_t vocab = spec.vocab_size;
  const std::size_t digits = std::max<std::size_t>(std::to_string(vocab - 1).size(), 3);
  for (std::size_t v = 0; v < vocab; ++v) {
    auto number = std::to_string(v);
    out.words.push_back("w" + std::string(digits - number.size(), '0') + number);
  }
  for (std::size_t c = 0; c < num_cats; ++c) out.categories.push_back("cat" + std::to_string(c));

  const auto general = static_cast<std::size_t>(spec.background_vocab_share * static_cast<double>(vocab));
  const std::size_t block = (vocab - general) / num_cats;
  if (block < spec.seeds_per_category) throw ConfigError("category blocks too small for the seeds");
  out.planted_phi = Matrix<double>(num_cats, vocab, 0.0);
  double zipf_total = 0.0;
  for (std::size_t r = 0; r < block; ++r) zipf_total += 1.0 / static_cast<double>(r + 1);
  for (std::size_t c = 0; c < num_cats; ++c) {
    for (std::size_t r = 0; r < block; ++r) {
      out.planted_phi(c, c * block + r) =
          (1.0 - spec.overlap) / static_cast<double>(r + 1) / zipf_total;
    }
    for (std::size_t v = 0; v < vocab; ++v) {
      out.planted_phi(c, v) += spec.overlap / static_cast<double>(vocab);
    }
    out.seeds.emplace_back(spec.seeds_per_category);
    std::iota(out.seeds.back().begin(), out.seeds.back().end(), c * block);
  }
  out.background_phi.assign(vocab, 0.0);
  const std::size_t general_begin = general ? vocab - general : 0;
  for (std::size_t v = general_begin; v < vocab; ++v) {
    out.background_phi[v] = 1.0 / static_cast<double>(vocab - general_begin);
  }

  std::mt19937_64 engine(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<std::discrete_distribution<std::size_t>> category_words;
  for (std::size_t c = 0; c < num_cats; ++c) {
    const auto row = out.planted_phi.row(c);
    category_words.emplace_back(row.begin(), row.end());
  }
  std::uniform_int_distribution<std::size_t> background_word(general_begin, vocab - 1);
  std::uniform_int_distribution<std::size_t> pick_category(0, num_cats - 1);

  for (std::size_t d = 0; d < spec.docs; ++d) {
    std::vector<std::size_t> chosen{pick_category(engine)};
    if (num_cats >= 2 && unit(engine) < 0.5) {
      std::size_t second = pick_category(engine);
      while (second == chosen[0]) second = pick_category(engine);
      chosen.push_back(second);
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<double> theta(chosen.size());
    for (double& t : theta) t = gamma(engine);
    std::discrete_distribution<std::size_t> pick_topic(theta.begin(), theta.end());

    std::string text;
    for (std::size_t i = 0; i < spec.doc_length; ++i) {
      std::size_t word;
      if (unit(engine) < spec.background_fraction) {
        word = background_word(engine);
      } else {
        word = category_words[chosen[pick_topic(engine)]](engine);
      }
      if (!text.empty()) text += ' ';
      text += out.words[word];
    }
    std::vector<std::string> labels;
    for (auto c : chosen) labels.push_back(out.categories[c]);
    out.documents.push_back(RawDocument{"doc" + std::to_string(d), std::move(text), std::move(labels)});
  }
  return out;
}

std::string seed_file_text(const SynthCorpus& corpus) {
  std::string text;
  for (std::size_t c = 0; c < corpus.categories.size(); ++c) {
    text += corpus.categories[c] + ":";
    for (auto w : corpus.seeds[c]) text += " " + corpus.words[w];
    text += '\n';
  }
  return text;
}

void write_jsonl(std::ostream& out, const std::vector<RawDocument>& documents) {
  for (const auto& doc : documents) {
    nlohmann::json record{{"id", doc.id}, {"text", doc.text}};
    if (doc.labels) record["labels"] = *doc.labels;
    out << record.dump() << '\n';
  }
}

void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream docs(dir / "corpus.jsonl", std::ios::binary);
  std::ofstream seeds(dir / "seeds.txt", std::ios::binary);
  if (!docs || !seeds) throw DataError("cannot write into " + dir.string());
  write_jsonl(docs, corpus.documents);
  seeds << seed_file_text(corpus);
}

}  // namespace smtm
