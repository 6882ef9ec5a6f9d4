#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smtm/corpus.hpp"
#include "smtm/matrix.hpp"

namespace smtm {

struct SynthSpec {
  std::size_t categories = 3;
  std::size_t docs = 200;
  std::size_t vocab_size = 60;
  std::size_t doc_length = 50;
  double concentration = 0.0;  // Dirichlet over a document's categories; 0 -> 50 / C
  std::size_t seeds_per_category = 3;
  double background_fraction = 0.4;
  // Share of each category's mass spread uniformly over the whole vocabulary
  // instead of its own block. 0 gives disjoint blocks.
  double overlap = 0.0;
  // Share of the vocabulary reserved for background-only words; the
  // background topic is uniform over that block. 0 makes the background
  // uniform over the whole vocabulary.
  double background_vocab_share = 0.25;
  std::uint64_t rng_seed = 1;
};

struct SynthCorpus {
  std::vector<std::string> categories;
  std::vector<std::string> words;        // generator word ids -> surface form
  std::vector<RawDocument> documents;    // with gold labels
  std::vector<std::vector<std::size_t>> seeds;  // generator word ids per category
  Matrix<double> planted_phi;            // C x V
  std::vector<double> background_phi;    // V
};

// Forward-samples the background/category mixture: category c owns the block
// [c*B, (c+1)*B) of the vocabulary with Zipf-shaped weights, the background
// is uniform over the trailing general-word block, each document picks 1 or
// 2 categories. The top
// seeds_per_category words of each block become the seed words.
SynthCorpus generate_synthetic(const SynthSpec& spec);

std::string seed_file_text(const SynthCorpus& corpus);
void write_jsonl(std::ostream& out, const std::vector<RawDocument>& documents);
// Writes corpus.jsonl and seeds.txt into `dir`.
void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace smtm
