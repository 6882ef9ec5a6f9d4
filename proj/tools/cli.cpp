#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "smtm/classify.hpp"
#include "smtm/corpus.hpp"
#include "smtm/error.hpp"
#include "smtm/eval.hpp"
#include "smtm/log.hpp"
#include "smtm/model.hpp"
#include "smtm/sampler.hpp"
#include "smtm/synth.hpp"

namespace fs = std::filesystem;

namespace smtm::cli {
namespace {

#ifndef SMTM_DATA_DIR
#define SMTM_DATA_DIR "data"
#endif

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is required");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " not found: " + path);
  }
}

void require_dir(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw ConfigError(std::string(what) + " not found: " + path);
}

std::string run_name(const char* prefix, std::size_t run, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", prefix, run, ext);
  return buf;
}

// Files in `dir` named prefix_NNN.ext, ordered by name.
std::vector<fs::path> list_runs(const fs::path& dir, const std::string& prefix,
                                const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.size() > prefix.size() + ext.size() && name.rfind(prefix + "_", 0) == 0 &&
        name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void print_stats(const CorpusStats& s) {
  auto& out = std::cout;
  out << std::fixed;
  out << "documents      " << s.num_docs << '\n';
  out << "vocabulary     " << s.vocab_size << '\n';
  out << "avg length     " << std::setprecision(2) << s.avg_length << '\n';
  out << "empty docs     " << s.empty_docs << '\n';
  if (s.cardinality) out << "cardinality    " << std::setprecision(3) << *s.cardinality << '\n';
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

// --- config file -----------------------------------------------------------

std::map<std::string, std::string> read_config_file(const std::string& path) {
  require_file(path, "config file");
  std::ifstream in(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const CLI::Option* opt) {
  for (const auto& name : opt->get_lnames()) {
    const auto flag = "--" + name;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
  }
  for (const auto& name : opt->get_snames()) {
    const auto flag = "-" + name;
    for (const auto& a : args) {
      if (a.rfind(flag, 0) == 0) return true;
    }
  }
  return false;
}

// Rewrites args so that entries from a --config file come first and any flag
// also given on the command line wins.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].empty() || args[i][0] == '-') continue;
    sub = app.get_subcommand_no_throw(args[i]);
    if (sub) sub_pos = i;
    break;
  }
  if (!sub) return args;

  std::string config_path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    if (key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw ConfigError(config_path + ": unknown key '" + key + "' for " + sub->get_name());
    if (given_on_command_line(args, opt)) continue;
    if (opt->get_type_size() == 0) {
      std::string v = value;
      std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        injected.push_back("--" + key);
      } else if (!(v == "false" || v == "0" || v == "no" || v == "off")) {
        throw ConfigError(config_path + ": '" + key + "' expects true or false");
      }
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return out;
}

// --- preprocess / stats ------------------------------------------------------

struct PreprocessArgs {
  std::string input;
  std::string output;
  std::string stopwords = std::string(SMTM_DATA_DIR) + "/stopwords_en.txt";
  std::size_t min_df = 5;
  std::size_t min_len = 3;
  bool no_lowercase = false;
  bool no_stopwords = false;
  bool stats_only = false;
};

void cmd_preprocess(const PreprocessArgs& a) {
  require_file(a.input, "input file");
  if (!a.stats_only && a.output.empty()) throw ConfigError("--output is required");
  PreprocessOptions opts;
  opts.min_df = a.min_df;
  opts.min_token_len = a.min_len;
  opts.lowercase = !a.no_lowercase;
  if (!a.no_stopwords) {
    require_file(a.stopwords, "stopword list");
    opts.stopwords = read_stopwords(a.stopwords);
  }
  const Corpus corpus = preprocess(read_jsonl(fs::path(a.input)), opts);
  print_stats(corpus_stats(corpus));
  if (!a.stats_only) save_corpus(corpus, a.output);
}

void cmd_stats(const std::string& corpus_path) {
  require_file(corpus_path, "corpus");
  print_stats(corpus_stats(load_corpus(corpus_path)));
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string seeds;
  std::string output_dir = "runs";
  std::string variant = "full";
  std::string vectors;
  std::string alpha_form = kDefaultAlphaForm == AlphaForm::printed ? "printed" : "collapsed";
  std::size_t dump_promotions = 0;
  unsigned jobs = 0;
  Hyperparams hyper;
};

Variant parse_variant(const std::string& name) {
  Variant v;
  if (name == "full") return v;
  if (name == "no-sparsity") {
    v.sparsity = false;
  } else if (name == "no-category-promotion") {
    v.category_promotion = false;
  } else if (name == "no-word-promotion") {
    v.word_promotion = WordPromotionMode::none;
  } else if (name == "word-embedding") {
    v.word_promotion = WordPromotionMode::embedding;
  } else {
    throw ConfigError("unknown variant '" + name + "'");
  }
  return v;
}

unsigned effective_jobs(unsigned requested, std::size_t runs) {
  unsigned jobs = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(jobs, runs));
}

void cmd_train(TrainArgs a) {
  require_file(a.corpus, "corpus");
  require_file(a.seeds, "seed file");
  a.hyper.variant = parse_variant(a.variant);
  if (a.alpha_form == "printed") {
    a.hyper.alpha_form = AlphaForm::printed;
  } else if (a.alpha_form == "collapsed") {
    a.hyper.alpha_form = AlphaForm::collapsed;
  } else {
    throw ConfigError("unknown alpha form '" + a.alpha_form + "'");
  }
  if (a.hyper.gamma0 < 0.0) throw ConfigError("gamma0 must be positive");

  const Corpus corpus = load_corpus(a.corpus);
  const SeedConfig seeds = load_seed_config(a.seeds, corpus);
  const Hyperparams hyper = a.hyper.resolved(seeds.num_categories());
  hyper.validate();

  std::optional<WordVectors> vectors;
  if (hyper.variant.word_promotion == WordPromotionMode::embedding) {
    require_file(a.vectors, "word vector file");
    vectors = load_word_vectors(a.vectors);
  } else if (!a.vectors.empty()) {
    log::warn("--vectors is ignored unless --variant word-embedding");
  }

  fs::create_directories(a.output_dir);
  const fs::path dir(a.output_dir);
  const auto runs = static_cast<std::size_t>(hyper.runs);
  const unsigned jobs = effective_jobs(a.jobs, runs);
  log::info("training " + std::to_string(runs) + " chain(s) on " + std::to_string(jobs) +
            " thread(s), C=" + std::to_string(seeds.num_categories()) +
            " gamma0=" + std::to_string(hyper.gamma0));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t run = next.fetch_add(1);
      if (run >= runs) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      try {
        const std::uint64_t chain_seed = derive_seed(hyper.rng_seed, run);
        std::ostringstream csv;
        write_stats_csv_header(csv);
        auto observer = [&](int it, const ModelState& s) {
          write_stats_csv_row(csv, iteration_stats(s, it));
        };
        const ChainResult result =
            run_chain(corpus, seeds, hyper, chain_seed, vectors ? &*vectors : nullptr, observer);
        save_checkpoint(make_checkpoint(corpus, seeds, result.hyper, result.promos, result.state,
                                        static_cast<std::uint32_t>(run), chain_seed),
                        dir / run_name("run", run, ".ckpt"));
        auto out = open_out(dir / run_name("convergence", run, ".csv"));
        out << csv.str();
        if (run == 0 && a.dump_promotions > 0) {
          auto promo_out = open_out(dir / "word_promotion.tsv");
          write_word_promotion_tsv(promo_out, result.promos.word_promo, corpus.vocabulary(), seeds,
                                   a.dump_promotions);
        }
        log::info("run " + std::to_string(run) + " done");
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned i = 1; i < jobs; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// --- predict / eval / topics -------------------------------------------------

struct PredictArgs {
  std::string corpus;
  std::vector<std::string> checkpoints;
  std::string runs_dir;
  std::string output_dir;
  unsigned jobs = 0;
};

std::vector<fs::path> gather_checkpoints(const std::vector<std::string>& explicit_paths,
                                         const std::string& runs_dir) {
  std::vector<fs::path> paths;
  for (const auto& p : explicit_paths) {
    require_file(p, "checkpoint");
    paths.emplace_back(p);
  }
  if (!runs_dir.empty()) {
    require_dir(runs_dir, "runs directory");
    auto found = list_runs(runs_dir, "run", ".ckpt");
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw ConfigError("no checkpoints given (use --checkpoint or --runs-dir)");
  return paths;
}

void cmd_predict(const PredictArgs& a) {
  require_file(a.corpus, "corpus");
  const auto paths = gather_checkpoints(a.checkpoints, a.runs_dir);
  std::string out_dir = a.output_dir;
  if (out_dir.empty()) out_dir = a.runs_dir.empty() ? "." : a.runs_dir;
  fs::create_directories(out_dir);
  const Corpus corpus = load_corpus(a.corpus);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < paths.size();) {
      try {
        const Checkpoint ck = load_checkpoint(paths[i]);
        const ModelState state = restore_state(ck, corpus);
        const auto predictions = predict(corpus, state, ck.hyper);
        auto out = open_out(fs::path(out_dir) / run_name("predictions", ck.run_index, ".tsv"));
        write_predictions_tsv(out, predictions, ck.seeds.categories);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const unsigned jobs = effective_jobs(a.jobs, paths.size());
  for (unsigned i = 1; i < jobs; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct EvalArgs {
  std::string corpus;
  std::vector<std::string> predictions;
  std::string runs_dir;
  std::string csv;
};

std::vector<std::string> header_categories(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  std::stringstream ss(line);
  for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
  if (cols.size() < 3 || cols[0] != "doc_id" || cols[1] != "labels") {
    throw DataError(path.string() + ": not a predictions file");
  }
  return {cols.begin() + 2, cols.end()};
}

void cmd_eval(const EvalArgs& a) {
  require_file(a.corpus, "corpus");
  std::vector<fs::path> paths;
  for (const auto& p : a.predictions) {
    require_file(p, "predictions file");
    paths.emplace_back(p);
  }
  if (!a.runs_dir.empty()) {
    require_dir(a.runs_dir, "runs directory");
    auto found = list_runs(a.runs_dir, "predictions", ".tsv");
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw ConfigError("no predictions given (use --predictions or --runs-dir)");

  const Corpus corpus = load_corpus(a.corpus);
  if (!corpus.has_labels()) throw DataError("corpus carries no gold labels");
  SeedConfig categories;
  categories.categories = header_categories(paths.front());
  const auto gold = gold_category_sets(corpus, categories);

  std::vector<EvalReport> reports;
  for (const auto& path : paths) {
    if (header_categories(path) != categories.categories) {
      throw DataError(path.string() + ": category columns differ from " + paths.front().string());
    }
    std::ifstream in(path);
    const auto predictions = read_predictions_tsv(in, categories.categories);
    reports.push_back(evaluate(predictions, corpus.doc_ids(), gold, categories.categories));
  }
  const EvalReport report = aggregate_reports(reports);
  std::cout << format_report(report);
  if (!a.csv.empty()) {
    auto out = open_out(a.csv);
    out << per_category_csv(report);
  }
}

struct TopicsArgs {
  std::string corpus;
  std::string checkpoint;
  std::string runs_dir;
  std::size_t n = 10;
};

void cmd_topics(const TopicsArgs& a) {
  require_file(a.corpus, "corpus");
  std::vector<std::string> explicit_path;
  if (!a.checkpoint.empty()) explicit_path.push_back(a.checkpoint);
  const auto paths = gather_checkpoints(explicit_path, a.checkpoint.empty() ? a.runs_dir : "");
  const Corpus corpus = load_corpus(a.corpus);
  const Checkpoint ck = load_checkpoint(paths.front());
  const ModelState state = restore_state(ck, corpus);
  const PosteriorEstimates est = estimate(state, ck.hyper);
  for (CategoryId c = 0; c < ck.seeds.num_categories(); ++c) {
    const auto& seed_ids = ck.seeds.seeds[c];
    std::cout << ck.seeds.categories[c] << ':';
    for (const auto& [word, weight] : top_words(est, corpus.vocabulary(), c, a.n)) {
      const auto id = corpus.vocabulary().find(word);
      const bool is_seed = id && std::binary_search(seed_ids.begin(), seed_ids.end(), *id);
      std::cout << ' ' << word << (is_seed ? "*" : "");
    }
    std::cout << '\n';
  }
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string output_dir;
  SynthSpec spec;
};

void cmd_synth(const SynthArgs& a) {
  const auto corpus = generate_synthetic(a.spec);
  fs::create_directories(a.output_dir);
  write_synthetic(corpus, a.output_dir);
}

void add_hyper_options(CLI::App* sub, Hyperparams& h) {
  sub->add_option("--iterations", h.iterations, "Gibbs sweeps per chain")->capture_default_str();
  sub->add_option("--runs", h.runs, "Independent chains")->capture_default_str();
  sub->add_option("--mu", h.mu, "Category promotion for categories without seed evidence")
      ->capture_default_str();
  sub->add_option("--pi", h.pi, "Beta prior on the background/category switch")
      ->capture_default_str();
  sub->add_option("--p", h.p, "Beta prior on selector sparsity (on)")->capture_default_str();
  sub->add_option("--q", h.q, "Beta prior on selector sparsity (off)")->capture_default_str();
  sub->add_option("--beta0", h.beta0, "Dirichlet prior of the background topic")
      ->capture_default_str();
  sub->add_option("--beta1", h.beta1, "Dirichlet prior of category-topics")
      ->capture_default_str();
  sub->add_option("--gamma0", h.gamma0, "Smoothing prior of selected categories")
      ->default_str("50/C");
  sub->add_option("--gamma1", h.gamma1, "Weak smoothing prior of unselected categories")
      ->capture_default_str();
  sub->add_option("--epsilon", h.epsilon, "Floor for normalized word relevance")
      ->capture_default_str();
  sub->add_option("--rng-seed", h.rng_seed, "Base seed; chain r uses a seed derived from it")
      ->capture_default_str();
  sub->add_option("--top-k", h.top_k, "Documents labeled per category under --variant no-sparsity")
      ->capture_default_str();
  sub->add_option("--recount-interval", h.recount_interval,
                  "Sweeps between exact count rebuilds (0 disables)")
      ->capture_default_str();
}

}  // namespace

int run(std::vector<std::string> args) {
  if (args.empty()) args.emplace_back("smtm");
  CLI::App app{"Seed-guided sparse multi-label topic model"};
  app.name(args[0]);
  app.require_subcommand(1);

  std::string config_unused;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_unused, "key=value file; command-line flags take precedence");
  };

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Tokenize a JSON-lines corpus into a bundle");
  pre_cmd->add_option("--input", pre.input, "JSON-lines input {id, text, labels?}")->required();
  pre_cmd->add_option("--output", pre.output, "Corpus bundle to write");
  pre_cmd->add_option("--min-df", pre.min_df, "Drop words in fewer documents")->capture_default_str();
  pre_cmd->add_option("--min-len", pre.min_len, "Drop shorter tokens")->capture_default_str();
  pre_cmd->add_option("--stopwords", pre.stopwords, "Stopword list, one per line")
      ->capture_default_str();
  pre_cmd->add_flag("--no-stopwords", pre.no_stopwords, "Keep stopwords");
  pre_cmd->add_flag("--no-lowercase", pre.no_lowercase, "Keep case");
  pre_cmd->add_flag("--stats-only", pre.stats_only, "Print corpus statistics without writing");
  add_config(pre_cmd);

  std::string stats_corpus;
  auto* stats_cmd = app.add_subcommand("stats", "Print statistics of a corpus bundle");
  stats_cmd->add_option("--corpus", stats_corpus, "Corpus bundle")->required();
  add_config(stats_cmd);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run Gibbs chains and write checkpoints");
  train_cmd->add_option("--corpus", train.corpus, "Corpus bundle")->required();
  train_cmd->add_option("--seeds", train.seeds, "Seed file, one 'name: words' per line")->required();
  train_cmd->add_option("--output-dir", train.output_dir, "Directory for checkpoints and CSVs")
      ->capture_default_str();
  add_hyper_options(train_cmd, train.hyper);
  train_cmd
      ->add_option("--variant", train.variant,
                   "full | no-sparsity | no-category-promotion | no-word-promotion | word-embedding")
      ->capture_default_str();
  train_cmd->add_option("--vectors", train.vectors, "Word vectors (text format) for word-embedding");
  train_cmd->add_option("--alpha-form", train.alpha_form, "Selector conditional: printed | collapsed")
      ->capture_default_str();
  train_cmd->add_option("--dump-promotions", train.dump_promotions,
                        "Write the top N promoted words per category (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--jobs", train.jobs, "Concurrent chains (0 = hardware threads)")
      ->envname("SMTM_JOBS")
      ->capture_default_str();
  add_config(train_cmd);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Label documents from checkpoints");
  pred_cmd->add_option("--corpus", pred.corpus, "Corpus bundle the checkpoints were trained on")
      ->required();
  pred_cmd->add_option("--checkpoint", pred.checkpoints, "Checkpoint file (repeatable)");
  pred_cmd->add_option("--runs-dir", pred.runs_dir, "Directory of run_NNN.ckpt files");
  pred_cmd->add_option("--output-dir", pred.output_dir,
                       "Where predictions_NNN.tsv go (default: the runs directory)");
  pred_cmd->add_option("--jobs", pred.jobs, "Concurrent checkpoints (0 = hardware threads)")
      ->envname("SMTM_JOBS")
      ->capture_default_str();
  add_config(pred_cmd);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Macro-F1 and Macro-AUC against gold labels");
  eval_cmd->add_option("--corpus", ev.corpus, "Corpus bundle with gold labels")->required();
  eval_cmd->add_option("--predictions", ev.predictions, "Predictions TSV (repeatable)");
  eval_cmd->add_option("--runs-dir", ev.runs_dir, "Directory of predictions_NNN.tsv files");
  eval_cmd->add_option("--csv", ev.csv, "Write per-category results as CSV");
  add_config(eval_cmd);

  TopicsArgs top;
  auto* top_cmd = app.add_subcommand("topics", "Top words per category; seeds marked with *");
  top_cmd->add_option("--corpus", top.corpus, "Corpus bundle")->required();
  top_cmd->add_option("--checkpoint", top.checkpoint, "Checkpoint file");
  top_cmd->add_option("--runs-dir", top.runs_dir, "Use the first run_NNN.ckpt here");
  top_cmd->add_option("--n", top.n, "Words per category")->capture_default_str();
  add_config(top_cmd);

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic labeled corpus and seed file");
  syn_cmd->add_option("--output-dir", syn.output_dir, "Writes corpus.jsonl and seeds.txt")
      ->required();
  syn_cmd->add_option("--categories", syn.spec.categories)->capture_default_str();
  syn_cmd->add_option("--docs", syn.spec.docs)->capture_default_str();
  syn_cmd->add_option("--vocab", syn.spec.vocab_size)->capture_default_str();
  syn_cmd->add_option("--doc-length", syn.spec.doc_length)->capture_default_str();
  syn_cmd->add_option("--concentration", syn.spec.concentration,
                      "Dirichlet over a document's categories")
      ->default_str("50/C");
  syn_cmd->add_option("--seeds-per-category", syn.spec.seeds_per_category)->capture_default_str();
  syn_cmd->add_option("--background-fraction", syn.spec.background_fraction)->capture_default_str();
  syn_cmd->add_option("--overlap", syn.spec.overlap, "Category mass spread over the whole vocabulary")
      ->capture_default_str();
  syn_cmd->add_option("--background-vocab-share", syn.spec.background_vocab_share,
                      "Vocabulary share of background-only words")
      ->capture_default_str();
  syn_cmd->add_option("--rng-seed", syn.spec.rng_seed)->capture_default_str();
  add_config(syn_cmd);

  try {
    const auto merged = merge_config(args, app);
    std::vector<const char*> argv;
    argv.reserve(merged.size());
    for (const auto& s : merged) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kUsage;
    }

    if (pre_cmd->parsed()) cmd_preprocess(pre);
    if (stats_cmd->parsed()) cmd_stats(stats_corpus);
    if (train_cmd->parsed()) cmd_train(train);
    if (pred_cmd->parsed()) cmd_predict(pred);
    if (eval_cmd->parsed()) cmd_eval(ev);
    if (top_cmd->parsed()) cmd_topics(top);
    if (syn_cmd->parsed()) cmd_synth(syn);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const ConsistencyError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace smtm::cli
