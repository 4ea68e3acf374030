// anchorvec: command line front end for cross-lingual anchored embeddings.
//
//   synth          synthetic token-parallel corpora and gold dictionary
//   train-mono     monolingual SGNS (target side)
//   train-anchored anchored SGNS with self-learning and restarts
//   seed-dict      identical / numeral seed dictionaries
//   induce         CSLS + cyclic-consistency dictionary from two embedding files
//   eval-bli       precision at 1 against a gold dictionary
//
// Randomized commands are bit-reproducible for a fixed --seed with
// --threads 1 only.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "anchorvec/anchoring.hpp"
#include "anchorvec/corpus.hpp"
#include "anchorvec/dictionary.hpp"
#include "anchorvec/embeddings.hpp"
#include "anchorvec/eval.hpp"
#include "anchorvec/pipeline.hpp"
#include "anchorvec/retrieval.hpp"
#include "anchorvec/synth.hpp"
#include "anchorvec/trainer.hpp"

namespace fs = std::filesystem;
using namespace anchorvec;

namespace {

void log_line(const std::string& msg) { std::cerr << "[anchorvec] " << msg << '\n'; }

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void add_training_options(CLI::App* cmd, TrainingConfig& t) {
  cmd->add_option("--negatives", t.negatives, "negative samples per pair")->check(CLI::PositiveNumber);
  cmd->add_option("--dim", t.dim, "embedding dimensionality")->check(CLI::PositiveNumber);
  cmd->add_option("--subsample-t", t.subsample_t, "subsampling threshold")->check(CLI::NonNegativeNumber);
  cmd->add_option("--epochs", t.epochs, "epochs (target side; source side is scaled by corpus size)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--window", t.window, "maximum context window")->check(CLI::PositiveNumber);
  cmd->add_option("--lr-start", t.lr_start, "initial learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--lr-min-fraction", t.lr_min_fraction, "learning rate floor as a fraction of --lr-start");
  cmd->add_option("--seed", t.seed, "random seed");
  cmd->add_option("--threads", t.threads, "worker threads; 1 is deterministic")
      ->envname("ANCHORVEC_THREADS")
      ->check(CLI::PositiveNumber);
}

std::shared_ptr<const Vocabulary> vocab_from(const std::string& corpus,
                                             const std::string& emb,
                                             std::size_t max_vocab, const char* side) {
  if (!corpus.empty()) return std::make_shared<const Vocabulary>(build_vocab(corpus, max_vocab));
  if (!emb.empty()) return load_text<float>(emb).vocab;
  throw std::invalid_argument(std::string("need --") + side + "-corpus or --" + side + "-emb");
}

// synth ---------------------------------------------------------------------

struct SynthArgs {
  SynthSpec spec;
  double swap_fraction = 0.0;
  std::string out_dir;
};

void setup_synth(CLI::App& app, SynthArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("synth", "generate synthetic token-parallel corpora");
  cmd->add_option("--vocab", a.spec.vocab_size, "latent vocabulary size")->check(CLI::PositiveNumber);
  cmd->add_option("--sentences", a.spec.sentences, "sentences per corpus");
  cmd->add_option("--min-length", a.spec.min_length, "minimum sentence length");
  cmd->add_option("--max-length", a.spec.max_length, "maximum sentence length");
  cmd->add_option("--zipf", a.spec.zipf_s, "Zipf exponent of word frequencies");
  cmd->add_option("--translate-fraction", a.spec.translate_fraction,
                  "fraction of words spelled differently in the two corpora")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--numerals", a.spec.numerals, "identically spelled words written as digits");
  cmd->add_option("--clusters", a.spec.topic_clusters, "topic clusters");
  cmd->add_option("--collocates", a.spec.collocates, "fixed collocates per word");
  cmd->add_option("--swap-fraction", a.swap_fraction,
                  "fraction of source tokens replaced by unigram noise")
      ->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--seed", a.spec.seed, "random seed");
  cmd->add_option("--out-dir", a.out_dir, "output directory")->required();
  action = [&a] {
    SynthFiles files = generate(a.spec, a.out_dir);
    if (a.swap_fraction > 0.0) {
      const fs::path clean = fs::path(a.out_dir) / "src.clean.txt";
      fs::rename(files.source, clean);
      const auto swapped = perturb(clean, files.source, a.swap_fraction,
                                   derive_seed(a.spec.seed, 1000));
      log_line("perturbed " + std::to_string(swapped) + " source tokens");
    }
    log_line("wrote " + files.source.string() + ", " + files.target.string() + ", " +
             files.gold.string());
  };
}

// train-mono ----------------------------------------------------------------

struct MonoArgs {
  TrainingConfig training;
  std::string corpus, out_emb, out_ctx, vocab_out, report;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::int64_t progress_every = 1000000;
};

void setup_mono(CLI::App& app, MonoArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("train-mono", "train monolingual SGNS embeddings");
  cmd->add_option("--corpus", a.corpus, "tokenized corpus, one sentence per line")->required();
  cmd->add_option("--out-emb", a.out_emb, "input vectors (word2vec text)")->required();
  cmd->add_option("--out-ctx", a.out_ctx, "output vectors (word2vec text)")->required();
  cmd->add_option("--vocab-out", a.vocab_out, "vocabulary TSV");
  cmd->add_option("--report", a.report, "JSON summary");
  cmd->add_option("--max-vocab", a.max_vocab, "keep the most frequent words");
  cmd->add_option("--progress-every", a.progress_every, "progress log interval in updates (0: off)");
  add_training_options(cmd, a.training);
  action = [&a] {
    const auto lc = LanguageCorpus::load(a.corpus, a.max_vocab);
    TrainSchedule hooks;
    hooks.progress_every = a.progress_every;
    hooks.on_progress = [](const TrainProgress& p) {
      log_line(std::to_string(p.updates) + "/" + std::to_string(p.total) + " updates, lr " +
               std::to_string(p.lr));
    };
    auto pair = train_monolingual<float>(lc.corpus, lc.vocab, a.training, hooks);
    save_text(pair.input, a.out_emb);
    save_text(pair.output, a.out_ctx);
    if (!a.vocab_out.empty()) save_vocab_tsv(*lc.vocab, a.vocab_out);
    if (!a.report.empty()) {
      write_json({{"vocab_size", lc.vocab->size()},
                  {"tokens", lc.vocab->total_tokens()},
                  {"sentences", lc.corpus.sentences()},
                  {"dim", a.training.dim},
                  {"epochs", a.training.epochs}},
                 a.report);
    }
  };
}

// train-anchored ------------------------------------------------------------

struct AnchoredArgs {
  PipelineConfig config;
  std::string src_corpus, tgt_corpus, tgt_emb, tgt_ctx;
  std::string seed_dict = "identical", mode = "full";
  std::int64_t tgt_sentences = 0;
  std::string out_emb, out_ctx, out_dict, tgt_out_emb, tgt_out_ctx, report, gold;
  std::size_t eval_top_n = 0, induce_top_n = 0;
  std::size_t max_vocab = kDefaultMaxVocab;
  bool no_timing = false;
};

void setup_anchored(CLI::App& app, AnchoredArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("train-anchored", "learn source embeddings anchored to fixed target vectors");
  cmd->add_option("--src-corpus", a.src_corpus, "source tokenized corpus")->required();
  auto* tc = cmd->add_option("--tgt-corpus", a.tgt_corpus, "target corpus (trained monolingually first)");
  auto* te = cmd->add_option("--tgt-embeddings", a.tgt_emb, "pre-trained target input vectors");
  auto* tx = cmd->add_option("--tgt-output", a.tgt_ctx, "pre-trained target output vectors");
  tc->excludes(te)->excludes(tx);
  te->needs(tx);
  tx->needs(te);
  cmd->add_option("--tgt-sentences", a.tgt_sentences,
                  "target corpus sentence count for epoch scaling with --tgt-embeddings (0: no scaling)");
  cmd->add_option("--seed-dict", a.seed_dict, "initial dictionary: identical, numerals or file:PATH");
  cmd->add_option("--restarts", a.config.restarts, "iterative restarts R")->check(CLI::PositiveNumber);
  cmd->add_option("--reinductions", a.config.reinductions, "re-inductions per restart K")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--mode", a.mode, "basic, self-learning or full")
      ->check(CLI::IsMember({"basic", "self-learning", "full"}));
  cmd->add_option("--csls-k", a.config.csls.neighborhood_k, "CSLS neighborhood size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--induce-top-n", a.induce_top_n, "re-induce only for the n most frequent source words (0: all)");
  cmd->add_option("--max-vocab", a.max_vocab, "vocabulary size per language");
  cmd->add_option("--progress-every", a.config.progress_every, "progress log interval in updates (0: off)");
  cmd->add_option("--out-emb", a.out_emb, "source input vectors")->required();
  cmd->add_option("--out-ctx", a.out_ctx, "source output vectors");
  cmd->add_option("--out-dict", a.out_dict, "final induced dictionary TSV");
  cmd->add_option("--tgt-out-emb", a.tgt_out_emb, "target input vectors (with --tgt-corpus)");
  cmd->add_option("--tgt-out-ctx", a.tgt_out_ctx, "target output vectors (with --tgt-corpus)");
  cmd->add_option("--gold", a.gold, "gold dictionary for P@1 at every re-induction");
  cmd->add_option("--eval-top-n", a.eval_top_n, "score only the n most frequent gold entries (0: all)");
  cmd->add_option("--report", a.report, "JSON run report");
  cmd->add_flag("--no-timing", a.no_timing, "leave wall-clock times out of the report");
  add_training_options(cmd, a.config.training);
  action = [&a] {
    auto& cfg = a.config;
    cfg.mode = parse_mode(a.mode);
    cfg.seed = SeedSpec::parse(a.seed_dict);
    if (a.induce_top_n > 0) cfg.induce_top_n = a.induce_top_n;
    if (a.tgt_corpus.empty() && a.tgt_emb.empty())
      throw std::invalid_argument("need --tgt-corpus or --tgt-embeddings/--tgt-output");

    const auto source = LanguageCorpus::load(a.src_corpus, a.max_vocab);
    std::optional<GoldDictionary> gold;
    if (!a.gold.empty()) gold = load_gold(a.gold);
    BliOptions bli;
    bli.csls = cfg.csls;
    if (a.eval_top_n > 0) bli.top_n = a.eval_top_n;
    const GoldDictionary* gp = gold ? &*gold : nullptr;

    EmbeddingPair<float> target;
    RunReport report;
    EmbeddingPair<float> src;
    Dictionary dict;
    if (!a.tgt_corpus.empty()) {
      const auto tgt = LanguageCorpus::load(a.tgt_corpus, a.max_vocab);
      auto result = run(source, tgt, cfg, gp, bli, log_line);
      target = std::move(result.target);
      src = std::move(result.source);
      dict = std::move(result.dictionary);
      report = std::move(result.report);
      if (!a.tgt_out_emb.empty()) save_text(target.input, a.tgt_out_emb);
      if (!a.tgt_out_ctx.empty()) save_text(target.output, a.tgt_out_ctx);
    } else {
      target.input = load_text<float>(a.tgt_emb, Role::input);
      target.output = load_text<float>(a.tgt_ctx, Role::output);
      if (target.input.vocab->words() != target.output.vocab->words())
        throw std::invalid_argument("--tgt-embeddings and --tgt-output have different vocabularies");
      target.output.vocab = target.input.vocab;
      if (target.input.dim() != cfg.training.dim) {
        log_line("using target dimensionality " + std::to_string(target.input.dim()));
        cfg.training.dim = static_cast<int>(target.input.dim());
      }
      const Dictionary seed = build_seed(cfg.seed, *source.vocab, *target.input.vocab, log_line);
      auto result = run_anchored(source, target, a.tgt_sentences, seed, cfg, gp, bli, log_line);
      src = std::move(result.source);
      dict = std::move(result.dictionary);
      report = std::move(result.report);
    }
    save_text(src.input, a.out_emb);
    if (!a.out_ctx.empty()) save_text(src.output, a.out_ctx);
    if (!a.out_dict.empty()) save_tsv(dict, *source.vocab, *target.input.vocab, a.out_dict);
    if (!a.report.empty()) write_json(report.to_json(!a.no_timing), a.report);
    if (report.final_p_at_1) log_line("final P@1 " + std::to_string(*report.final_p_at_1));
  };
}

// seed-dict -----------------------------------------------------------------

struct SeedArgs {
  std::string mode = "identical";
  std::string src_corpus, tgt_corpus, src_emb, tgt_emb, out;
  std::size_t max_vocab = kDefaultMaxVocab;
};

void setup_seed(CLI::App& app, SeedArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("seed-dict", "write an identical-word or numeral seed dictionary");
  cmd->add_option("--mode", a.mode, "identical or numerals")
      ->check(CLI::IsMember({"identical", "numerals"}));
  cmd->add_option("--src-corpus", a.src_corpus, "source corpus");
  cmd->add_option("--tgt-corpus", a.tgt_corpus, "target corpus");
  cmd->add_option("--src-emb", a.src_emb, "source embeddings (vocabulary only)");
  cmd->add_option("--tgt-emb", a.tgt_emb, "target embeddings (vocabulary only)");
  cmd->add_option("--max-vocab", a.max_vocab, "vocabulary size per language");
  cmd->add_option("--out", a.out, "output TSV (default: stdout)");
  action = [&a] {
    const auto sv = vocab_from(a.src_corpus, a.src_emb, a.max_vocab, "src");
    const auto tv = vocab_from(a.tgt_corpus, a.tgt_emb, a.max_vocab, "tgt");
    const Dictionary d = a.mode == "numerals" ? seed_numerals(*sv, *tv) : seed_identical(*sv, *tv);
    if (a.out.empty()) {
      for (auto [s, t] : d.entries()) std::cout << sv->word(s) << '\t' << tv->word(t) << '\n';
    } else {
      save_tsv(d, *sv, *tv, a.out);
    }
    log_line(std::to_string(d.size()) + " " + a.mode + " entries");
  };
}

// induce --------------------------------------------------------------------

struct InduceArgs {
  std::string src_emb, tgt_emb, out;
  CslsParams csls;
  std::size_t top_n = 0;
};

void setup_induce(CLI::App& app, InduceArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("induce", "CSLS dictionary with cyclic-consistency filter");
  cmd->add_option("--src-emb", a.src_emb, "source embeddings")->required();
  cmd->add_option("--tgt-emb", a.tgt_emb, "target embeddings")->required();
  cmd->add_option("--out", a.out, "output TSV")->required();
  cmd->add_option("--csls-k", a.csls.neighborhood_k, "CSLS neighborhood size")->check(CLI::PositiveNumber);
  cmd->add_option("--induce-top-n", a.top_n, "only the n most frequent source words (0: all)");
  action = [&a] {
    const auto src = unit_normalize_copy(load_text<float>(a.src_emb));
    const auto tgt = unit_normalize_copy(load_text<float>(a.tgt_emb));
    std::optional<std::size_t> top;
    if (a.top_n > 0) top = a.top_n;
    const Dictionary d = induce<float>(src.rows, tgt.rows, a.csls, top);
    save_tsv(d, *src.vocab, *tgt.vocab, a.out);
    log_line(std::to_string(d.size()) + " entries survive the cyclic filter");
  };
}

// eval-bli ------------------------------------------------------------------

struct EvalArgs {
  std::string src_emb, tgt_emb, gold, json, scope = "gold";
  bool filter = false, predictions = false;
  std::size_t top_n = 0;
  CslsParams csls;
};

void setup_eval(CLI::App& app, EvalArgs& a, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("eval-bli", "bilingual lexicon induction P@1");
  cmd->add_option("--src-emb", a.src_emb, "source embeddings")->required();
  cmd->add_option("--tgt-emb", a.tgt_emb, "target embeddings")->required();
  cmd->add_option("--gold", a.gold, "gold dictionary")->required();
  cmd->add_flag("--filter-identical", a.filter, "drop copyable entries and identical predictions");
  cmd->add_option("--filter-scope", a.scope, "gold: source among its gold translations; vocab: source in target vocabulary")
      ->check(CLI::IsMember({"gold", "vocab"}));
  cmd->add_option("--top-n", a.top_n, "score only the n most frequent gold entries (0: all)");
  cmd->add_option("--csls-k", a.csls.neighborhood_k, "CSLS neighborhood size")->check(CLI::PositiveNumber);
  cmd->add_flag("--predictions", a.predictions, "include per-word predictions in the JSON");
  cmd->add_option("--json", a.json, "output JSON (default: stdout)");
  action = [&a] {
    const auto src = load_text<float>(a.src_emb);
    const auto tgt = load_text<float>(a.tgt_emb);
    const auto gold = load_gold(a.gold);
    BliOptions opt;
    opt.csls = a.csls;
    if (a.top_n > 0) opt.top_n = a.top_n;
    opt.filter_scope = a.scope == "vocab" ? FilterScope::target_vocabulary : FilterScope::gold_candidates;
    opt.keep_predictions = a.predictions;
    const BliResult r = a.filter ? bli_eval_filtered(src, tgt, gold, opt) : bli_eval(src, tgt, gold, opt);
    nlohmann::json j{{"p_at_1", r.p_at_1},
                     {"total", r.total},
                     {"hits", r.hits},
                     {"covered", r.covered},
                     {"copied_backoff", r.copied_backoff},
                     {"filtered", a.filter}};
    if (a.predictions) {
      auto& p = j["predictions"] = nlohmann::json::array();
      for (const auto& x : r.predictions)
        p.push_back({{"source", x.source}, {"predicted", x.predicted},
                     {"correct", x.correct}, {"copied", x.copied}});
    }
    write_json(j, a.json);
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual word embeddings by anchored skip-gram training"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; command line flags take precedence");
  app.option_defaults()->always_capture_default();

  std::function<void()> synth, mono, anchored, seed, ind, eval;
  SynthArgs synth_args;
  MonoArgs mono_args;
  AnchoredArgs anchored_args;
  SeedArgs seed_args;
  InduceArgs induce_args;
  EvalArgs eval_args;
  setup_synth(app, synth_args, synth);
  setup_mono(app, mono_args, mono);
  setup_anchored(app, anchored_args, anchored);
  setup_seed(app, seed_args, seed);
  setup_induce(app, induce_args, ind);
  setup_eval(app, eval_args, eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth") synth();
    else if (name == "train-mono") mono();
    else if (name == "train-anchored") anchored();
    else if (name == "seed-dict") seed();
    else if (name == "induce") ind();
    else if (name == "eval-bli") eval();
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"command", name}}.dump() << '\n';
    return 1;
  }
  return 0;
}
