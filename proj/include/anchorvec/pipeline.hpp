#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anchorvec/corpus.hpp"
#include "anchorvec/dictionary.hpp"
#include "anchorvec/embeddings.hpp"
#include "anchorvec/eval.hpp"
#include "anchorvec/retrieval.hpp"
#include "anchorvec/trainer.hpp"

namespace anchorvec {

// basic: anchored training only. self_learning: plus dictionary
// re-induction. full: plus iterative restarts.
enum class PipelineMode { basic, self_learning, full };

PipelineMode parse_mode(std::string_view text);
std::string_view to_string(PipelineMode mode);

struct SeedSpec {
  enum class Kind { identical, numerals, file };
  Kind kind = Kind::identical;
  std::filesystem::path path;

  // "identical", "numerals" or "file:PATH".
  static SeedSpec parse(std::string_view text);
  std::string describe() const;
};

struct PipelineConfig {
  int restarts = 3;
  int reinductions = 50;
  TrainingConfig training;
  SeedSpec seed;
  PipelineMode mode = PipelineMode::full;
  CslsParams csls;
  // Re-induce only for the n most frequent source words.
  std::optional<std::size_t> induce_top_n;
  // Progress callback interval in updates; 0 disables.
  std::int64_t progress_every = 0;

  void validate() const;
  int effective_restarts() const;
  int effective_reinductions() const;
};

// Update indices after which the dictionary is re-induced: multiples of
// floor(T / K), K of them. The remainder T mod K gets no extra event.
std::vector<std::int64_t> reinduction_schedule(std::int64_t total_updates, int k);

struct ReinductionRecord {
  int restart = 0;
  int event = 0;  // 1-based within the restart
  std::int64_t update = 0;
  std::size_t dictionary_size = 0;
  std::optional<double> p_at_1;
  double seconds = 0.0;  // since the start of the run
};

struct RestartRecord {
  int restart = 0;
  std::uint64_t seed = 0;
  std::size_t initial_dictionary_size = 0;
  std::size_t final_dictionary_size = 0;
  std::int64_t updates = 0;
  std::optional<double> p_at_1;
  double seconds = 0.0;
};

struct RunReport {
  std::string mode;
  int restarts = 0;
  int reinductions = 0;
  std::string seed;
  std::size_t seed_dictionary_size = 0;
  double source_epochs = 0.0;
  std::int64_t scheduled_updates = 0;
  std::vector<RestartRecord> runs;
  std::vector<ReinductionRecord> events;
  std::optional<double> final_p_at_1;
  bool target_frozen = true;  // target output checksum unchanged
  std::vector<std::string> warnings;
  // Wall-clock seconds per phase, in execution order.
  std::vector<std::pair<std::string, double>> phase_seconds;

  nlohmann::json to_json(bool include_timing = true) const;
};

// A corpus encoded against its own vocabulary.
struct LanguageCorpus {
  std::shared_ptr<const Vocabulary> vocab;
  EncodedCorpus corpus;

  static LanguageCorpus load(const std::filesystem::path& path,
                             std::size_t max_vocab = kDefaultMaxVocab);
};

// Builds the initial dictionary. External files report skipped lines through
// `log` when given.
Dictionary build_seed(const SeedSpec& seed, const Vocabulary& source,
                      const Vocabulary& target,
                      const std::function<void(const std::string&)>& log = {});

using LogFn = std::function<void(const std::string&)>;

struct AnchoredRun {
  EmbeddingPair<float> source;
  Dictionary dictionary;
  RunReport report;
};

// Restarted anchored training against fixed target vectors. target_sentences
// scales the epoch count (0 keeps config.training.epochs). When `gold` is
// given, BLI P@1 is measured at every re-induction and after every restart.
AnchoredRun run_anchored(const LanguageCorpus& source,
                         const EmbeddingPair<float>& target,
                         std::int64_t target_sentences, const Dictionary& seed,
                         const PipelineConfig& config,
                         const GoldDictionary* gold = nullptr,
                         const BliOptions& bli = {}, const LogFn& log = {});

struct PipelineResult {
  EmbeddingPair<float> source;
  EmbeddingPair<float> target;
  Dictionary dictionary;
  RunReport report;
};

// Monolingual target training followed by run_anchored.
PipelineResult run(const LanguageCorpus& source, const LanguageCorpus& target,
                   const PipelineConfig& config,
                   const GoldDictionary* gold = nullptr,
                   const BliOptions& bli = {}, const LogFn& log = {});

}  // namespace anchorvec
