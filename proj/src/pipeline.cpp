#include "anchorvec/pipeline.hpp"

#include <chrono>
#include <stdexcept>

#include "anchorvec/anchoring.hpp"

namespace anchorvec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

PipelineMode parse_mode(std::string_view text) {
  if (text == "basic") return PipelineMode::basic;
  if (text == "self-learning" || text == "self_learning") return PipelineMode::self_learning;
  if (text == "full") return PipelineMode::full;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "' (expected basic, self-learning or full)");
}

std::string_view to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::basic: return "basic";
    case PipelineMode::self_learning: return "self-learning";
    case PipelineMode::full: return "full";
  }
  return "unknown";
}

SeedSpec SeedSpec::parse(std::string_view text) {
  if (text == "identical") return {Kind::identical, {}};
  if (text == "numerals") return {Kind::numerals, {}};
  if (text.starts_with("file:") && text.size() > 5)
    return {Kind::file, std::filesystem::path(std::string(text.substr(5)))};
  throw std::invalid_argument("unknown seed '" + std::string(text) +
                              "' (expected identical, numerals or file:PATH)");
}

std::string SeedSpec::describe() const {
  switch (kind) {
    case Kind::identical: return "identical";
    case Kind::numerals: return "numerals";
    case Kind::file: return "file:" + path.string();
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (reinductions < 0) throw std::invalid_argument("reinductions must be >= 0");
  if (csls.neighborhood_k < 1) throw std::invalid_argument("csls k must be >= 1");
  training.validate();
}

int PipelineConfig::effective_restarts() const {
  return mode == PipelineMode::full ? restarts : 1;
}

int PipelineConfig::effective_reinductions() const {
  return mode == PipelineMode::basic ? 0 : reinductions;
}

std::vector<std::int64_t> reinduction_schedule(std::int64_t total_updates, int k) {
  if (k < 0) throw std::invalid_argument("reinduction_schedule: K must be >= 0");
  if (k == 0) return {};
  if (k > total_updates)
    throw std::invalid_argument("reinduction_schedule: K = " + std::to_string(k) +
                                " exceeds total updates T = " +
                                std::to_string(total_updates));
  const std::int64_t step = total_updates / k;
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) out.push_back(step * i);
  return out;
}

nlohmann::json RunReport::to_json(bool include_timing) const {
  using nlohmann::json;
  json j;
  j["mode"] = mode;
  j["restarts"] = restarts;
  j["reinductions"] = reinductions;
  j["seed"] = seed;
  j["seed_dictionary_size"] = seed_dictionary_size;
  j["source_epochs"] = source_epochs;
  j["scheduled_updates"] = scheduled_updates;
  j["target_frozen"] = target_frozen;
  j["final_p_at_1"] = final_p_at_1 ? json(*final_p_at_1) : json(nullptr);
  j["dictionary_sizes"] = json::array();
  j["p_at_1_curve"] = json::array();
  for (const auto& e : events) {
    json r{{"restart", e.restart},
           {"event", e.event},
           {"update", e.update},
           {"dictionary_size", e.dictionary_size},
           {"p_at_1", e.p_at_1 ? json(*e.p_at_1) : json(nullptr)}};
    if (include_timing) r["seconds"] = e.seconds;
    j["dictionary_sizes"].push_back(e.dictionary_size);
    j["p_at_1_curve"].push_back(std::move(r));
  }
  j["runs"] = json::array();
  for (const auto& r : runs) {
    json o{{"restart", r.restart},
           {"seed", r.seed},
           {"initial_dictionary_size", r.initial_dictionary_size},
           {"final_dictionary_size", r.final_dictionary_size},
           {"updates", r.updates},
           {"p_at_1", r.p_at_1 ? json(*r.p_at_1) : json(nullptr)}};
    if (include_timing) o["seconds"] = r.seconds;
    j["runs"].push_back(std::move(o));
  }
  j["warnings"] = warnings;
  if (include_timing) {
    json phases = json::array();
    for (const auto& [name, s] : phase_seconds) phases.push_back({{"phase", name}, {"seconds", s}});
    j["wall_clock"] = std::move(phases);
  }
  return j;
}

LanguageCorpus LanguageCorpus::load(const std::filesystem::path& path,
                                    std::size_t max_vocab) {
  auto vocab = std::make_shared<const Vocabulary>(build_vocab(path, max_vocab));
  auto corpus = encode_corpus(path, *vocab);
  return {std::move(vocab), std::move(corpus)};
}

Dictionary build_seed(const SeedSpec& seed, const Vocabulary& source,
                      const Vocabulary& target, const LogFn& log) {
  switch (seed.kind) {
    case SeedSpec::Kind::identical: return seed_identical(source, target);
    case SeedSpec::Kind::numerals: return seed_numerals(source, target);
    case SeedSpec::Kind::file: {
      auto ext = load_external(seed.path, source, target);
      if (log && (ext.skipped_oov > 0 || ext.duplicates > 0))
        log("seed " + seed.path.string() + ": skipped " + std::to_string(ext.skipped_oov) +
            " out-of-vocabulary pairs, " + std::to_string(ext.duplicates) +
            " duplicate sources");
      return std::move(ext.dictionary);
    }
  }
  throw std::logic_error("unhandled seed kind");
}

namespace {

// Fraction of consecutive re-inductions (after the first quarter of the first
// restart) where the dictionary did not shrink.
std::optional<double> growth_ratio(const std::vector<ReinductionRecord>& events, int k) {
  std::vector<std::size_t> sizes;
  for (const auto& e : events)
    if (e.restart > 0 || e.event > k / 4) sizes.push_back(e.dictionary_size);
  if (sizes.size() < 2) return std::nullopt;
  std::size_t ok = 0;
  for (std::size_t i = 1; i < sizes.size(); ++i) ok += sizes[i] >= sizes[i - 1];
  return static_cast<double>(ok) / static_cast<double>(sizes.size() - 1);
}

}  // namespace

AnchoredRun run_anchored(const LanguageCorpus& source,
                         const EmbeddingPair<float>& target,
                         std::int64_t target_sentences, const Dictionary& seed,
                         const PipelineConfig& config, const GoldDictionary* gold,
                         const BliOptions& bli, const LogFn& log) {
  config.validate();
  const auto start = Clock::now();
  const Vocabulary& sv = *source.vocab;
  if (target.input.dim() != config.training.dim || target.output.dim() != config.training.dim)
    throw std::invalid_argument("target embeddings have dim " +
                                std::to_string(target.input.dim()) + ", config says " +
                                std::to_string(config.training.dim));
  if (target.input.size() != target.output.size())
    throw std::invalid_argument("target input/output vectors differ in size");
  if (seed.empty())
    throw std::invalid_argument(
        "seed dictionary is empty: no usable source/target word pairs");
  if (seed.source_size() != sv.size() || seed.target_size() != target.input.size())
    throw std::invalid_argument("seed dictionary does not match the vocabularies");

  const int restarts = config.effective_restarts();
  const int k = config.effective_reinductions();

  RunReport report;
  report.mode = std::string(to_string(config.mode));
  report.restarts = restarts;
  report.reinductions = k;
  report.seed = config.seed.describe();
  report.seed_dictionary_size = seed.size();
  const auto source_sentences = static_cast<std::int64_t>(source.corpus.sentences());
  report.source_epochs = target_sentences > 0
                             ? source_epochs(target_sentences, source_sentences,
                                             config.training.epochs)
                             : config.training.epochs;

  const std::uint64_t frozen_sum = checksum(target.output.rows);
  const RowMatrix<float> target_unit = unit_rows<float>(target.input.rows, target.input.vocab.get());
  const NoiseTable noise(sv);

  auto evaluate = [&](const EmbeddingMatrix<float>& x) -> std::optional<double> {
    if (!gold) return std::nullopt;
    return bli_eval<float>(x, target.input, *gold, bli).p_at_1;
  };

  Dictionary dictionary = seed;
  EmbeddingPair<float> embeddings;
  for (int r = 0; r < restarts; ++r) {
    const auto restart_start = Clock::now();
    TrainingConfig cfg = config.training;
    cfg.seed = config.training.seed + static_cast<std::uint64_t>(r);
    cfg.epochs = report.source_epochs;
    const std::int64_t total = scheduled_updates(source.corpus, sv, cfg);
    if (total <= 0) throw std::invalid_argument("source corpus yields no training pairs");
    if (r == 0) report.scheduled_updates = total;

    embeddings = init_random<float>(source.vocab, cfg.dim, cfg.seed, "source");
    AnchoredResolver<float> resolver(embeddings.output.rows, target.output.rows, dictionary);

    RestartRecord run_record;
    run_record.restart = r;
    run_record.seed = cfg.seed;
    run_record.initial_dictionary_size = dictionary.size();

    TrainSchedule schedule;
    schedule.total_updates = total;
    schedule.pauses = reinduction_schedule(total, k);
    int event = 0;
    schedule.on_pause = [&](std::int64_t update) {
      const RowMatrix<float> source_unit = unit_rows<float>(embeddings.input.rows, &sv);
      Dictionary next = induce<float>(source_unit, target_unit, config.csls, config.induce_top_n);
      const std::size_t size = next.size();
      resolver.replace_dictionary(std::move(next));
      ReinductionRecord rec;
      rec.restart = r;
      rec.event = ++event;
      rec.update = update;
      rec.dictionary_size = size;
      rec.p_at_1 = evaluate(embeddings.input);
      rec.seconds = seconds_since(start);
      if (log) {
        std::string msg = "restart " + std::to_string(r + 1) + "/" + std::to_string(restarts) +
                          " reinduction " + std::to_string(rec.event) + "/" + std::to_string(k) +
                          " at update " + std::to_string(update) + ": " +
                          std::to_string(size) + " entries";
        if (rec.p_at_1) msg += ", P@1 " + std::to_string(*rec.p_at_1);
        log(msg);
      }
      report.events.push_back(rec);
    };
    schedule.progress_every = config.progress_every;
    if (log) {
      schedule.on_progress = [&](const TrainProgress& p) {
        log("restart " + std::to_string(r + 1) + ": " + std::to_string(p.updates) + "/" +
            std::to_string(p.total) + " updates, lr " + std::to_string(p.lr));
      };
    }

    const TrainStats stats =
        train<float>(source.corpus, sv, embeddings.input.rows, resolver, noise, cfg, schedule);
    dictionary = *resolver.dictionary();

    run_record.final_dictionary_size = dictionary.size();
    run_record.updates = stats.updates;
    run_record.p_at_1 = evaluate(embeddings.input);
    run_record.seconds = seconds_since(restart_start);
    report.runs.push_back(run_record);
    report.phase_seconds.emplace_back("restart " + std::to_string(r + 1), run_record.seconds);
    if (log) {
      std::string msg = "restart " + std::to_string(r + 1) + " done: " +
                        std::to_string(dictionary.size()) + " dictionary entries";
      if (run_record.p_at_1) msg += ", P@1 " + std::to_string(*run_record.p_at_1);
      log(msg);
    }
  }

  report.final_p_at_1 = report.runs.back().p_at_1;
  report.target_frozen = checksum(target.output.rows) == frozen_sum;
  if (!report.target_frozen) report.warnings.push_back("target output vectors changed");
  if (auto g = growth_ratio(report.events, k); g && *g < 0.8)
    report.warnings.push_back("dictionary size shrank in " + std::to_string(1.0 - *g) +
                              " of consecutive re-inductions");
  return {std::move(embeddings), std::move(dictionary), std::move(report)};
}

PipelineResult run(const LanguageCorpus& source, const LanguageCorpus& target,
                   const PipelineConfig& config, const GoldDictionary* gold,
                   const BliOptions& bli, const LogFn& log) {
  config.validate();
  const auto start = Clock::now();
  if (log) log("training target embeddings");
  TrainSchedule hooks;
  hooks.progress_every = config.progress_every;
  if (log) {
    hooks.on_progress = [&](const TrainProgress& p) {
      log("target: " + std::to_string(p.updates) + "/" + std::to_string(p.total) +
          " updates, lr " + std::to_string(p.lr));
    };
  }
  auto target_pair =
      train_monolingual<float>(target.corpus, target.vocab, config.training, hooks, "target");
  const double target_seconds = seconds_since(start);

  Dictionary seed = build_seed(config.seed, *source.vocab, *target.vocab, log);
  auto anchored = run_anchored(source, target_pair,
                               static_cast<std::int64_t>(target.corpus.sentences()), seed,
                               config, gold, bli, log);
  anchored.report.phase_seconds.insert(anchored.report.phase_seconds.begin(),
                                       {"target monolingual", target_seconds});
  return {std::move(anchored.source), std::move(target_pair),
          std::move(anchored.dictionary), std::move(anchored.report)};
}

}  // namespace anchorvec
