#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "anchorvec/corpus.hpp"
#include "anchorvec/embeddings.hpp"

namespace anchorvec {

struct TrainingConfig {
  int negatives = 10;
  int dim = 300;
  double subsample_t = 1e-5;
  double epochs = 10.0;
  int window = 5;
  double lr_start = 0.025;
  double lr_min_fraction = 1e-4;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

// Epochs that give the source corpus roughly as many updates as
// `base_epochs` passes over the target corpus.
double source_epochs(std::int64_t target_sentences,
                     std::int64_t source_sentences, double base_epochs = 10.0);

// splitmix64 of (base, stream); used to derive per-worker and per-restart
// seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

template <class Scalar>
Scalar log_sigmoid(Scalar z) {
  return z >= Scalar(0) ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

template <class Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

// log s(x.c) + sum_n log s(-x.n), with one negative per row of `negatives`.
// This is the quantity SGNS ascends.
template <class X, class C, class N>
typename X::Scalar sgns_loss(const Eigen::MatrixBase<X>& center,
                             const Eigen::MatrixBase<C>& context,
                             const Eigen::MatrixBase<N>& negatives) {
  using Scalar = typename X::Scalar;
  Scalar loss = log_sigmoid<Scalar>(center.dot(context));
  for (Eigen::Index n = 0; n < negatives.rows(); ++n)
    loss += log_sigmoid<Scalar>(-center.dot(negatives.row(n)));
  return loss;
}

// An output vector chosen for a context word. Frozen rows hand out no
// mutable pointer.
template <class Scalar>
struct ContextRow {
  const Scalar* values = nullptr;
  Scalar* mutable_values = nullptr;
  bool frozen() const { return mutable_values == nullptr; }
};

// ctx(w) = the word's own output vector.
template <class Scalar>
class MonolingualResolver {
 public:
  explicit MonolingualResolver(RowMatrix<Scalar>& outputs) : outputs_(&outputs) {}

  struct View {
    Scalar* base;
    Eigen::Index dim;
    ContextRow<Scalar> resolve(WordId w) const {
      Scalar* p = base + static_cast<Eigen::Index>(w) * dim;
      return {p, p};
    }
  };

  View view() const { return {outputs_->data(), outputs_->cols()}; }
  Eigen::Index dim() const { return outputs_->cols(); }

 private:
  RowMatrix<Scalar>* outputs_;
};

// Draws negatives from the noise distribution, redrawing any that equal the
// positive context.
inline void draw_negatives(const NoiseTable& noise, WordId positive,
                           std::span<WordId> out, Rng& rng) {
  for (auto& n : out) {
    int tries = 0;
    do {
      n = noise.sample(rng);
    } while (n == positive && noise.size() > 1 && ++tries < 64);
  }
}

// One SGD ascent step on sgns_loss for (center, context) and the given
// negatives. Gradients for all output rows are taken before the center moves;
// frozen rows contribute to the center update but are never written.
// `scratch` must hold dim values.
template <class Scalar, class View>
void sgns_step(Scalar* center, Eigen::Index dim, WordId context,
               std::span<const WordId> negatives, const View& view, Scalar lr,
               Scalar* scratch) {
  using Vec = Eigen::Map<RowVector<Scalar>>;
  using ConstVec = Eigen::Map<const RowVector<Scalar>>;
  Vec x(center, dim);
  Vec grad(scratch, dim);
  grad.setZero();

  auto apply = [&](WordId w, Scalar label) {
    const ContextRow<Scalar> row = view.resolve(w);
    ConstVec c(row.values, dim);
    const Scalar g = lr * (label - sigmoid<Scalar>(x.dot(c)));
    grad += g * c;
    if (!row.frozen()) Vec(row.mutable_values, dim) += g * x;
  };
  apply(context, Scalar(1));
  for (WordId n : negatives) apply(n, Scalar(0));
  x += grad;
}

struct TrainProgress {
  std::int64_t updates = 0;
  std::int64_t total = 0;
  double lr = 0.0;
};

struct TrainSchedule {
  // Number of (center, context) updates to perform.
  std::int64_t total_updates = 0;
  // Ascending update counts at which all workers stop and on_pause runs.
  std::vector<std::int64_t> pauses;
  std::function<void(std::int64_t)> on_pause;
  // Progress callback every `progress_every` updates (0 disables).
  std::int64_t progress_every = 0;
  std::function<void(const TrainProgress&)> on_progress;
};

struct TrainStats {
  std::int64_t updates = 0;
  std::int64_t pause_events = 0;
};

// Sentence range [first, last) handled by worker `worker` of `workers`.
inline std::pair<std::size_t, std::size_t> shard_range(std::size_t sentences,
                                                       int worker, int workers) {
  const auto w = static_cast<std::size_t>(worker);
  const auto n = static_cast<std::size_t>(workers);
  return {sentences * w / n, sentences * (w + 1) / n};
}

// Pairs in the first pass of every worker stream, exactly as train() will
// draw them.
std::int64_t first_pass_pairs(const EncodedCorpus& corpus,
                              const Vocabulary& vocab,
                              const TrainingConfig& config);

// epochs x first-pass pair count, rounded.
std::int64_t scheduled_updates(const EncodedCorpus& corpus,
                               const Vocabulary& vocab,
                               const TrainingConfig& config);

namespace detail {

template <class Scalar, class Resolver>
class Worker {
 public:
  Worker(const EncodedCorpus& corpus, const Vocabulary& vocab,
         const TrainingConfig& config, int index, RowMatrix<Scalar>& inputs,
         const Resolver& resolver, const NoiseTable& noise)
      : stream_(corpus, vocab, config.subsample_t, config.window,
                derive_seed(config.seed, 2 * static_cast<std::uint64_t>(index)),
                shard_range(corpus.sentences(), index, config.threads).first,
                shard_range(corpus.sentences(), index, config.threads).second),
        rng_(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(index) + 1)),
        config_(&config),
        inputs_(&inputs),
        resolver_(&resolver),
        noise_(&noise),
        negatives_(static_cast<std::size_t>(config.negatives)),
        scratch_(static_cast<std::size_t>(inputs.cols())) {}

  bool exhausted() const { return exhausted_; }

  void run(std::atomic<std::int64_t>& updates, std::int64_t segment_end,
           std::int64_t total) {
    auto view = resolver_->view();
    const Eigen::Index dim = inputs_->cols();
    const double lr0 = config_->lr_start;
    const double floor = lr0 * config_->lr_min_fraction;
    while (!exhausted_) {
      if (pos_ == pairs_.size()) {
        if (!next_sentence()) return;
        view = resolver_->view();
        continue;
      }
      const std::int64_t done = updates.load(std::memory_order_relaxed);
      if (done >= segment_end) return;
      const double lr = std::max(
          floor, lr0 * (1.0 - static_cast<double>(done) / static_cast<double>(total)));
      const auto [center, context] = pairs_[pos_++];
      draw_negatives(*noise_, context, negatives_, rng_);
      sgns_step<Scalar>(inputs_->row(center).data(), dim, context, negatives_,
                        view, static_cast<Scalar>(lr), scratch_.data());
      updates.fetch_add(1, std::memory_order_relaxed);
    }
  }

 private:
  // Loads the next sentence, wrapping into a new pass. Marks the worker
  // exhausted when a whole pass yields no pairs.
  bool next_sentence() {
    pos_ = 0;
    if (stream_.next(pairs_)) {
      pass_had_pairs_ |= !pairs_.empty();
      return true;
    }
    if (!pass_had_pairs_) {
      exhausted_ = true;
      return false;
    }
    pass_had_pairs_ = false;
    if (stream_.next(pairs_)) {
      pass_had_pairs_ |= !pairs_.empty();
      return true;
    }
    exhausted_ = true;
    return false;
  }

  CorpusStream stream_;
  Rng rng_;
  const TrainingConfig* config_;
  RowMatrix<Scalar>* inputs_;
  const Resolver* resolver_;
  const NoiseTable* noise_;
  std::vector<WordPair> pairs_;
  std::size_t pos_ = 0;
  bool pass_had_pairs_ = false;
  bool exhausted_ = false;
  std::vector<WordId> negatives_;
  std::vector<Scalar> scratch_;
};

}  // namespace detail

// Runs SGNS over `corpus` for schedule.total_updates updates, cycling passes
// (the last pass may be truncated). Input vectors are `inputs`; output
// vectors come from `resolver`. With config.threads > 1 the workers update
// shared rows without locking; threads == 1 is fully deterministic.
template <class Scalar, class Resolver>
TrainStats train(const EncodedCorpus& corpus, const Vocabulary& vocab,
                 RowMatrix<Scalar>& inputs, const Resolver& resolver,
                 const NoiseTable& noise, const TrainingConfig& config,
                 const TrainSchedule& schedule) {
  config.validate();
  if (static_cast<std::size_t>(inputs.rows()) != vocab.size() ||
      inputs.cols() != resolver.dim())
    throw std::invalid_argument("train: embedding shape does not match vocabulary");

  std::vector<detail::Worker<Scalar, Resolver>> workers;
  workers.reserve(static_cast<std::size_t>(config.threads));
  for (int w = 0; w < config.threads; ++w)
    workers.emplace_back(corpus, vocab, config, w, inputs, resolver, noise);

  const std::int64_t total = schedule.total_updates;
  std::atomic<std::int64_t> updates{0};
  TrainStats stats;
  std::size_t next_pause = 0;
  std::int64_t next_progress = schedule.progress_every > 0 ? schedule.progress_every
                                                           : total + 1;

  auto fire_due = [&](std::int64_t reached) {
    while (next_pause < schedule.pauses.size() &&
           schedule.pauses[next_pause] <= reached) {
      if (schedule.on_pause) schedule.on_pause(schedule.pauses[next_pause]);
      ++stats.pause_events;
      ++next_pause;
    }
    while (schedule.progress_every > 0 && next_progress <= reached) {
      if (schedule.on_progress) {
        const double frac = total > 0 ? static_cast<double>(reached) / total : 1.0;
        schedule.on_progress({reached, total,
                              config.lr_start * std::max(config.lr_min_fraction,
                                                         1.0 - frac)});
      }
      next_progress += schedule.progress_every;
    }
  };

  while (updates.load() < total) {
    std::int64_t segment_end = std::min(total, next_progress);
    if (next_pause < schedule.pauses.size())
      segment_end = std::min(segment_end, schedule.pauses[next_pause]);
    segment_end = std::max(segment_end, updates.load() + 1);

    if (config.threads == 1) {
      workers.front().run(updates, segment_end, total);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers.size());
      for (auto& w : workers)
        pool.emplace_back([&w, &updates, segment_end, total] {
          w.run(updates, segment_end, total);
        });
    }
    const bool stalled = std::all_of(workers.begin(), workers.end(),
                                     [](const auto& w) { return w.exhausted(); });
    fire_due(updates.load());
    if (stalled) break;
  }
  fire_due(std::max(updates.load(), total));
  stats.updates = updates.load();
  return stats;
}

// Plain monolingual SGNS from a fresh random initialization.
template <class Scalar = float>
EmbeddingPair<Scalar> train_monolingual(
    const EncodedCorpus& corpus, std::shared_ptr<const Vocabulary> vocab,
    const TrainingConfig& config, const TrainSchedule& hooks = {},
    const std::string& language = {}) {
  config.validate();
  auto pair = init_random<Scalar>(vocab, config.dim, config.seed, language);
  MonolingualResolver<Scalar> resolver(pair.output.rows);
  NoiseTable noise(*vocab);
  TrainSchedule schedule = hooks;
  schedule.total_updates = scheduled_updates(corpus, *vocab, config);
  train<Scalar>(corpus, *vocab, pair.input.rows, resolver, noise, config, schedule);
  return pair;
}

}  // namespace anchorvec
