#include "anchorvec/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace anchorvec {

void TrainingConfig::validate() const {
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(epochs > 0.0) || !std::isfinite(epochs))
    throw std::invalid_argument("epochs must be > 0");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (!(lr_start > 0.0)) throw std::invalid_argument("lr_start must be > 0");
  if (lr_min_fraction < 0.0 || lr_min_fraction > 1.0)
    throw std::invalid_argument("lr_min_fraction must be in [0, 1]");
  if (subsample_t < 0.0) throw std::invalid_argument("subsample_t must be >= 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double source_epochs(std::int64_t target_sentences,
                     std::int64_t source_sentences, double base_epochs) {
  if (source_sentences <= 0)
    throw std::invalid_argument("source_epochs: source corpus has no sentences");
  if (target_sentences <= 0)
    throw std::invalid_argument("source_epochs: target corpus has no sentences");
  return base_epochs * static_cast<double>(target_sentences) /
         static_cast<double>(source_sentences);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::int64_t first_pass_pairs(const EncodedCorpus& corpus,
                              const Vocabulary& vocab,
                              const TrainingConfig& config) {
  config.validate();
  std::int64_t pairs = 0;
  std::vector<WordPair> buf;
  for (int w = 0; w < config.threads; ++w) {
    auto [first, last] = shard_range(corpus.sentences(), w, config.threads);
    CorpusStream stream(corpus, vocab, config.subsample_t, config.window,
                        derive_seed(config.seed, 2 * static_cast<std::uint64_t>(w)),
                        first, last);
    while (stream.next(buf)) pairs += static_cast<std::int64_t>(buf.size());
  }
  return pairs;
}

std::int64_t scheduled_updates(const EncodedCorpus& corpus,
                               const Vocabulary& vocab,
                               const TrainingConfig& config) {
  return std::llround(config.epochs *
                      static_cast<double>(first_pass_pairs(corpus, vocab, config)));
}

}  // namespace anchorvec
