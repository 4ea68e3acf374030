#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace anchorvec {

using WordId = std::int32_t;
using Rng = std::mt19937_64;

// Frequency-ranked word table. Ids are dense and ordered by non-increasing
// count; equal counts keep first-occurrence order.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Words must already be in rank order. Counts may be empty (all zero), which
  // is what vocabularies recovered from embedding files look like.
  Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> counts,
             std::int64_t total_sentences = 0);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::int64_t count(WordId id) const { return counts_.at(id); }
  std::optional<WordId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  // Sum of counts of the retained words.
  std::int64_t total_tokens() const { return total_tokens_; }
  // Number of non-empty lines in the corpus the vocabulary was built from.
  std::int64_t total_sentences() const { return total_sentences_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  std::int64_t total_tokens_ = 0;
  std::int64_t total_sentences_ = 0;
};

inline constexpr std::size_t kDefaultMaxVocab = 200000;

Vocabulary build_vocab(const std::filesystem::path& corpus,
                       std::size_t max_vocab = kDefaultMaxVocab);

// "word<TAB>count" per line, rank order.
void save_vocab_tsv(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab_tsv(const std::filesystem::path& path);

// Probability of keeping one occurrence of a word during frequency
// subsampling. word2vec formula: with f = count / total_tokens,
//   keep = (sqrt(f / t) + 1) * t / f, capped at 1.
double subsample_keep_prob(std::int64_t count, std::int64_t total_tokens,
                           double t);

// Noise distribution P_n(w) proportional to count(w)^alpha, sampled by
// inverse CDF over the cumulative weights.
class NoiseTable {
 public:
  explicit NoiseTable(const Vocabulary& vocab, double alpha = 0.75);
  NoiseTable(std::span<const std::int64_t> counts, double alpha);

  WordId sample(Rng& rng) const;
  double probability(WordId id) const;
  std::size_t size() const { return cumulative_.size(); }
  double alpha() const { return alpha_; }

 private:
  std::vector<double> cumulative_;
  double alpha_;
};

// Corpus encoded against a vocabulary, out-of-vocabulary tokens dropped.
// Sentence i spans tokens[offsets[i], offsets[i + 1]).
struct EncodedCorpus {
  std::vector<WordId> tokens;
  std::vector<std::size_t> offsets{0};

  std::size_t sentences() const { return offsets.size() - 1; }
  std::span<const WordId> sentence(std::size_t i) const {
    return {tokens.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  void add_sentence(std::span<const WordId> ids);
};

// Keeps lines that still contain at least one token after OOV removal.
EncodedCorpus encode_corpus(const std::filesystem::path& corpus,
                            const Vocabulary& vocab);

using WordPair = std::pair<WordId, WordId>;  // (center, context)

// Emits every (center, context) pair where the context lies within
// span_of(center_position) tokens of the center.
template <class SpanFn, class Emit>
void for_each_pair(std::span<const WordId> sentence, SpanFn&& span_of,
                   Emit&& emit) {
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t b = span_of(i);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - b);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + b);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != i) emit(sentence[i], sentence[j]);
    }
  }
}

// Dynamic window: each center draws its span uniformly from [1, window].
template <class Emit>
void for_each_pair(std::span<const WordId> sentence, int window, Rng& rng,
                   Emit&& emit) {
  std::uniform_int_distribution<int> span(1, window);
  for_each_pair(
      sentence, [&](std::ptrdiff_t) { return span(rng); },
      std::forward<Emit>(emit));
}

// Repeatable pass-by-pass iterator over a range of sentences with
// subsampling and dynamic windows applied. One consumer per instance.
class CorpusStream {
 public:
  CorpusStream(const EncodedCorpus& corpus, const Vocabulary& vocab,
               double subsample_t, int window, std::uint64_t seed,
               std::size_t first_sentence = 0,
               std::size_t last_sentence = static_cast<std::size_t>(-1));

  // Pairs of the next sentence in the current pass. Returns false once the
  // pass is exhausted; the following call starts the next pass.
  bool next(std::vector<WordPair>& pairs);

  std::size_t pass() const { return pass_; }

 private:
  const EncodedCorpus* corpus_;
  std::vector<double> keep_;
  int window_;
  Rng rng_;
  std::size_t first_;
  std::size_t last_;
  std::size_t cursor_;
  std::size_t pass_ = 0;
  std::vector<WordId> kept_;
};

}  // namespace anchorvec
