#include "anchorvec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "anchorvec/text.hpp"

namespace anchorvec {

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::vector<std::int64_t> counts,
                       std::int64_t total_sentences)
    : words_(std::move(words)),
      counts_(std::move(counts)),
      total_sentences_(total_sentences) {
  if (counts_.empty()) counts_.assign(words_.size(), 0);
  if (counts_.size() != words_.size())
    throw std::invalid_argument("vocabulary: words/counts size mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i > 0 && counts_[i] > counts_[i - 1])
      throw std::invalid_argument("vocabulary: counts not in rank order at '" +
                                  words_[i] + "'");
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second)
      throw std::invalid_argument("vocabulary: duplicate word '" + words_[i] +
                                  "'");
    total_tokens_ += counts_[i];
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(const std::filesystem::path& corpus,
                       std::size_t max_vocab) {
  if (max_vocab < 1) throw std::invalid_argument("max_vocab must be >= 1");
  std::ifstream in(corpus);
  if (!in) throw std::runtime_error("cannot read corpus " + corpus.string());

  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::string> seen;  // first-occurrence order
  std::vector<std::int64_t> counts;
  std::int64_t sentences = 0;
  std::string line;
  while (std::getline(in, line)) {
    bool any = false;
    for_each_token(line, [&](std::string_view tok) {
      any = true;
      auto [it, fresh] = slot.try_emplace(std::string(tok), seen.size());
      if (fresh) {
        seen.emplace_back(tok);
        counts.push_back(0);
      }
      ++counts[it->second];
    });
    if (any) ++sentences;
  }
  if (seen.empty())
    throw std::runtime_error("corpus " + corpus.string() + " has no tokens");

  std::vector<std::size_t> order(seen.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return counts[a] > counts[b];
  });
  order.resize(std::min(order.size(), max_vocab));

  std::vector<std::string> words;
  std::vector<std::int64_t> kept_counts;
  words.reserve(order.size());
  kept_counts.reserve(order.size());
  for (auto i : order) {
    words.push_back(std::move(seen[i]));
    kept_counts.push_back(counts[i]);
  }
  return Vocabulary(std::move(words), std::move(kept_counts), sentences);
}

void save_vocab_tsv(const Vocabulary& vocab,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i)
    out << vocab.words()[i] << '\t' << vocab.counts()[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Vocabulary load_vocab_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected word<TAB>count");
    words.push_back(line.substr(0, tab));
    counts.push_back(parse_number<std::int64_t>(
        std::string_view(line).substr(tab + 1), path.string(), lineno));
  }
  return Vocabulary(std::move(words), std::move(counts));
}

double subsample_keep_prob(std::int64_t count, std::int64_t total_tokens,
                           double t) {
  const double f = static_cast<double>(count) / static_cast<double>(total_tokens);
  const double keep = (std::sqrt(f / t) + 1.0) * t / f;
  return std::min(1.0, keep);
}

NoiseTable::NoiseTable(const Vocabulary& vocab, double alpha)
    : NoiseTable(vocab.counts(), alpha) {}

NoiseTable::NoiseTable(std::span<const std::int64_t> counts, double alpha)
    : alpha_(alpha) {
  if (counts.empty()) throw std::invalid_argument("noise table: empty vocabulary");
  cumulative_.reserve(counts.size());
  double acc = 0.0;
  for (auto c : counts) {
    acc += std::pow(static_cast<double>(c), alpha);
    cumulative_.push_back(acc);
  }
  if (!(acc > 0.0))
    throw std::invalid_argument("noise table: all counts are zero");
}

WordId NoiseTable::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, cumulative_.back());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u(rng));
  if (it == cumulative_.end()) --it;
  return static_cast<WordId>(it - cumulative_.begin());
}

double NoiseTable::probability(WordId id) const {
  const double prev = id == 0 ? 0.0 : cumulative_[id - 1];
  return (cumulative_[id] - prev) / cumulative_.back();
}

void EncodedCorpus::add_sentence(std::span<const WordId> ids) {
  tokens.insert(tokens.end(), ids.begin(), ids.end());
  offsets.push_back(tokens.size());
}

EncodedCorpus encode_corpus(const std::filesystem::path& corpus,
                            const Vocabulary& vocab) {
  std::ifstream in(corpus);
  if (!in) throw std::runtime_error("cannot read corpus " + corpus.string());
  EncodedCorpus out;
  std::vector<WordId> ids;
  std::string line;
  while (std::getline(in, line)) {
    ids.clear();
    for_each_token(line, [&](std::string_view tok) {
      if (auto id = vocab.find(tok)) ids.push_back(*id);
    });
    if (!ids.empty()) out.add_sentence(ids);
  }
  return out;
}

CorpusStream::CorpusStream(const EncodedCorpus& corpus, const Vocabulary& vocab,
                           double subsample_t, int window, std::uint64_t seed,
                           std::size_t first_sentence, std::size_t last_sentence)
    : corpus_(&corpus),
      window_(window),
      rng_(seed),
      first_(std::min(first_sentence, corpus.sentences())),
      last_(std::min(last_sentence, corpus.sentences())),
      cursor_(first_) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  keep_.resize(vocab.size(), 1.0);
  if (subsample_t > 0.0 && vocab.total_tokens() > 0) {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      if (vocab.counts()[i] > 0)
        keep_[i] = subsample_keep_prob(vocab.counts()[i], vocab.total_tokens(),
                                       subsample_t);
    }
  }
}

bool CorpusStream::next(std::vector<WordPair>& pairs) {
  pairs.clear();
  if (cursor_ >= last_) {
    cursor_ = first_;
    ++pass_;
    return false;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kept_.clear();
  for (WordId w : corpus_->sentence(cursor_++)) {
    const double p = keep_[w];
    if (p >= 1.0 || u(rng_) < p) kept_.push_back(w);
  }
  for_each_pair(kept_, window_, rng_,
                [&](WordId c, WordId x) { pairs.emplace_back(c, x); });
  return true;
}

}  // namespace anchorvec
