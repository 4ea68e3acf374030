#pragma once

#include <cstdint>
#include <filesystem>

namespace anchorvec {

// Parameters of a pair of token-parallel synthetic corpora.
//
// A latent corpus is sampled once. Latent word l has Zipf weight
// (l + 1)^-zipf_s and belongs to one of `topic_clusters` clusters. Each
// sentence picks a cluster in proportion to its mass; every next token is
// one of the previous token's fixed collocates (collocation_prob), a draw
// from the sentence cluster (topic_prob), or a draw from the global Zipf
// law. Both surface corpora are renamings of the latent one.
struct SynthSpec {
  std::size_t vocab_size = 2000;
  std::size_t sentences = 200000;
  std::size_t min_length = 8;
  std::size_t max_length = 20;
  double zipf_s = 1.0;
  // Fraction of the vocabulary with distinct source and target spellings;
  // the rest is spelled identically in both languages.
  double translate_fraction = 0.9;
  // How many of the identically spelled words are digit strings.
  std::size_t numerals = 20;
  std::size_t topic_clusters = 50;
  std::size_t collocates = 4;
  double collocation_prob = 0.5;
  double topic_prob = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthFiles {
  std::filesystem::path source;
  std::filesystem::path target;
  // "source<TAB>target" for every latent word, most frequent first.
  std::filesystem::path gold;
};

// Writes src.txt, tgt.txt and gold.tsv into out_dir.
SynthFiles generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

// Copies `input` to `output`, replacing each token with probability
// swap_fraction by a different word drawn from the corpus unigram
// distribution. Returns the number of replaced tokens.
std::size_t perturb(const std::filesystem::path& input,
                    const std::filesystem::path& output, double swap_fraction,
                    std::uint64_t seed);

}  // namespace anchorvec
