#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anchorvec/embeddings.hpp"
#include "anchorvec/retrieval.hpp"

namespace anchorvec {

// Test dictionary: each source word with its set of acceptable translations,
// in first-appearance order.
struct GoldDictionary {
  struct Entry {
    std::string source;
    std::vector<std::string> targets;
  };
  std::vector<Entry> entries;

  void add(const std::string& source, const std::string& target);
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// "src tgt" per line, tab or space separated.
GoldDictionary load_gold(const std::filesystem::path& path);

enum class FilterScope {
  // Drop entries whose source word is among that entry's gold translations.
  gold_candidates,
  // Drop entries whose source word is in the target vocabulary.
  target_vocabulary,
};

struct BliOptions {
  CslsParams csls;
  // Score only the n gold entries whose source words rank highest in the
  // source vocabulary (OOV entries rank last).
  std::optional<std::size_t> top_n;
  FilterScope filter_scope = FilterScope::gold_candidates;
  bool keep_predictions = false;
};

struct BliPrediction {
  std::string source;
  std::string predicted;
  bool correct = false;
  bool copied = false;
};

struct BliResult {
  double p_at_1 = 0.0;
  std::size_t total = 0;
  std::size_t hits = 0;
  std::size_t covered = 0;  // source word in vocabulary
  std::size_t copied_backoff = 0;
  std::vector<BliPrediction> predictions;
};

// Precision at 1 with CSLS retrieval over the whole target vocabulary.
// Out-of-vocabulary source words predict their own spelling.
template <class Scalar>
BliResult bli_eval(const EmbeddingMatrix<Scalar>& source,
                   const EmbeddingMatrix<Scalar>& target,
                   const GoldDictionary& gold, const BliOptions& options = {});

// As bli_eval, after removing entries whose source word is a candidate
// translation (see FilterScope); a top-1 prediction spelled like the source
// word is replaced by the second-ranked target.
template <class Scalar>
BliResult bli_eval_filtered(const EmbeddingMatrix<Scalar>& source,
                            const EmbeddingMatrix<Scalar>& target,
                            const GoldDictionary& gold,
                            const BliOptions& options = {});

}  // namespace anchorvec
