#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "anchorvec/corpus.hpp"

namespace anchorvec {

enum class Provenance { identical, numeral, external, induced };

std::string_view to_string(Provenance p);

// Partial map from source word ids to target word ids, stored densely by
// source id. Each source id maps to at most one target.
class Dictionary {
 public:
  static constexpr WordId kNone = -1;

  Dictionary() = default;
  Dictionary(std::size_t source_size, std::size_t target_size,
             Provenance provenance = Provenance::external);

  // First mapping wins: returns false and leaves the entry untouched when
  // `source` is already mapped. Throws on out-of-range ids.
  bool insert(WordId source, WordId target);
  void erase(WordId source);

  std::optional<WordId> lookup(WordId source) const {
    if (source < 0 || static_cast<std::size_t>(source) >= targets_.size())
      return std::nullopt;
    const WordId t = targets_[static_cast<std::size_t>(source)];
    return t == kNone ? std::nullopt : std::optional<WordId>(t);
  }
  bool contains(WordId source) const { return lookup(source).has_value(); }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t source_size() const { return targets_.size(); }
  std::size_t target_size() const { return target_size_; }
  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }

  // Dense source-id -> target-id table, kNone where absent.
  const std::vector<WordId>& targets() const { return targets_; }
  // Entries in ascending source id.
  std::vector<std::pair<WordId, WordId>> entries() const;

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.targets_ == b.targets_ && a.target_size_ == b.target_size_;
  }

 private:
  std::vector<WordId> targets_;
  std::size_t target_size_ = 0;
  std::size_t size_ = 0;
  Provenance provenance_ = Provenance::external;
};

// True for non-empty strings of ASCII digits only.
bool is_numeral(std::string_view word);

// Words spelled identically in both vocabularies.
Dictionary seed_identical(const Vocabulary& source, const Vocabulary& target);
// The identical-word seed restricted to digit sequences.
Dictionary seed_numerals(const Vocabulary& source, const Vocabulary& target);

struct ExternalDictionary {
  Dictionary dictionary;
  std::size_t skipped_oov = 0;
  std::size_t duplicates = 0;
};

// "src<TAB>tgt" per line (a single space also separates). Pairs with an
// out-of-vocabulary side are skipped and counted; a repeated source keeps
// its first mapping.
ExternalDictionary load_external(const std::filesystem::path& path,
                                 const Vocabulary& source,
                                 const Vocabulary& target);

void save_tsv(const Dictionary& dictionary, const Vocabulary& source,
              const Vocabulary& target, const std::filesystem::path& path);

}  // namespace anchorvec
