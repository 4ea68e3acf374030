#include "anchorvec/dictionary.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include "anchorvec/text.hpp"

namespace anchorvec {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::identical: return "identical";
    case Provenance::numeral: return "numeral";
    case Provenance::external: return "external";
    case Provenance::induced: return "induced";
  }
  return "unknown";
}

Dictionary::Dictionary(std::size_t source_size, std::size_t target_size,
                       Provenance provenance)
    : targets_(source_size, kNone),
      target_size_(target_size),
      provenance_(provenance) {}

bool Dictionary::insert(WordId source, WordId target) {
  if (source < 0 || static_cast<std::size_t>(source) >= targets_.size())
    throw std::out_of_range("dictionary: source id " + std::to_string(source) +
                            " out of range");
  if (target < 0 || static_cast<std::size_t>(target) >= target_size_)
    throw std::out_of_range("dictionary: target id " + std::to_string(target) +
                            " out of range");
  WordId& slot = targets_[static_cast<std::size_t>(source)];
  if (slot != kNone) return false;
  slot = target;
  ++size_;
  return true;
}

void Dictionary::erase(WordId source) {
  if (source < 0 || static_cast<std::size_t>(source) >= targets_.size()) return;
  WordId& slot = targets_[static_cast<std::size_t>(source)];
  if (slot != kNone) {
    slot = kNone;
    --size_;
  }
}

std::vector<std::pair<WordId, WordId>> Dictionary::entries() const {
  std::vector<std::pair<WordId, WordId>> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < targets_.size(); ++i)
    if (targets_[i] != kNone) out.emplace_back(static_cast<WordId>(i), targets_[i]);
  return out;
}

bool is_numeral(std::string_view word) {
  return !word.empty() &&
         std::all_of(word.begin(), word.end(), [](char c) { return c >= '0' && c <= '9'; });
}

namespace {

template <class Keep>
Dictionary shared_spellings(const Vocabulary& source, const Vocabulary& target,
                            Provenance provenance, Keep&& keep) {
  Dictionary d(source.size(), target.size(), provenance);
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto& w = source.words()[i];
    if (!keep(w)) continue;
    if (auto j = target.find(w)) d.insert(static_cast<WordId>(i), *j);
  }
  return d;
}

}  // namespace

Dictionary seed_identical(const Vocabulary& source, const Vocabulary& target) {
  return shared_spellings(source, target, Provenance::identical,
                          [](const std::string&) { return true; });
}

Dictionary seed_numerals(const Vocabulary& source, const Vocabulary& target) {
  return shared_spellings(source, target, Provenance::numeral,
                          [](const std::string& w) { return is_numeral(w); });
}

ExternalDictionary load_external(const std::filesystem::path& path,
                                 const Vocabulary& source,
                                 const Vocabulary& target) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dictionary " + path.string());
  ExternalDictionary out{Dictionary(source.size(), target.size(), Provenance::external)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++lineno;
    fields.clear();
    for_each_token(line, [&](std::string_view t) { fields.push_back(t); });
    if (fields.empty()) continue;
    if (fields.size() != 2)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'source<TAB>target'");
    auto s = source.find(fields[0]);
    auto t = target.find(fields[1]);
    if (!s || !t) {
      ++out.skipped_oov;
      continue;
    }
    if (!out.dictionary.insert(*s, *t)) ++out.duplicates;
  }
  return out;
}

void save_tsv(const Dictionary& dictionary, const Vocabulary& source,
              const Vocabulary& target, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (auto [s, t] : dictionary.entries())
    out << source.word(s) << '\t' << target.word(t) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace anchorvec
