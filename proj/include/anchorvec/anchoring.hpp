#pragma once

#include <memory>
#include <mutex>
#include <stdexcept>

#include "anchorvec/dictionary.hpp"
#include "anchorvec/embeddings.hpp"
#include "anchorvec/trainer.hpp"

namespace anchorvec {

// Cross-lingual context resolver: a source context word found in the
// dictionary is represented by the frozen output vector of its translation,
// any other word by its own (trainable) source output vector.
//
// The dictionary is published as an immutable snapshot. A View pins one
// snapshot, so every lookup made through it sees the same dictionary even
// while replace_dictionary runs on another thread.
template <class Scalar>
class AnchoredResolver {
 public:
  AnchoredResolver(RowMatrix<Scalar>& source_outputs,
                   const RowMatrix<Scalar>& target_outputs, Dictionary dictionary)
      : source_(&source_outputs), target_(&target_outputs) {
    if (source_outputs.cols() != target_outputs.cols())
      throw std::invalid_argument("anchoring: source/target dimension mismatch");
    replace_dictionary(std::move(dictionary));
  }

  class View {
   public:
    ContextRow<Scalar> resolve(WordId w) const {
      const WordId t = (*map_)[static_cast<std::size_t>(w)];
      if (t != Dictionary::kNone) return {target_ + static_cast<Eigen::Index>(t) * dim_, nullptr};
      Scalar* p = source_ + static_cast<Eigen::Index>(w) * dim_;
      return {p, p};
    }
    const Dictionary& dictionary() const { return *snapshot_; }

   private:
    friend class AnchoredResolver;
    std::shared_ptr<const Dictionary> snapshot_;
    const std::vector<WordId>* map_ = nullptr;
    Scalar* source_ = nullptr;
    const Scalar* target_ = nullptr;
    Eigen::Index dim_ = 0;
  };

  View view() const {
    View v;
    {
      std::lock_guard lock(mutex_);
      v.snapshot_ = snapshot_;
    }
    v.map_ = &v.snapshot_->targets();
    v.source_ = source_->data();
    v.target_ = target_->data();
    v.dim_ = source_->cols();
    return v;
  }

  // Atomically swaps in a new dictionary; validates its ids first.
  void replace_dictionary(Dictionary dictionary) {
    if (dictionary.source_size() != static_cast<std::size_t>(source_->rows()) ||
        dictionary.target_size() != static_cast<std::size_t>(target_->rows()))
      throw std::invalid_argument(
          "anchoring: dictionary does not match the source/target vocabularies");
    auto next = std::make_shared<const Dictionary>(std::move(dictionary));
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(next);
  }

  std::shared_ptr<const Dictionary> dictionary() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
  }

  Eigen::Index dim() const { return source_->cols(); }

 private:
  RowMatrix<Scalar>* source_;
  const RowMatrix<Scalar>* target_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Dictionary> snapshot_;
};

}  // namespace anchorvec
