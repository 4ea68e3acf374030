#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "anchorvec/corpus.hpp"

namespace anchorvec {

template <class Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <class Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Role { input, output };

// One V x dim matrix of vectors for a single language and role. Rows are
// indexed by the ids of `vocab`.
template <class Scalar = float>
struct EmbeddingMatrix {
  std::shared_ptr<const Vocabulary> vocab;
  RowMatrix<Scalar> rows;
  Role role = Role::input;
  std::string language;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  Eigen::Index dim() const { return rows.cols(); }
  auto row(WordId id) { return rows.row(id); }
  auto row(WordId id) const { return rows.row(id); }
};

// Input and output vectors sharing one vocabulary.
template <class Scalar = float>
struct EmbeddingPair {
  EmbeddingMatrix<Scalar> input;
  EmbeddingMatrix<Scalar> output;
};

// Input rows uniform in [-0.5/dim, 0.5/dim], output rows zero.
template <class Scalar>
EmbeddingPair<Scalar> init_random(std::shared_ptr<const Vocabulary> vocab,
                                  int dim, std::uint64_t seed,
                                  const std::string& language = {});

// word2vec text format: "V dim" header, then "word v1 ... vdim" per row.
// Values use the shortest representation that reads back exactly.
template <class Scalar>
void save_text(const EmbeddingMatrix<Scalar>& matrix,
               const std::filesystem::path& path);

template <class Scalar>
EmbeddingMatrix<Scalar> load_text(const std::filesystem::path& path,
                                  Role role = Role::input);

// Copy with every row scaled to unit L2 norm. Throws on an all-zero row,
// naming the word.
template <class Scalar>
EmbeddingMatrix<Scalar> unit_normalize_copy(const EmbeddingMatrix<Scalar>& m);

template <class Scalar>
RowMatrix<Scalar> unit_rows(const RowMatrix<Scalar>& rows,
                            const Vocabulary* vocab = nullptr);

// FNV-1a over the raw bytes; equal iff bit-identical for practical purposes.
template <class Scalar>
std::uint64_t checksum(const RowMatrix<Scalar>& rows) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* p = reinterpret_cast<const unsigned char*>(rows.data());
  const auto n = static_cast<std::size_t>(rows.size()) * sizeof(Scalar);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <class To, class From>
EmbeddingMatrix<To> cast(const EmbeddingMatrix<From>& m) {
  return {m.vocab, m.rows.template cast<To>(), m.role, m.language};
}

}  // namespace anchorvec
