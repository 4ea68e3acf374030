#include "anchorvec/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "anchorvec/text.hpp"

namespace anchorvec {

template <class Scalar>
EmbeddingPair<Scalar> init_random(std::shared_ptr<const Vocabulary> vocab,
                                  int dim, std::uint64_t seed,
                                  const std::string& language) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!vocab) throw std::invalid_argument("init_random: null vocabulary");
  const auto v = static_cast<Eigen::Index>(vocab->size());
  EmbeddingPair<Scalar> pair;
  pair.input = {vocab, RowMatrix<Scalar>(v, dim), Role::input, language};
  pair.output = {vocab, RowMatrix<Scalar>::Zero(v, dim), Role::output, language};

  Rng rng(seed);
  const double bound = 0.5 / dim;
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      pair.input.rows(i, j) = static_cast<Scalar>(u(rng));
  return pair;
}

template <class Scalar>
void save_text(const EmbeddingMatrix<Scalar>& matrix,
               const std::filesystem::path& path) {
  if (matrix.size() == 0 || matrix.dim() == 0)
    throw std::invalid_argument("save_text: empty matrix");
  if (!matrix.vocab || matrix.vocab->size() != matrix.size())
    throw std::invalid_argument("save_text: vocabulary does not match rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  std::string line;
  line.reserve(static_cast<std::size_t>(matrix.dim()) * 14);
  out << matrix.size() << ' ' << matrix.dim() << '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    line.clear();
    line += matrix.vocab->word(static_cast<WordId>(i));
    for (Eigen::Index j = 0; j < matrix.dim(); ++j) {
      line += ' ';
      append_number(line, matrix.rows(static_cast<Eigen::Index>(i), j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <class Scalar>
EmbeddingMatrix<Scalar> load_text(const std::filesystem::path& path, Role role) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(where + ": empty file");
  std::vector<std::string_view> header;
  for_each_token(line, [&](std::string_view t) { header.push_back(t); });
  if (header.size() != 2)
    throw std::runtime_error(where + ":1: malformed header, expected 'V dim'");
  const auto v = parse_number<std::int64_t>(header[0], where, 1);
  const auto dim = parse_number<std::int64_t>(header[1], where, 1);
  if (v < 1 || dim < 1)
    throw std::runtime_error(where + ":1: malformed header, sizes must be positive");

  RowMatrix<Scalar> rows(v, dim);
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(v));
  for (std::int64_t i = 0; i < v; ++i) {
    const std::size_t lineno = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line))
      throw std::runtime_error(where + ": expected " + std::to_string(v) +
                               " rows, found " + std::to_string(i));
    std::int64_t field = -1;
    for_each_token(line, [&](std::string_view t) {
      if (field < 0) {
        words.emplace_back(t);
      } else if (field < dim) {
        const auto x = parse_number<Scalar>(t, where, lineno);
        if (!std::isfinite(x))
          throw std::runtime_error(where + ":" + std::to_string(lineno) +
                                   ": non-finite value");
        rows(i, field) = x;
      }
      ++field;
    });
    if (field != dim)
      throw std::runtime_error(where + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(dim) +
                               " values, found " + std::to_string(std::max<std::int64_t>(field, 0)));
  }
  auto vocab = std::make_shared<const Vocabulary>(std::move(words),
                                                  std::vector<std::int64_t>{});
  return {std::move(vocab), std::move(rows), role, {}};
}

template <class Scalar>
RowMatrix<Scalar> unit_rows(const RowMatrix<Scalar>& rows,
                            const Vocabulary* vocab) {
  ColVector<Scalar> norms = rows.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > Scalar(0))) {
      std::string name = vocab && static_cast<std::size_t>(i) < vocab->size()
                             ? "'" + vocab->word(static_cast<WordId>(i)) + "'"
                             : "row " + std::to_string(i);
      throw std::domain_error("cannot normalize zero vector for " + name);
    }
  }
  return norms.cwiseInverse().asDiagonal() * rows;
}

template <class Scalar>
EmbeddingMatrix<Scalar> unit_normalize_copy(const EmbeddingMatrix<Scalar>& m) {
  return {m.vocab, unit_rows<Scalar>(m.rows, m.vocab.get()), m.role, m.language};
}

#define ANCHORVEC_INSTANTIATE(S)                                               \
  template EmbeddingPair<S> init_random<S>(std::shared_ptr<const Vocabulary>,  \
                                           int, std::uint64_t,                 \
                                           const std::string&);                \
  template void save_text<S>(const EmbeddingMatrix<S>&,                        \
                             const std::filesystem::path&);                    \
  template EmbeddingMatrix<S> load_text<S>(const std::filesystem::path&, Role); \
  template RowMatrix<S> unit_rows<S>(const RowMatrix<S>&, const Vocabulary*);  \
  template EmbeddingMatrix<S> unit_normalize_copy<S>(const EmbeddingMatrix<S>&);

ANCHORVEC_INSTANTIATE(float)
ANCHORVEC_INSTANTIATE(double)

#undef ANCHORVEC_INSTANTIATE

}  // namespace anchorvec
