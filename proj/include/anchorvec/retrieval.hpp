#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorvec/dictionary.hpp"
#include "anchorvec/embeddings.hpp"

// Cosine and CSLS retrieval over unit-normalized rows. Every argmax breaks
// exact ties towards the lowest index.

namespace anchorvec {

struct CslsParams {
  int neighborhood_k = 10;
  // Query rows per similarity block; 0 picks a block of about 32M scores.
  Eigen::Index batch = 0;

  Eigen::Index block_rows(Eigen::Index base_rows) const {
    if (batch > 0) return batch;
    return std::max<Eigen::Index>(1, (Eigen::Index(1) << 25) / std::max<Eigen::Index>(1, base_rows));
  }
};

namespace detail {

template <class Derived>
Eigen::Index argmax_first(const Eigen::DenseBase<Derived>& row) {
  Eigen::Index best = 0;
  auto value = row(0);
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > value) {
      value = row(j);
      best = j;
    }
  }
  return best;
}

// Mean of the k largest entries, summed in descending order.
template <class Derived>
typename Derived::Scalar top_k_mean(const Eigen::DenseBase<Derived>& row, int k,
                                    std::vector<typename Derived::Scalar>& buf) {
  using Scalar = typename Derived::Scalar;
  buf.resize(static_cast<std::size_t>(row.size()));
  for (Eigen::Index j = 0; j < row.size(); ++j) buf[static_cast<std::size_t>(j)] = row(j);
  std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end(), std::greater<Scalar>());
  std::sort(buf.begin(), buf.begin() + k, std::greater<Scalar>());
  Scalar sum = 0;
  for (int i = 0; i < k; ++i) sum += buf[static_cast<std::size_t>(i)];
  return sum / static_cast<Scalar>(k);
}

template <class Scalar, class Fn>
void for_each_block(const RowMatrix<Scalar>& queries, const RowMatrix<Scalar>& base,
                    Eigen::Index block, Fn&& fn) {
  RowMatrix<Scalar> sims;
  for (Eigen::Index first = 0; first < queries.rows(); first += block) {
    const Eigen::Index n = std::min(block, queries.rows() - first);
    sims.noalias() = queries.middleRows(first, n) * base.transpose();
    fn(first, sims);
  }
}

inline void check_k(int k, Eigen::Index a, Eigen::Index b) {
  if (k < 1) throw std::invalid_argument("csls: neighborhood_k must be >= 1");
  if (k > a || k > b)
    throw std::invalid_argument("csls: neighborhood_k = " + std::to_string(k) +
                                " exceeds vocabulary size");
}

}  // namespace detail

// For every query row, the mean cosine to its k nearest base rows.
template <class Scalar>
ColVector<Scalar> mean_neighbor_similarity(const RowMatrix<Scalar>& queries,
                                           const RowMatrix<Scalar>& base, int k,
                                           Eigen::Index batch = 0) {
  detail::check_k(k, base.rows(), base.rows());
  ColVector<Scalar> r(queries.rows());
  std::vector<Scalar> buf;
  const CslsParams p{k, batch};
  detail::for_each_block(queries, base, p.block_rows(base.rows()),
                         [&](Eigen::Index first, const RowMatrix<Scalar>& sims) {
                           for (Eigen::Index i = 0; i < sims.rows(); ++i)
                             r(first + i) = detail::top_k_mean(sims.row(i), k, buf);
                         });
  return r;
}

// Row-wise cosine nearest neighbor of each query among base rows.
template <class Scalar>
std::vector<WordId> nearest_by_cosine(const RowMatrix<Scalar>& queries,
                                      const RowMatrix<Scalar>& base,
                                      Eigen::Index batch = 0) {
  std::vector<WordId> nn(static_cast<std::size_t>(queries.rows()));
  const CslsParams p{1, batch};
  detail::for_each_block(queries, base, p.block_rows(base.rows()),
                         [&](Eigen::Index first, const RowMatrix<Scalar>& sims) {
                           for (Eigen::Index i = 0; i < sims.rows(); ++i)
                             nn[static_cast<std::size_t>(first + i)] =
                                 static_cast<WordId>(detail::argmax_first(sims.row(i)));
                         });
  return nn;
}

// CSLS(x, y) = 2 cos(x, y) - r_tgt(x) - r_src(y), where r_tgt(x) is the mean
// cosine of x to its k nearest targets and r_src(y) the mean cosine of y to
// its k nearest sources. Holds references; both matrices must outlive it.
template <class Scalar>
class CslsScorer {
 public:
  CslsScorer(const RowMatrix<Scalar>& source_unit,
             const RowMatrix<Scalar>& target_unit, const CslsParams& params = {})
      : source_(&source_unit), target_(&target_unit), params_(params) {
    detail::check_k(params.neighborhood_k, source_unit.rows(), target_unit.rows());
    if (source_unit.cols() != target_unit.cols())
      throw std::invalid_argument("csls: dimension mismatch");
    source_penalty_ = mean_neighbor_similarity<Scalar>(
        source_unit, target_unit, params.neighborhood_k, params.batch);
    target_penalty_ = mean_neighbor_similarity<Scalar>(
        target_unit, source_unit, params.neighborhood_k, params.batch);
  }

  // r_tgt(x_i) per source row.
  const ColVector<Scalar>& source_penalty() const { return source_penalty_; }
  // r_src(y_j) per target row.
  const ColVector<Scalar>& target_penalty() const { return target_penalty_; }

  // CSLS scores for source rows [first, first + count) against all targets.
  RowMatrix<Scalar> scores(Eigen::Index first, Eigen::Index count) const {
    RowMatrix<Scalar> s = Scalar(2) * (source_->middleRows(first, count) *
                                       target_->transpose());
    s.colwise() -= source_penalty_.segment(first, count);
    s.rowwise() -= target_penalty_.transpose();
    return s;
  }
  RowMatrix<Scalar> dense() const { return scores(0, source_->rows()); }

  std::vector<WordId> argmax(const std::vector<WordId>& sources) const {
    std::vector<WordId> out(sources.size());
    const Eigen::Index block = params_.block_rows(target_->rows());
    RowMatrix<Scalar> rows;
    for (std::size_t first = 0; first < sources.size(); first += static_cast<std::size_t>(block)) {
      const auto n = std::min<std::size_t>(static_cast<std::size_t>(block), sources.size() - first);
      RowMatrix<Scalar> q(static_cast<Eigen::Index>(n), source_->cols());
      for (std::size_t i = 0; i < n; ++i) q.row(static_cast<Eigen::Index>(i)) = source_->row(sources[first + i]);
      rows.noalias() = q * target_->transpose();
      for (std::size_t i = 0; i < n; ++i) {
        auto s = Scalar(2) * rows.row(static_cast<Eigen::Index>(i)).array() -
                 source_penalty_(sources[first + i]) - target_penalty_.transpose().array();
        out[first + i] = static_cast<WordId>(detail::argmax_first(s));
      }
    }
    return out;
  }

  const RowMatrix<Scalar>& source() const { return *source_; }
  const RowMatrix<Scalar>& target() const { return *target_; }
  const CslsParams& params() const { return params_; }

 private:
  const RowMatrix<Scalar>* source_;
  const RowMatrix<Scalar>* target_;
  CslsParams params_;
  ColVector<Scalar> source_penalty_;
  ColVector<Scalar> target_penalty_;
};

template <class Scalar>
CslsScorer<Scalar> csls_scores(const RowMatrix<Scalar>& source_unit,
                               const RowMatrix<Scalar>& target_unit,
                               const CslsParams& params = {}) {
  return CslsScorer<Scalar>(source_unit, target_unit, params);
}

// Keeps entry i iff the cosine nearest source of the cosine nearest target of
// x_i is i itself. The candidate's own target plays no part in the test.
template <class Scalar>
Dictionary cyclic_filter(const RowMatrix<Scalar>& source_unit,
                         const RowMatrix<Scalar>& target_unit,
                         const Dictionary& candidate, Eigen::Index batch = 0) {
  Dictionary kept(candidate.source_size(), candidate.target_size(),
                  candidate.provenance());
  const auto entries = candidate.entries();
  if (entries.empty()) return kept;

  RowMatrix<Scalar> queries(static_cast<Eigen::Index>(entries.size()), source_unit.cols());
  for (std::size_t i = 0; i < entries.size(); ++i)
    queries.row(static_cast<Eigen::Index>(i)) = source_unit.row(entries[i].first);
  const auto forward = nearest_by_cosine<Scalar>(queries, target_unit, batch);

  std::vector<WordId> needed(forward);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
  RowMatrix<Scalar> back_queries(static_cast<Eigen::Index>(needed.size()), target_unit.cols());
  for (std::size_t i = 0; i < needed.size(); ++i)
    back_queries.row(static_cast<Eigen::Index>(i)) = target_unit.row(needed[i]);
  const auto backward = nearest_by_cosine<Scalar>(back_queries, source_unit, batch);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto pos = std::lower_bound(needed.begin(), needed.end(), forward[i]) - needed.begin();
    if (backward[static_cast<std::size_t>(pos)] == entries[i].first)
      kept.insert(entries[i].first, entries[i].second);
  }
  return kept;
}

// Self-learning dictionary: every source id i (or the first `top_n`) maps to
// argmax_j CSLS(x_i, y_j), then the cyclic-consistency filter is applied.
// Both inputs must be unit-normalized. Runs two similarity sweeps: targets
// against sources (r_src and backward cosine neighbors), then sources
// against targets (r_tgt, forward cosine neighbors, CSLS argmax).
template <class Scalar>
Dictionary induce(const RowMatrix<Scalar>& source_unit,
                  const RowMatrix<Scalar>& target_unit,
                  const CslsParams& params = {},
                  std::optional<std::size_t> top_n = std::nullopt) {
  const int k = params.neighborhood_k;
  detail::check_k(k, source_unit.rows(), target_unit.rows());
  if (source_unit.cols() != target_unit.cols())
    throw std::invalid_argument("induce: dimension mismatch");

  const Eigen::Index vs = source_unit.rows();
  const Eigen::Index vt = target_unit.rows();
  const Eigen::Index n = top_n ? std::min<Eigen::Index>(vs, static_cast<Eigen::Index>(*top_n)) : vs;
  std::vector<Scalar> buf;

  ColVector<Scalar> target_penalty(vt);
  std::vector<WordId> backward(static_cast<std::size_t>(vt));
  detail::for_each_block(target_unit, source_unit, params.block_rows(vs),
                         [&](Eigen::Index first, const RowMatrix<Scalar>& sims) {
                           for (Eigen::Index j = 0; j < sims.rows(); ++j) {
                             target_penalty(first + j) = detail::top_k_mean(sims.row(j), k, buf);
                             backward[static_cast<std::size_t>(first + j)] =
                                 static_cast<WordId>(detail::argmax_first(sims.row(j)));
                           }
                         });

  Dictionary out(static_cast<std::size_t>(vs), static_cast<std::size_t>(vt),
                 Provenance::induced);
  const RowMatrix<Scalar> queries = source_unit.topRows(n);
  detail::for_each_block(
      queries, target_unit, params.block_rows(vt),
      [&](Eigen::Index first, const RowMatrix<Scalar>& sims) {
        for (Eigen::Index i = 0; i < sims.rows(); ++i) {
          const auto row = sims.row(i);
          const Scalar penalty = detail::top_k_mean(row, k, buf);
          const auto forward = detail::argmax_first(row);
          auto csls = Scalar(2) * row.array() - penalty - target_penalty.transpose().array();
          const auto best = detail::argmax_first(csls);
          const auto source = static_cast<WordId>(first + i);
          if (backward[static_cast<std::size_t>(forward)] == source)
            out.insert(source, static_cast<WordId>(best));
        }
      });
  return out;
}

}  // namespace anchorvec
