#include "anchorvec/eval.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "anchorvec/text.hpp"

namespace anchorvec {

void GoldDictionary::add(const std::string& source, const std::string& target) {
  auto it = std::find_if(entries.rbegin(), entries.rend(),
                         [&](const Entry& e) { return e.source == source; });
  if (it == entries.rend()) {
    entries.push_back({source, {target}});
  } else if (std::find(it->targets.begin(), it->targets.end(), target) ==
             it->targets.end()) {
    it->targets.push_back(target);
  }
}

GoldDictionary load_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read gold dictionary " + path.string());
  GoldDictionary gold;
  std::unordered_map<std::string, std::size_t> slot;
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
                               ": expected 'source target'");
    std::string s(fields[0]), t(fields[1]);
    auto [it, fresh] = slot.try_emplace(s, gold.entries.size());
    if (fresh) {
      gold.entries.push_back({s, {t}});
    } else {
      auto& targets = gold.entries[it->second].targets;
      if (std::find(targets.begin(), targets.end(), t) == targets.end())
        targets.push_back(std::move(t));
    }
  }
  return gold;
}

namespace {

struct Query {
  const GoldDictionary::Entry* entry;
  std::optional<WordId> source_id;
};

template <class Scalar>
BliResult evaluate(const EmbeddingMatrix<Scalar>& source,
                   const EmbeddingMatrix<Scalar>& target,
                   const GoldDictionary& gold, const BliOptions& options,
                   bool filtered) {
  if (gold.empty()) throw std::invalid_argument("bli: empty gold dictionary");
  if (!source.vocab || !target.vocab)
    throw std::invalid_argument("bli: embeddings without vocabulary");
  const Vocabulary& sv = *source.vocab;
  const Vocabulary& tv = *target.vocab;

  std::vector<Query> queries;
  queries.reserve(gold.size());
  for (const auto& e : gold.entries) {
    if (filtered) {
      const bool candidate =
          options.filter_scope == FilterScope::gold_candidates
              ? std::find(e.targets.begin(), e.targets.end(), e.source) != e.targets.end()
              : tv.contains(e.source);
      if (candidate) continue;
    }
    queries.push_back({&e, sv.find(e.source)});
  }
  if (queries.empty())
    throw std::invalid_argument("bli: filtering removed every gold entry");
  if (options.top_n && *options.top_n < queries.size()) {
    auto rank = [&](const Query& q) {
      return q.source_id ? static_cast<std::int64_t>(*q.source_id)
                         : std::numeric_limits<std::int64_t>::max();
    };
    std::stable_sort(queries.begin(), queries.end(),
                     [&](const Query& a, const Query& b) { return rank(a) < rank(b); });
    queries.resize(*options.top_n);
  }

  std::vector<WordId> in_vocab;
  for (const auto& q : queries)
    if (q.source_id) in_vocab.push_back(*q.source_id);

  // Best and runner-up target per in-vocabulary query.
  std::vector<std::pair<WordId, WordId>> ranked(in_vocab.size(), {-1, -1});
  if (!in_vocab.empty()) {
    const RowMatrix<Scalar> su = unit_rows<Scalar>(source.rows, &sv);
    const RowMatrix<Scalar> tu = unit_rows<Scalar>(target.rows, &tv);
    const CslsScorer<Scalar> scorer(su, tu, options.csls);
    const Eigen::Index block = options.csls.block_rows(tu.rows());
    RowMatrix<Scalar> q;
    RowMatrix<Scalar> sims;
    for (std::size_t first = 0; first < in_vocab.size(); first += static_cast<std::size_t>(block)) {
      const auto n = std::min<std::size_t>(static_cast<std::size_t>(block), in_vocab.size() - first);
      q.resize(static_cast<Eigen::Index>(n), su.cols());
      for (std::size_t i = 0; i < n; ++i) q.row(static_cast<Eigen::Index>(i)) = su.row(in_vocab[first + i]);
      sims.noalias() = q * tu.transpose();
      for (std::size_t i = 0; i < n; ++i) {
        auto row = Scalar(2) * sims.row(static_cast<Eigen::Index>(i)).array() -
                   scorer.source_penalty()(in_vocab[first + i]) -
                   scorer.target_penalty().transpose().array();
        Eigen::Index best = 0, second = -1;
        Scalar best_v = row(0), second_v = -std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index j = 1; j < row.size(); ++j) {
          const Scalar v = row(j);
          if (v > best_v) {
            second = best;
            second_v = best_v;
            best = j;
            best_v = v;
          } else if (v > second_v || second < 0) {
            second = j;
            second_v = v;
          }
        }
        ranked[first + i] = {static_cast<WordId>(best), static_cast<WordId>(second)};
      }
    }
  }

  BliResult result;
  result.total = queries.size();
  std::size_t next = 0;
  for (const auto& q : queries) {
    BliPrediction p;
    p.source = q.entry->source;
    if (q.source_id) {
      ++result.covered;
      auto [best, second] = ranked[next++];
      WordId pick = best;
      if (filtered && tv.word(best) == p.source && second >= 0) pick = second;
      p.predicted = tv.word(pick);
    } else {
      p.copied = true;
      ++result.copied_backoff;
      p.predicted = p.source;
    }
    const auto& t = q.entry->targets;
    p.correct = std::find(t.begin(), t.end(), p.predicted) != t.end();
    if (filtered && p.copied) p.correct = false;
    if (p.correct) ++result.hits;
    if (options.keep_predictions) result.predictions.push_back(std::move(p));
  }
  result.p_at_1 = static_cast<double>(result.hits) / static_cast<double>(result.total);
  return result;
}

}  // namespace

template <class Scalar>
BliResult bli_eval(const EmbeddingMatrix<Scalar>& source,
                   const EmbeddingMatrix<Scalar>& target,
                   const GoldDictionary& gold, const BliOptions& options) {
  return evaluate(source, target, gold, options, false);
}

template <class Scalar>
BliResult bli_eval_filtered(const EmbeddingMatrix<Scalar>& source,
                            const EmbeddingMatrix<Scalar>& target,
                            const GoldDictionary& gold,
                            const BliOptions& options) {
  return evaluate(source, target, gold, options, true);
}

template BliResult bli_eval<float>(const EmbeddingMatrix<float>&,
                                   const EmbeddingMatrix<float>&,
                                   const GoldDictionary&, const BliOptions&);
template BliResult bli_eval<double>(const EmbeddingMatrix<double>&,
                                    const EmbeddingMatrix<double>&,
                                    const GoldDictionary&, const BliOptions&);
template BliResult bli_eval_filtered<float>(const EmbeddingMatrix<float>&,
                                            const EmbeddingMatrix<float>&,
                                            const GoldDictionary&, const BliOptions&);
template BliResult bli_eval_filtered<double>(const EmbeddingMatrix<double>&,
                                             const EmbeddingMatrix<double>&,
                                             const GoldDictionary&, const BliOptions&);

}  // namespace anchorvec
