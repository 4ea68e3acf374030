#include "anchorvec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorvec/corpus.hpp"
#include "anchorvec/text.hpp"

namespace anchorvec {

void SynthSpec::validate() const {
  if (vocab_size < 1) throw std::invalid_argument("synth: vocab_size must be >= 1");
  if (topic_clusters < 1 || topic_clusters > vocab_size)
    throw std::invalid_argument("synth: topic_clusters must be in [1, vocab_size]");
  if (!(translate_fraction >= 0.0 && translate_fraction <= 1.0))
    throw std::invalid_argument("synth: translate_fraction must be in [0, 1]");
  if (min_length < 1 || max_length < min_length)
    throw std::invalid_argument("synth: need 1 <= min_length <= max_length");
  if (!(zipf_s >= 0.0)) throw std::invalid_argument("synth: zipf_s must be >= 0");
  if (collocates < 1) throw std::invalid_argument("synth: collocates must be >= 1");
  if (collocation_prob < 0.0 || topic_prob < 0.0 || collocation_prob + topic_prob > 1.0)
    throw std::invalid_argument("synth: collocation_prob + topic_prob must be in [0, 1]");
}

namespace {

// Lowercase base-26 spelling, at least three letters.
std::string letters(std::size_t n) {
  std::string s;
  do {
    s += static_cast<char>('a' + n % 26);
    n /= 26;
  } while (n > 0);
  while (s.size() < 3) s += 'a';
  std::reverse(s.begin(), s.end());
  return s;
}

struct Surface {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

Surface spell(const SynthSpec& spec, Rng& rng) {
  const std::size_t v = spec.vocab_size;
  const auto translated = static_cast<std::size_t>(std::llround(spec.translate_fraction * v));
  std::vector<std::size_t> ids(v);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  // ids[0, translated) get distinct spellings, the rest are shared.
  const std::size_t shared = v - translated;
  const std::size_t numerals = std::min(spec.numerals, shared);

  std::vector<std::size_t> numbers(std::max<std::size_t>(100, 10 * numerals));
  std::iota(numbers.begin(), numbers.end(), 0);
  std::shuffle(numbers.begin(), numbers.end(), rng);
  std::vector<std::size_t> src_names(v), tgt_names(v);
  std::iota(src_names.begin(), src_names.end(), 0);
  std::iota(tgt_names.begin(), tgt_names.end(), 0);
  std::shuffle(src_names.begin(), src_names.end(), rng);
  std::shuffle(tgt_names.begin(), tgt_names.end(), rng);

  Surface out{std::vector<std::string>(v), std::vector<std::string>(v)};
  for (std::size_t r = 0; r < v; ++r) {
    const std::size_t l = ids[r];
    if (r < translated) {
      out.source[l] = "s" + letters(src_names[l]);
      out.target[l] = "t" + letters(tgt_names[l]);
    } else if (r < translated + numerals) {
      out.source[l] = out.target[l] = std::to_string(numbers[r - translated]);
    } else {
      out.source[l] = out.target[l] = "w" + letters(src_names[l]);
    }
  }
  return out;
}

}  // namespace

SynthFiles generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  Rng rng(spec.seed);
  const std::size_t v = spec.vocab_size;
  const std::size_t c = spec.topic_clusters;

  std::vector<double> weight(v);
  for (std::size_t l = 0; l < v; ++l)
    weight[l] = std::pow(static_cast<double>(l + 1), -spec.zipf_s);

  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> members(c);
  std::vector<std::size_t> cluster_of(v);
  for (std::size_t l = 0; l < v; ++l) {
    cluster_of[l] = order[l] % c;
    members[cluster_of[l]].push_back(l);
  }

  std::discrete_distribution<std::size_t> global(weight.begin(), weight.end());
  std::vector<std::discrete_distribution<std::size_t>> in_cluster;
  std::vector<double> cluster_mass(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> w;
    for (auto l : members[k]) {
      w.push_back(weight[l]);
      cluster_mass[k] += weight[l];
    }
    in_cluster.emplace_back(w.begin(), w.end());
  }
  std::discrete_distribution<std::size_t> pick_cluster(cluster_mass.begin(), cluster_mass.end());

  std::vector<std::vector<std::size_t>> collocates(v);
  for (std::size_t l = 0; l < v; ++l) {
    const auto k = cluster_of[l];
    for (std::size_t i = 0; i < spec.collocates; ++i)
      collocates[l].push_back(members[k][in_cluster[k](rng)]);
  }

  const Surface surface = spell(spec, rng);

  SynthFiles files{out_dir / "src.txt", out_dir / "tgt.txt", out_dir / "gold.tsv"};
  std::ofstream src(files.source, std::ios::binary);
  std::ofstream tgt(files.target, std::ios::binary);
  std::ofstream gold(files.gold, std::ios::binary);
  if (!src || !tgt || !gold)
    throw std::runtime_error("synth: cannot write into " + out_dir.string());

  std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);
  std::uniform_int_distribution<std::size_t> pick_collocate(0, spec.collocates - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string sline, tline;
  for (std::size_t s = 0; s < spec.sentences; ++s) {
    const std::size_t k = pick_cluster(rng);
    const std::size_t n = length(rng);
    sline.clear();
    tline.clear();
    std::size_t prev = members[k][in_cluster[k](rng)];
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        const double r = u(rng);
        if (r < spec.collocation_prob)
          prev = collocates[prev][pick_collocate(rng)];
        else if (r < spec.collocation_prob + spec.topic_prob)
          prev = members[k][in_cluster[k](rng)];
        else
          prev = global(rng);
        sline += ' ';
        tline += ' ';
      }
      sline += surface.source[prev];
      tline += surface.target[prev];
    }
    sline += '\n';
    tline += '\n';
    src << sline;
    tgt << tline;
  }
  for (std::size_t l = 0; l < v; ++l)
    gold << surface.source[l] << '\t' << surface.target[l] << '\n';
  if (!src || !tgt || !gold) throw std::runtime_error("synth: write failed");
  return files;
}

std::size_t perturb(const std::filesystem::path& input,
                    const std::filesystem::path& output, double swap_fraction,
                    std::uint64_t seed) {
  if (!(swap_fraction >= 0.0 && swap_fraction < 1.0))
    throw std::invalid_argument("perturb: swap_fraction must be in [0, 1)");
  const Vocabulary vocab = build_vocab(input, static_cast<std::size_t>(-1));
  const NoiseTable unigram(vocab, 1.0);

  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot read " + input.string());
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + output.string());

  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t swapped = 0;
  std::string line, result;
  while (std::getline(in, line)) {
    result.clear();
    bool first = true;
    for_each_token(line, [&](std::string_view tok) {
      if (!first) result += ' ';
      first = false;
      if (swap_fraction > 0.0 && vocab.size() > 1 && u(rng) < swap_fraction) {
        const WordId self = *vocab.find(tok);
        WordId w;
        do {
          w = unigram.sample(rng);
        } while (w == self);
        result += vocab.word(w);
        ++swapped;
      } else {
        result += tok;
      }
    });
    result += '\n';
    out << result;
  }
  if (!out) throw std::runtime_error("write failed: " + output.string());
  return swapped;
}

}  // namespace anchorvec
