#include "undertrans/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace undertrans {
namespace {

OutputDistribution concat(const OutputDistribution& a, const OutputDistribution& b,
                          std::size_t max_len) {
  OutputDistribution out;
  for (const auto& [x, px] : a) {
    for (const auto& [y, py] : b) {
      if (x.size() + y.size() > max_len) continue;
      Sequence xy = x;
      xy.insert(xy.end(), y.begin(), y.end());
      out[std::move(xy)] += px * py;
    }
  }
  return out;
}

void add_scaled(OutputDistribution& into, const OutputDistribution& from, double scale) {
  if (scale == 0) return;
  for (const auto& [y, p] : from) into[y] += scale * p;
}

double geometric_count(std::size_t max_len) {
  double total = 0, term = 1;
  for (std::size_t l = 0; l <= max_len; ++l, term *= kNumWords) total += term;
  return total;
}

}  // namespace

OutputDistribution word_outcomes(const ChannelSpec& spec, Token word) {
  OutputDistribution out;
  const NoiseSpec& noise = spec.noise;
  if (noise.p_drop() > 0) out[{}] += noise.p_drop();
  for (Token t1 : kWords) {
    const double p1 = spec.matrix(word, t1);
    if (p1 == 0) continue;
    if (noise.p_translate() > 0) out[{t1}] += noise.p_translate() * p1;
    for (Token t2 : kWords) {
      const double p2 = spec.matrix(word, t2);
      if (p2 > 0 && noise.p_dup() > 0) out[{t1, t2}] += noise.p_dup() * p1 * p2;
    }
  }
  return out;
}

OutputDistribution copy_outcomes(const ChannelSpec& spec, std::span<const Token> words,
                                 std::size_t max_len) {
  OutputDistribution dist{{Sequence{}, 1.0}};
  for (Token w : words) dist = concat(dist, word_outcomes(spec, w), max_len);
  return dist;
}

OutputDistribution sentence_outcomes(const ChannelSpec& spec, std::span<const Token> words,
                                     std::size_t max_len) {
  const NoiseSpec& noise = spec.noise;
  if (max_len == 0) {
    return noise.p_drop() > 0 ? OutputDistribution{{Sequence{}, noise.p_drop()}}
                              : OutputDistribution{};
  }
  const OutputDistribution period{{Sequence{Token::Period}, 1.0}};
  const OutputDistribution copy = concat(copy_outcomes(spec, words, max_len - 1), period, max_len);
  OutputDistribution out;
  if (noise.p_drop() > 0) out[{}] += noise.p_drop();
  add_scaled(out, copy, noise.p_translate());
  if (noise.p_dup() > 0) add_scaled(out, concat(copy, copy, max_len), noise.p_dup());
  return out;
}

double estimated_output_count(const ChannelSpec& spec, std::span<const Token> source) {
  if (spec.level == Level::Sentence) return geometric_count(2 * source.size());
  double total = 1;
  for (auto words : split_sentences(source)) {
    const double c = geometric_count(2 * words.size());
    total *= 1 + c + c * c;
  }
  return total;
}

std::size_t max_emission_length(const ChannelSpec& spec, std::span<const Token> source) {
  if (spec.level == Level::Sentence) return 2 * source.size();
  return 4 * count_words(source) + 2 * count_periods(source);
}

OutputDistribution enumerate_channel(const ChannelSpec& spec, std::span<const Token> source,
                                     std::size_t max_len, const EnumerationLimits& limits) {
  validate_source(source, spec.level);
  if (source.size() > limits.max_source_tokens) {
    throw std::length_error("enumeration refused: source has " + std::to_string(source.size()) +
                            " tokens, limit is " + std::to_string(limits.max_source_tokens));
  }
  if (estimated_output_count(spec, source) > static_cast<double>(limits.max_outputs)) {
    throw std::length_error("enumeration refused: too many distinct outputs for " +
                            to_compact(source));
  }
  if (spec.level == Level::Sentence) return copy_outcomes(spec, source, max_len);
  OutputDistribution dist{{Sequence{}, 1.0}};
  for (auto words : split_sentences(source)) {
    dist = concat(dist, sentence_outcomes(spec, words, max_len), max_len);
  }
  return dist;
}

std::vector<std::pair<Sequence, double>> enumerate_outputs(const EmissionAutomaton& automaton,
                                                           std::size_t max_len,
                                                           const EnumerationLimits& limits) {
  const OutputDistribution dist =
      enumerate_channel(automaton.spec(), automaton.source(), max_len, limits);
  std::vector<std::pair<Sequence, double>> out(dist.begin(), dist.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

SegmentOracle::SegmentOracle(const ChannelSpec& spec, std::span<const Token> source) {
  validate_source(source, spec.level);
  if (spec.level == Level::Sentence) {
    for (Token w : source) tries_.push_back(build(word_outcomes(spec, w)));
  } else {
    for (auto words : split_sentences(source)) tries_.push_back(build(sentence_outcomes(spec, words)));
  }
}

SegmentOracle::Trie SegmentOracle::build(const OutputDistribution& dist) {
  Trie trie(1);
  for (const auto& [y, p] : dist) {
    int node = 0;
    trie[0].subtree += p;
    for (Token t : y) {
      int next = trie[node].child[index(t)];
      if (next < 0) {
        next = static_cast<int>(trie.size());
        trie[node].child[index(t)] = next;
        trie.emplace_back();
      }
      node = next;
      trie[node].subtree += p;
    }
    trie[node].end += p;
  }
  return trie;
}

double SegmentOracle::walk(std::span<const Token> y, bool prefix_mode) const {
  const std::size_t m = tries_.size();
  const std::size_t n = y.size();
  // value[j][off]: probability that segments j.. produce y[off:] exactly
  // (or, in prefix mode, an output starting with y[off:]).
  std::vector<std::vector<double>> value(m + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t off = 0; off <= n; ++off) value[m][off] = off == n ? 1.0 : 0.0;
  if (prefix_mode) {
    for (std::size_t j = 0; j <= m; ++j) value[j][n] = 1.0;
  }
  for (std::size_t j = m; j-- > 0;) {
    const Trie& trie = tries_[j];
    for (std::size_t off = n + 1; off-- > 0;) {
      if (prefix_mode && off == n) continue;
      double total = 0;
      int node = 0;
      std::size_t pos = off;
      while (true) {
        total += trie[node].end * value[j + 1][pos];
        if (pos == n) {
          if (prefix_mode) total += trie[node].subtree - trie[node].end;
          break;
        }
        node = trie[node].child[index(y[pos])];
        if (node < 0) break;
        ++pos;
      }
      value[j][off] = total;
    }
  }
  return value[0][0];
}

double SegmentOracle::probability(std::span<const Token> output) const { return walk(output, false); }

double SegmentOracle::prefix_probability(std::span<const Token> prefix) const {
  return walk(prefix, true);
}

double SegmentOracle::total_mass() const {
  double mass = 1;
  for (const Trie& t : tries_) mass *= t[0].subtree;
  return mass;
}

}  // namespace undertrans
