#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "undertrans/automaton.hpp"
#include "undertrans/channel.hpp"

namespace undertrans {

// Brute-force oracles over the generative process. None of these read the
// automaton's transition structure; they rebuild output distributions
// directly from the channel definition.

struct EnumerationLimits {
  std::size_t max_source_tokens = 6;
  std::size_t max_outputs = 1'000'000;  // bound on the distinct-output estimate
};

using OutputDistribution = std::map<Sequence, double>;

/// Outcomes of translating one word: drop, one token, or two independent tokens.
OutputDistribution word_outcomes(const ChannelSpec& spec, Token word);

/// Distribution of one sentence copy (no PERIOD), by concatenating word outcomes.
OutputDistribution copy_outcomes(const ChannelSpec& spec, std::span<const Token> words,
                                 std::size_t max_len = static_cast<std::size_t>(-1));

/// Document-level sentence: dropped, translated once, or twice, each copy
/// terminated by PERIOD.
OutputDistribution sentence_outcomes(const ChannelSpec& spec, std::span<const Token> words,
                                     std::size_t max_len = static_cast<std::size_t>(-1));

/// Complete output distribution for the source, truncated to outputs of
/// length <= max_len. Throws std::length_error past the limits.
OutputDistribution enumerate_channel(const ChannelSpec& spec, std::span<const Token> source,
                                     std::size_t max_len, const EnumerationLimits& limits = {});

/// enumerate_channel for the automaton's (spec, source), listed by
/// decreasing probability (ties in token order).
std::vector<std::pair<Sequence, double>> enumerate_outputs(const EmissionAutomaton& automaton,
                                                           std::size_t max_len,
                                                           const EnumerationLimits& limits = {});

/// Upper bound on the number of distinct complete outputs.
double estimated_output_count(const ChannelSpec& spec, std::span<const Token> source);

/// Largest output length the channel can produce for the source.
std::size_t max_emission_length(const ChannelSpec& spec, std::span<const Token> source);

/// Exact output and prefix probabilities by summing over segmentations of
/// the output into independently enumerated segments (words at sentence
/// level, sentences at document level). Scales to sources whose full output
/// set is too large to list.
class SegmentOracle {
 public:
  SegmentOracle(const ChannelSpec& spec, std::span<const Token> source);

  double probability(std::span<const Token> output) const;
  double prefix_probability(std::span<const Token> prefix) const;
  /// Product of enumerated segment masses; 1 for a correct enumeration.
  double total_mass() const;
  std::size_t segment_count() const { return tries_.size(); }

 private:
  struct Node {
    std::array<int, kNumTokens> child{-1, -1, -1, -1};
    double end = 0.0;      // probability the segment output is exactly this path
    double subtree = 0.0;  // probability the segment output starts with this path
  };
  using Trie = std::vector<Node>;

  static Trie build(const OutputDistribution& dist);
  double walk(std::span<const Token> y, bool prefix_mode) const;

  std::vector<Trie> tries_;
};

}  // namespace undertrans
