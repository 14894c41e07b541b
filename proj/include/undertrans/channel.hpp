#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "undertrans/token.hpp"

namespace undertrans {

/// Row-stochastic map from a source word to a distribution over target words.
class TranslationMatrix {
 public:
  using Matrix = Eigen::Matrix<double, kNumWords, kNumWords, Eigen::RowMajor>;

  /// A -> (.8,.1,.1), B -> (.2,.6,.2), C -> (.3,.3,.4).
  TranslationMatrix();
  explicit TranslationMatrix(const Matrix& probs);

  static TranslationMatrix identity();

  double operator()(Token source, Token target) const {
    return probs_(index(source), index(target));
  }
  auto row(Token source) const { return probs_.row(index(source)); }
  const Matrix& probabilities() const { return probs_; }

 private:
  Matrix probs_;
};

/// Distortion applied to each word (and, at document level, each sentence):
/// drop and duplicate share p_distort equally.
struct NoiseSpec {
  double p_distort = 0.15;

  double p_drop() const { return p_distort / 2; }
  double p_dup() const { return p_distort / 2; }
  double p_translate() const { return 1.0 - p_distort; }
  void validate() const;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct ChannelSpec {
  Level level = Level::Sentence;
  TranslationMatrix matrix;
  NoiseSpec noise;
  IntRange sentence_len{1, 20};
  IntRange sentences_per_doc{1, 5};

  static ChannelSpec defaults(Level level = Level::Sentence);
  void validate() const;
};

struct Pair {
  std::int64_t id = 0;
  Level level = Level::Sentence;
  Sequence source;
  Sequence target;
};

enum class CorpusMode { Train, Test };

/// Entropy of a source word's translation distribution, in nats.
double word_entropy(const TranslationMatrix& matrix, Token word);

using Rng = std::mt19937_64;

/// Independent random stream for one pair id, so corpora do not depend on
/// generation order.
Rng pair_stream(std::uint64_t seed, std::uint64_t id);

Sequence sample_source(const ChannelSpec& spec, Rng& rng);

/// Runs the generative channel on `source` (which must be valid for spec.level).
Sequence sample_target(const ChannelSpec& spec, std::span<const Token> source, Rng& rng);

Pair sample_pair(const ChannelSpec& spec, Rng& rng);

std::vector<Pair> generate_corpus(const ChannelSpec& spec, std::size_t n, CorpusMode mode,
                                  std::uint64_t seed);

}  // namespace undertrans
