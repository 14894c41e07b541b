#include "undertrans/channel.hpp"

#include <cmath>
#include <string>

#include "undertrans/errors.hpp"

namespace undertrans {
namespace {

constexpr double kRowTolerance = 1e-12;

Token draw_word(const TranslationMatrix& matrix, Token source, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (Token t : kWords) {
    acc += matrix(source, t);
    if (u < acc) return t;
  }
  // Rounding at the top of the row; fall back to the last word with mass.
  for (int k = kNumWords - 1; k >= 0; --k) {
    if (matrix(source, kWords[k]) > 0) return kWords[k];
  }
  return Token::C;
}

enum class Noise { Drop, Once, Twice };

Noise draw_noise(const NoiseSpec& noise, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  if (u < noise.p_drop()) return Noise::Drop;
  if (u < noise.p_drop() + noise.p_translate()) return Noise::Once;
  return Noise::Twice;
}

void translate_words(const ChannelSpec& spec, std::span<const Token> words, Rng& rng,
                     Sequence& out) {
  for (Token w : words) {
    switch (draw_noise(spec.noise, rng)) {
      case Noise::Drop: break;
      case Noise::Once: out.push_back(draw_word(spec.matrix, w, rng)); break;
      case Noise::Twice:
        out.push_back(draw_word(spec.matrix, w, rng));
        out.push_back(draw_word(spec.matrix, w, rng));
        break;
    }
  }
}

int draw_in(IntRange r, Rng& rng) { return std::uniform_int_distribution<int>(r.lo, r.hi)(rng); }

void check_range(IntRange r, const char* name) {
  if (r.lo < 1 || r.hi < r.lo) {
    throw ValidationError(std::string(name) + " must be a non-empty range with lower bound >= 1");
  }
}

}  // namespace

TranslationMatrix::TranslationMatrix() {
  probs_ << 0.8, 0.1, 0.1,
            0.2, 0.6, 0.2,
            0.3, 0.3, 0.4;
}

TranslationMatrix::TranslationMatrix(const Matrix& probs) : probs_(probs) {
  if ((probs_.array() < 0.0).any() || !probs_.allFinite()) {
    throw ValidationError("translation probabilities must be finite and non-negative");
  }
  for (int r = 0; r < kNumWords; ++r) {
    if (std::abs(probs_.row(r).sum() - 1.0) > kRowTolerance) {
      throw ValidationError("translation matrix row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

TranslationMatrix TranslationMatrix::identity() { return TranslationMatrix(Matrix::Identity()); }

void NoiseSpec::validate() const {
  if (!(p_distort >= 0.0 && p_distort < 1.0)) {
    throw ValidationError("p_distort must lie in [0, 1)");
  }
}

ChannelSpec ChannelSpec::defaults(Level level) {
  ChannelSpec spec;
  spec.level = level;
  return spec;
}

void ChannelSpec::validate() const {
  noise.validate();
  check_range(sentence_len, "sentence_len_range");
  check_range(sentences_per_doc, "sentences_per_doc_range");
}

double word_entropy(const TranslationMatrix& matrix, Token word) {
  if (!is_word(word)) throw std::domain_error("entropy is defined for A, B and C only");
  double h = 0.0;
  for (Token t : kWords) {
    const double p = matrix(word, t);
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

Rng pair_stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

Sequence sample_source(const ChannelSpec& spec, Rng& rng) {
  std::uniform_int_distribution<int> word(0, kNumWords - 1);
  Sequence source;
  const int sentences = spec.level == Level::Document ? draw_in(spec.sentences_per_doc, rng) : 1;
  for (int s = 0; s < sentences; ++s) {
    const int len = draw_in(spec.sentence_len, rng);
    for (int i = 0; i < len; ++i) source.push_back(kWords[word(rng)]);
    if (spec.level == Level::Document) source.push_back(Token::Period);
  }
  return source;
}

Sequence sample_target(const ChannelSpec& spec, std::span<const Token> source, Rng& rng) {
  validate_source(source, spec.level);
  Sequence target;
  if (spec.level == Level::Sentence) {
    translate_words(spec, source, rng, target);
    return target;
  }
  for (auto sentence : split_sentences(source)) {
    const Noise n = draw_noise(spec.noise, rng);
    const int copies = n == Noise::Drop ? 0 : n == Noise::Once ? 1 : 2;
    for (int c = 0; c < copies; ++c) {
      translate_words(spec, sentence, rng, target);
      target.push_back(Token::Period);
    }
  }
  return target;
}

Pair sample_pair(const ChannelSpec& spec, Rng& rng) {
  Pair pair;
  pair.level = spec.level;
  pair.source = sample_source(spec, rng);
  pair.target = sample_target(spec, pair.source, rng);
  return pair;
}

std::vector<Pair> generate_corpus(const ChannelSpec& spec, std::size_t n, CorpusMode mode,
                                  std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ValidationError("corpus size must be at least 1");
  std::vector<Pair> corpus;
  corpus.reserve(n);
  for (std::size_t id = 0; id < n; ++id) {
    Rng rng = pair_stream(seed, id);
    Pair pair;
    pair.id = static_cast<std::int64_t>(id);
    pair.level = spec.level;
    pair.source = sample_source(spec, rng);
    pair.target = mode == CorpusMode::Test ? pair.source : sample_target(spec, pair.source, rng);
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace undertrans
