#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "undertrans/channel.hpp"
#include "undertrans/errors.hpp"
#include "undertrans/token.hpp"

namespace undertrans {

/// Acyclic weighted automaton whose complete emissions are distributed exactly
/// like the channel's output for one source.
///
/// States are numbered in topological order; every arc goes from a lower to a
/// higher index. A word occupies a pair of states: `q` (word not yet started)
/// and `p` (first half of a duplicate emitted, second pending). At document
/// level each sentence owns an entry state and two copy blocks; the single
/// copy and the second copy of a duplicated sentence share one block, since
/// their futures are identical.
template <typename Scalar>
class BasicEmissionAutomaton {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using SparseMatrix = Eigen::SparseMatrix<Scalar>;
  using MassMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, kNumTokens>;

  struct Arc {
    int from = 0;
    int to = 0;
    std::optional<Token> label;  // nullopt for epsilon
    Scalar prob = 0;
  };

  Eigen::Index num_states() const { return stop_.size(); }
  int start() const { return 0; }
  int accept() const { return static_cast<int>(num_states()) - 1; }

  const std::vector<Arc>& arcs() const { return arcs_; }
  /// I - E^T where E holds epsilon arcs; lower triangular.
  const SparseMatrix& closure_system() const { return closure_system_; }
  /// Emission operator for one token: (destination x origin).
  const SparseMatrix& emission(Token t) const { return emission_[index(t)]; }
  /// Total outgoing probability per (state, token).
  const MassMatrix& emission_mass() const { return emission_mass_; }
  /// Probability of terminating at each state (1 at the accept state).
  const Vector& stop() const { return stop_; }
  /// Source word index whose emissions leave each state, or -1.
  std::span<const int> emitting_word() const { return emitting_word_; }

  const ChannelSpec& spec() const { return spec_; }
  const Sequence& source() const { return source_; }
  int word_count() const { return word_count_; }
  int sentence_count() const { return sentence_count_; }

  Vector close(const Vector& forward) const {
    return closure_system_.template triangularView<Eigen::Lower>().solve(forward);
  }

  template <typename S>
  friend BasicEmissionAutomaton<S> compile(const ChannelSpec& spec, std::span<const Token> source);

 private:
  BasicEmissionAutomaton(ChannelSpec spec, Sequence source) : spec_(std::move(spec)), source_(std::move(source)) {}

  int add_state(int word) {
    emitting_word_.push_back(word);
    return static_cast<int>(emitting_word_.size()) - 1;
  }
  void add_arc(int from, int to, std::optional<Token> label, Scalar prob) {
    if (prob > Scalar(0)) arcs_.push_back({from, to, label, prob});
  }
  // Adds q_0 p_0 q_1 ... q_k for `words`, returning the index of q_0.
  int add_words(std::span<const Token> words, int first_word);
  void finish();

  ChannelSpec spec_;
  Sequence source_;
  int word_count_ = 0;
  int sentence_count_ = 0;
  std::vector<Arc> arcs_;
  std::vector<int> emitting_word_;
  SparseMatrix closure_system_;
  std::array<SparseMatrix, kNumTokens> emission_;
  MassMatrix emission_mass_;
  Vector stop_;
};

using EmissionAutomaton = BasicEmissionAutomaton<double>;

template <typename Scalar>
int BasicEmissionAutomaton<Scalar>::add_words(std::span<const Token> words, int first_word) {
  const NoiseSpec& noise = spec_.noise;
  const int k = static_cast<int>(words.size());
  const int base = static_cast<int>(emitting_word_.size());
  for (int i = 0; i < k; ++i) {
    add_state(first_word + i);  // q_i
    add_state(first_word + i);  // p_i
  }
  add_state(-1);  // q_k
  for (int i = 0; i < k; ++i) {
    const int q = base + 2 * i;
    const int p = q + 1;
    const int next = q + 2;
    add_arc(q, next, std::nullopt, Scalar(noise.p_drop()));
    for (Token t : kWords) {
      const Scalar m = Scalar(spec_.matrix(words[i], t));
      add_arc(q, next, t, Scalar(noise.p_translate()) * m);
      add_arc(q, p, t, Scalar(noise.p_dup()) * m);
      add_arc(p, next, t, m);
    }
  }
  return base;
}

template <typename Scalar>
void BasicEmissionAutomaton<Scalar>::finish() {
  const Eigen::Index n = static_cast<Eigen::Index>(emitting_word_.size());
  std::vector<Eigen::Triplet<Scalar>> eps;
  std::array<std::vector<Eigen::Triplet<Scalar>>, kNumTokens> emit;
  emission_mass_ = MassMatrix::Zero(n, kNumTokens);
  for (Eigen::Index s = 0; s < n; ++s) eps.emplace_back(s, s, Scalar(1));
  for (const Arc& a : arcs_) {
    if (a.label) {
      emit[index(*a.label)].emplace_back(a.to, a.from, a.prob);
      emission_mass_(a.from, index(*a.label)) += a.prob;
    } else {
      eps.emplace_back(a.to, a.from, -a.prob);
    }
  }
  closure_system_.resize(n, n);
  closure_system_.setFromTriplets(eps.begin(), eps.end());
  for (int t = 0; t < kNumTokens; ++t) {
    emission_[t].resize(n, n);
    emission_[t].setFromTriplets(emit[t].begin(), emit[t].end());
  }
  stop_ = Vector::Zero(n);
  stop_(n - 1) = Scalar(1);
}

/// Builds the emission automaton for `source` under `spec`.
/// Throws ValidationError when the source is malformed for the spec's level.
template <typename Scalar = double>
BasicEmissionAutomaton<Scalar> compile(const ChannelSpec& spec, std::span<const Token> source) {
  spec.validate();
  validate_source(source, spec.level);
  BasicEmissionAutomaton<Scalar> a(spec, Sequence(source.begin(), source.end()));
  a.word_count_ = static_cast<int>(count_words(source));
  if (spec.level == Level::Sentence) {
    a.sentence_count_ = 0;
    a.add_words(source, 0);
  } else {
    const auto sentences = split_sentences(source);
    a.sentence_count_ = static_cast<int>(sentences.size());
    const NoiseSpec& noise = spec.noise;
    int first_word = 0;
    int entry = a.add_state(-1);
    for (auto words : sentences) {
      const int k = static_cast<int>(words.size());
      const int first_of_two = a.add_words(words, first_word);
      const int last_copy = a.add_words(words, first_word);  // only copy, or second of two
      const int next = a.add_state(-1);
      a.add_arc(entry, next, std::nullopt, Scalar(noise.p_drop()));
      a.add_arc(entry, last_copy, std::nullopt, Scalar(noise.p_translate()));
      a.add_arc(entry, first_of_two, std::nullopt, Scalar(noise.p_dup()));
      a.add_arc(first_of_two + 2 * k, last_copy, Token::Period, Scalar(1));
      a.add_arc(last_copy + 2 * k, next, Token::Period, Scalar(1));
      first_word += k;
      entry = next;
    }
  }
  a.finish();
  return a;
}

}  // namespace undertrans
