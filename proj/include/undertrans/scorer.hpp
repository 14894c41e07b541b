#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "undertrans/automaton.hpp"
#include "undertrans/logmath.hpp"

namespace undertrans {

/// Log-probabilities over A, B, C, PERIOD and EOS (slot kEosIndex).
template <typename Scalar>
using BasicLogProbs = Eigen::Array<Scalar, kNumOutcomes, 1>;
using LogProbs = BasicLogProbs<double>;

/// Forward DP state after emitting a prefix.
///
/// `forward` is the mass arriving at each state with the last emission,
/// rescaled to sum to 1; the actual prefix probability is carried separately
/// in `log_prefix` so long prefixes do not underflow.
template <typename Scalar>
struct BasicScorerState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector forward;
  Vector closure;  // forward pushed through epsilon arcs
  Scalar log_prefix = 0;
  int length = 0;

  bool reachable() const { return log_prefix > neg_inf<Scalar>(); }
  Scalar prefix_probability() const { return std::exp(log_prefix); }
};

using ScorerState = BasicScorerState<double>;

template <typename Scalar>
BasicScorerState<Scalar> init_state(const BasicEmissionAutomaton<Scalar>& automaton) {
  BasicScorerState<Scalar> state;
  state.forward = BasicScorerState<Scalar>::Vector::Unit(automaton.num_states(), automaton.start());
  state.closure = automaton.close(state.forward);
  return state;
}

template <typename Scalar>
BasicLogProbs<Scalar> next_logprobs(const BasicEmissionAutomaton<Scalar>& automaton,
                                    const BasicScorerState<Scalar>& state) {
  if (!state.reachable()) throw DeadPrefixError("next_logprobs on a zero-probability prefix");
  BasicLogProbs<Scalar> out;
  const auto mass = (automaton.emission_mass().transpose() * state.closure).eval();
  for (int t = 0; t < kNumTokens; ++t) out(t) = safe_log(mass(t));
  out(kEosIndex) = safe_log(automaton.stop().dot(state.closure));
  return out;
}

/// Extends the prefix by `token`. A zero-probability extension yields an
/// unreachable state; advancing an unreachable state throws.
template <typename Scalar>
BasicScorerState<Scalar> advance(const BasicEmissionAutomaton<Scalar>& automaton,
                                 const BasicScorerState<Scalar>& state, Token token) {
  if (!state.reachable()) throw DeadPrefixError("advance on a zero-probability prefix");
  BasicScorerState<Scalar> next;
  next.length = state.length + 1;
  next.forward = automaton.emission(token) * state.closure;
  const Scalar mass = next.forward.sum();
  if (!(mass > Scalar(0))) {
    next.forward.setZero();
    next.closure = next.forward;
    next.log_prefix = neg_inf<Scalar>();
    return next;
  }
  next.forward /= mass;
  next.closure = automaton.close(next.forward);
  next.log_prefix = state.log_prefix + std::log(mass);
  return next;
}

/// ln P(output, then EOS | source); -inf for impossible outputs.
template <typename Scalar>
Scalar sequence_logprob(const BasicEmissionAutomaton<Scalar>& automaton,
                        std::span<const Token> output) {
  auto state = init_state(automaton);
  Scalar total = 0;
  for (Token t : output) {
    const auto lp = next_logprobs(automaton, state);
    if (lp(index(t)) == neg_inf<Scalar>()) return neg_inf<Scalar>();
    total += lp(index(t));
    state = advance(automaton, state, t);
  }
  return total + next_logprobs(automaton, state)(kEosIndex);
}

namespace detail {

// Forward pass where emissions leaving states with `keep == 0` are removed.
template <typename Scalar>
Scalar masked_logprob(const BasicEmissionAutomaton<Scalar>& automaton,
                      std::span<const Token> output,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& keep) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector closure = automaton.close(Vector::Unit(automaton.num_states(), automaton.start()));
  Scalar log_mass = 0;
  for (Token t : output) {
    Vector forward = automaton.emission(t) * closure.cwiseProduct(keep);
    const Scalar mass = forward.sum();
    if (!(mass > Scalar(0))) return neg_inf<Scalar>();
    log_mass += std::log(mass);
    closure = automaton.close(forward / mass);
  }
  return log_mass + safe_log(automaton.stop().dot(closure));
}

}  // namespace detail

/// Posterior probability, given the complete output, that each source word
/// emitted at least one token (in any copy of its sentence).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> alignment_coverage(
    const BasicEmissionAutomaton<Scalar>& automaton, std::span<const Token> output) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar total = sequence_logprob(automaton, output);
  if (total == neg_inf<Scalar>()) {
    throw ValidationError("alignment_coverage: output is impossible under this source");
  }
  const auto owner = automaton.emitting_word();
  Vector coverage(automaton.word_count());
  for (int w = 0; w < automaton.word_count(); ++w) {
    Vector keep(automaton.num_states());
    for (Eigen::Index s = 0; s < keep.size(); ++s) keep(s) = owner[s] == w ? Scalar(0) : Scalar(1);
    const Scalar silent = detail::masked_logprob(automaton, output, keep);
    const Scalar p = Scalar(1) - std::exp(silent - total);
    coverage(w) = std::clamp(p, Scalar(0), Scalar(1));
  }
  return coverage;
}

/// q_v proportional to p_v^(1/T), renormalized.
template <typename Scalar>
BasicLogProbs<Scalar> apply_temperature(const BasicLogProbs<Scalar>& logprobs, Scalar temperature) {
  if (!(temperature > Scalar(0))) throw std::domain_error("temperature must be positive");
  if (temperature == Scalar(1)) return logprobs;
  BasicLogProbs<Scalar> scaled = logprobs / temperature;
  return scaled - logsumexp(scaled);
}

/// Scorer backed by the exact channel posterior for one source.
class ExactScorer {
 public:
  using State = ScorerState;

  explicit ExactScorer(EmissionAutomaton automaton)
      : automaton_(std::make_shared<const EmissionAutomaton>(std::move(automaton))) {}
  ExactScorer(const ChannelSpec& spec, std::span<const Token> source)
      : ExactScorer(compile<double>(spec, source)) {}

  State initial() const { return init_state(*automaton_); }
  LogProbs next_logprobs(const State& s) const { return undertrans::next_logprobs(*automaton_, s); }
  State advance(const State& s, Token t) const { return undertrans::advance(*automaton_, s, t); }
  Eigen::VectorXd coverage(std::span<const Token> output) const {
    return alignment_coverage(*automaton_, output);
  }

  const EmissionAutomaton& automaton() const { return *automaton_; }

 private:
  std::shared_ptr<const EmissionAutomaton> automaton_;
};

}  // namespace undertrans
