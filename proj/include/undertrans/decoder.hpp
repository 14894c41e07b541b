#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "undertrans/errors.hpp"
#include "undertrans/logmath.hpp"
#include "undertrans/scorer.hpp"
#include "undertrans/token.hpp"

namespace undertrans {

struct BeamConfig {
  int beam_size = 5;
  double alpha = 1.0;           // length-normalization exponent
  std::optional<int> max_len;   // unset: 4 * words + 2 * max(1, sentences)
  int min_len = 1;
  int expansion_factor = 2;     // candidates kept per step = factor * beam_size
  double temperature = 1.0;

  void validate() const;
  int resolve_max_len(std::span<const Token> source) const;
};

enum class PenaltyMode { None, Eos, Coverage };

std::string_view to_string(PenaltyMode mode);
PenaltyMode parse_penalty_mode(std::string_view s);

struct PenaltyConfig {
  PenaltyMode mode = PenaltyMode::None;
  double tau = 1.0;       // EOS margin threshold; -inf disables detection
  double beta = 0.4;      // EOS penalty scale
  int cap = 20;           // length cap on the EOS penalty weight
  double beta_cov = 0.1;  // coverage penalty scale

  void validate() const;
};

struct RiskAssessment {
  bool risky = false;
  double margin = 0.0;
};

/// Margin of EOS over its strongest competitor at the finalizing step.
/// A candidate is risky when the margin does not exceed tau.
RiskAssessment detect_risk(const LogProbs& step_logprobs, double tau);

/// beta * min(gen_len, cap).
double eos_penalty_weight(int gen_len, double beta, int cap);

/// beta_cov * sum_i ln(max(cov_i, 1e-6)).
double coverage_penalty(std::span<const double> coverage, double beta_cov);

struct FinalizedCandidate {
  Sequence tokens;                 // EOS excluded
  double raw_logprob = 0.0;        // includes the EOS step
  double eos_logprob = 0.0;
  double margin = 0.0;
  bool risky = false;
  double unpenalized_score = 0.0;  // raw_logprob / |Y|^alpha
  double normalized_score = 0.0;
  bool penalty_applied = false;
  std::vector<double> coverage;    // filled in coverage mode only
};

double finalize_score(const FinalizedCandidate& candidate, const BeamConfig& beam,
                      const PenaltyConfig& penalty);

/// Strict ordering used to pick the winner: higher score, then shorter, then
/// lexicographically smaller.
bool ranks_before(const FinalizedCandidate& a, const FinalizedCandidate& b);

struct DecodeRecord {
  std::int64_t id = 0;
  FinalizedCandidate best;
  std::vector<FinalizedCandidate> candidates;  // best first
  std::vector<double> eos_trace;               // EOS log-prob after each prefix of best
  bool penalty_applied = false;
};

/// Anything that can produce next-token distributions over a growing prefix.
template <typename S>
concept Scorer = requires(const S& scorer, const typename S::State& state, Token token,
                          std::span<const Token> output) {
  { scorer.initial() } -> std::convertible_to<typename S::State>;
  { scorer.next_logprobs(state) } -> std::convertible_to<LogProbs>;
  { scorer.advance(state, token) } -> std::convertible_to<typename S::State>;
  { scorer.coverage(output) } -> std::convertible_to<Eigen::VectorXd>;
};

/// Length-normalized beam search. Hypotheses that select EOS are scored and
/// (when at risk) penalized at the moment they are finalized.
template <Scorer S>
DecodeRecord beam_search(const S& scorer, std::span<const Token> source, const BeamConfig& beam,
                         const PenaltyConfig& penalty) {
  using State = typename S::State;
  beam.validate();
  penalty.validate();
  const int max_len = beam.resolve_max_len(source);
  const std::size_t width = static_cast<std::size_t>(beam.beam_size);
  const double length_scale = std::pow(static_cast<double>(max_len), beam.alpha);

  struct Live {
    Sequence tokens;
    double score;
    State state;
  };
  struct Expansion {
    std::size_t hyp;
    int outcome;
    double score;
  };

  auto step = [&](const State& s) {
    return apply_temperature<double>(scorer.next_logprobs(s), beam.temperature);
  };

  std::vector<FinalizedCandidate> finalized;
  auto finalize = [&](const Live& h, const LogProbs& lp) {
    FinalizedCandidate c;
    c.tokens = h.tokens;
    c.eos_logprob = lp(kEosIndex);
    c.raw_logprob = h.score + c.eos_logprob;
    const RiskAssessment risk = detect_risk(lp, penalty.tau);
    c.risky = risk.risky;
    c.margin = risk.margin;
    if (penalty.mode == PenaltyMode::Coverage) {
      const Eigen::VectorXd cov = scorer.coverage(c.tokens);
      c.coverage.assign(cov.data(), cov.data() + cov.size());
    }
    c.unpenalized_score =
        c.raw_logprob / std::pow(static_cast<double>(c.tokens.size()), beam.alpha);
    c.normalized_score = finalize_score(c, beam, penalty);
    c.penalty_applied = penalty.mode == PenaltyMode::Eos && c.risky && penalty.beta > 0;
    auto pos = std::upper_bound(finalized.begin(), finalized.end(), c, ranks_before);
    finalized.insert(pos, std::move(c));
    if (finalized.size() > width) finalized.pop_back();
  };

  auto settled = [&](const std::vector<Live>& live) {
    if (finalized.size() < width) return false;
    const double best = finalized.front().normalized_score;
    return std::all_of(live.begin(), live.end(),
                       [&](const Live& h) { return h.score / length_scale <= best; });
  };

  std::vector<Live> live;
  live.push_back({Sequence{}, 0.0, scorer.initial()});
  int len = 0;
  for (; len < max_len && !live.empty(); ++len) {
    std::vector<LogProbs> dists;
    std::vector<Expansion> expansions;
    dists.reserve(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      dists.push_back(step(live[h].state));
      for (int o = 0; o < kNumOutcomes; ++o) {
        if (o == kEosIndex && len < beam.min_len) continue;
        const double s = live[h].score + dists.back()(o);
        if (s == neg_inf<double>()) continue;
        expansions.push_back({h, o, s});
      }
    }
    const std::size_t keep =
        std::min(expansions.size(), static_cast<std::size_t>(beam.expansion_factor) * width);
    std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(),
                      [](const Expansion& a, const Expansion& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.hyp != b.hyp) return a.hyp < b.hyp;
                        return a.outcome < b.outcome;
                      });
    std::vector<Live> next;
    for (std::size_t rank = 0; rank < keep; ++rank) {
      const Expansion& e = expansions[rank];
      const Live& parent = live[e.hyp];
      if (e.outcome == kEosIndex) {
        if (rank < width) finalize(parent, dists[e.hyp]);
        continue;
      }
      const Token t = static_cast<Token>(e.outcome);
      Sequence tokens = parent.tokens;
      tokens.push_back(t);
      next.push_back({std::move(tokens), e.score, scorer.advance(parent.state, t)});
      if (next.size() == width) break;
    }
    live = std::move(next);
    if (settled(live)) {
      live.clear();
      break;
    }
  }
  // Length cap reached: close whatever is still open.
  if (len == max_len && max_len >= beam.min_len) {
    for (const Live& h : live) {
      const LogProbs lp = step(h.state);
      if (lp(kEosIndex) > neg_inf<double>()) finalize(h, lp);
    }
  }
  if (finalized.empty()) throw std::runtime_error("beam search finalized no candidate");

  DecodeRecord record;
  record.best = finalized.front();
  record.candidates = std::move(finalized);
  record.penalty_applied = record.best.penalty_applied;
  State s = scorer.initial();
  record.eos_trace.push_back(step(s)(kEosIndex));
  for (Token t : record.best.tokens) {
    s = scorer.advance(s, t);
    record.eos_trace.push_back(step(s)(kEosIndex));
  }
  return record;
}

}  // namespace undertrans
