#include "undertrans/decoder.hpp"

#include <limits>
#include <string>

namespace undertrans {

std::string_view to_string(PenaltyMode mode) {
  switch (mode) {
    case PenaltyMode::None: return "none";
    case PenaltyMode::Eos: return "eos";
    case PenaltyMode::Coverage: return "coverage";
  }
  return "?";
}

PenaltyMode parse_penalty_mode(std::string_view s) {
  if (s == "none") return PenaltyMode::None;
  if (s == "eos") return PenaltyMode::Eos;
  if (s == "coverage") return PenaltyMode::Coverage;
  throw ConfigError("unknown penalty mode '" + std::string(s) + "'");
}

void BeamConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam_size must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
  if (min_len < 1) throw ConfigError("min_len must be >= 1");
  if (max_len && *max_len < min_len) {
    throw ConfigError("max_len must be >= min_len (got " + std::to_string(*max_len) + ")");
  }
  if (expansion_factor < 1) throw ConfigError("expansion_factor must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be finite and positive");
  }
}

int BeamConfig::resolve_max_len(std::span<const Token> source) const {
  if (max_len) return *max_len;
  const int sentences = static_cast<int>(count_periods(source));
  return 4 * static_cast<int>(count_words(source)) + 2 * std::max(1, sentences);
}

void PenaltyConfig::validate() const {
  if (std::isnan(tau) || tau == std::numeric_limits<double>::infinity()) {
    throw ConfigError("tau must be finite or -inf");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (cap < 1) throw ConfigError("cap must be >= 1");
  if (!(beta_cov >= 0.0) || !std::isfinite(beta_cov)) {
    throw ConfigError("beta_cov must be finite and >= 0");
  }
}

RiskAssessment detect_risk(const LogProbs& step_logprobs, double tau) {
  if (!(step_logprobs > neg_inf<double>()).any()) {
    throw std::invalid_argument("detect_risk: empty distribution");
  }
  const double competitor = step_logprobs.head<kNumTokens>().maxCoeff();
  const double eos = step_logprobs(kEosIndex);
  RiskAssessment r;
  if (eos == neg_inf<double>()) {
    r.margin = neg_inf<double>();
  } else if (competitor == neg_inf<double>()) {
    r.margin = std::numeric_limits<double>::infinity();
  } else {
    r.margin = eos - competitor;
  }
  r.risky = r.margin <= tau;
  return r;
}

double eos_penalty_weight(int gen_len, double beta, int cap) {
  return beta * static_cast<double>(std::min(gen_len, cap));
}

double coverage_penalty(std::span<const double> coverage, double beta_cov) {
  double total = 0.0;
  for (double c : coverage) total += std::log(std::max(c, 1e-6));
  return beta_cov * total;
}

double finalize_score(const FinalizedCandidate& candidate, const BeamConfig& beam,
                      const PenaltyConfig& penalty) {
  const int len = static_cast<int>(candidate.tokens.size());
  if (len == 0) throw std::invalid_argument("finalize_score: empty output");
  const double norm = std::pow(static_cast<double>(len), beam.alpha);
  switch (penalty.mode) {
    case PenaltyMode::None: return candidate.raw_logprob / norm;
    case PenaltyMode::Eos:
      if (!candidate.risky) return candidate.raw_logprob / norm;
      return (candidate.raw_logprob +
              eos_penalty_weight(len, penalty.beta, penalty.cap) * candidate.eos_logprob) /
             norm;
    case PenaltyMode::Coverage:
      return candidate.raw_logprob / norm + coverage_penalty(candidate.coverage, penalty.beta_cov);
  }
  return candidate.raw_logprob / norm;
}

bool ranks_before(const FinalizedCandidate& a, const FinalizedCandidate& b) {
  if (a.normalized_score != b.normalized_score) return a.normalized_score > b.normalized_score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace undertrans
