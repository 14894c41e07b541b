#include "undertrans/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "undertrans/automaton.hpp"
#include "undertrans/decoder.hpp"
#include "undertrans/diagnostics.hpp"
#include "undertrans/enumerate.hpp"
#include "undertrans/scorer.hpp"

namespace undertrans {
namespace {

std::vector<Sequence> word_strings(std::size_t len) {
  std::vector<Sequence> out{Sequence{}};
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<Sequence> next;
    for (const Sequence& s : out) {
      for (Token w : kWords) {
        Sequence t = s;
        t.push_back(w);
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<Sequence> small_sentence_sources(std::size_t max_words) {
  std::vector<Sequence> out;
  for (std::size_t n = 0; n <= max_words; ++n) {
    for (Sequence& s : word_strings(n)) out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sequence> small_documents() {
  std::vector<Sequence> sentences;
  for (std::size_t n = 1; n <= 2; ++n) {
    for (Sequence s : word_strings(n)) {
      s.push_back(Token::Period);
      sentences.push_back(std::move(s));
    }
  }
  std::vector<Sequence> docs{Sequence{}};
  for (const Sequence& s : sentences) docs.push_back(s);
  for (const Sequence& s : sentences) {
    for (const Sequence& t : sentences) {
      Sequence d = s;
      d.insert(d.end(), t.begin(), t.end());
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

// Tracks agreement between a DP log-probability and an oracle probability.
struct Tally {
  explicit Tally(double t) : tol(t) {}
  double tol;
  std::size_t checks = 0;
  double worst = 0.0;
  std::string first_failure;

  void log_vs_prob(double dp_log, double oracle_p, const std::string& what) {
    ++checks;
    double dev;
    if (oracle_p <= 0.0) {
      dev = dp_log == neg_inf<double>() ? 0.0 : INFINITY;
    } else if (dp_log == neg_inf<double>()) {
      dev = INFINITY;
    } else {
      dev = std::abs(dp_log - std::log(oracle_p));
    }
    worst = std::max(worst, dev);
    if (!(dev <= tol) && first_failure.empty()) first_failure = what;
  }
  void value(double got, double want, const std::string& what) {
    ++checks;
    const double dev = std::abs(got - want);
    worst = std::max(worst, dev);
    if (!(dev <= tol) && first_failure.empty()) first_failure = what;
  }
  bool ok() const { return first_failure.empty(); }
};

std::string describe(const Tally& t) {
  std::ostringstream os;
  os << t.checks << " checks, worst deviation " << t.worst;
  if (!t.ok()) os << ", first failure: " << t.first_failure;
  return os.str();
}

void check_sentence_source(const ChannelSpec& spec, const Sequence& src, Tally& tally) {
  const auto a = compile(spec, src);
  const OutputDistribution dist = enumerate_channel(spec, src, max_emission_length(spec, src));
  double mass = 0;
  std::map<Sequence, double> prefix_mass;
  for (const auto& [y, p] : dist) {
    mass += p;
    for (std::size_t k = 0; k <= y.size(); ++k) prefix_mass[Sequence(y.begin(), y.begin() + k)] += p;
    tally.log_vs_prob(sequence_logprob(a, y), p, "P(" + to_compact(y) + " | " + to_compact(src) + ")");
  }
  tally.value(mass, 1.0, "mass of " + to_compact(src));

  std::function<void(const Sequence&, const ScorerState&)> visit = [&](const Sequence& prefix,
                                                                       const ScorerState& s) {
    const double here = prefix_mass.at(prefix);
    const LogProbs lp = next_logprobs(a, s);
    const std::string at = to_compact(src) + " after '" + to_compact(prefix) + "'";
    tally.log_vs_prob(s.log_prefix, here, "prefix " + at);
    const auto complete = dist.find(prefix);
    tally.log_vs_prob(lp(kEosIndex), complete == dist.end() ? 0.0 : complete->second / here,
                      "EOS " + at);
    for (Token t : kTokens) {
      Sequence child = prefix;
      child.push_back(t);
      const auto it = prefix_mass.find(child);
      const double cond = it == prefix_mass.end() ? 0.0 : it->second / here;
      tally.log_vs_prob(lp(index(t)), cond, std::string(to_string(t)) + " " + at);
      if (cond > 0) visit(child, advance(a, s, t));
    }
  };
  visit(Sequence{}, init_state(a));
}

void check_document(const ChannelSpec& spec, const Sequence& doc, const VerifyOptions& opts,
                    Tally& tally) {
  const auto a = compile(spec, doc);
  const SegmentOracle oracle(spec, doc);
  tally.value(oracle.total_mass(), 1.0, "mass of " + to_compact(doc));

  std::function<void(const Sequence&, const ScorerState&, double)> visit =
      [&](const Sequence& prefix, const ScorerState& s, double here) {
        const LogProbs lp = next_logprobs(a, s);
        const std::string at = to_compact(doc) + " after '" + to_compact(prefix) + "'";
        tally.log_vs_prob(s.log_prefix, here, "prefix " + at);
        tally.log_vs_prob(lp(kEosIndex), oracle.probability(prefix) / here, "EOS " + at);
        for (Token t : kTokens) {
          Sequence child = prefix;
          child.push_back(t);
          const double p = oracle.prefix_probability(child);
          tally.log_vs_prob(lp(index(t)), p / here, std::string(to_string(t)) + " " + at);
          if (p > 0 && child.size() < opts.document_depth) visit(child, advance(a, s, t), p);
        }
      };
  visit(Sequence{}, init_state(a), 1.0);

  Rng rng = pair_stream(opts.seed, std::hash<std::string>{}(to_compact(doc)) & 0xffff);
  for (std::size_t i = 0; i < opts.document_samples; ++i) {
    const Sequence y = sample_target(spec, doc, rng);
    tally.log_vs_prob(sequence_logprob(a, y), oracle.probability(y),
                      "P(" + to_compact(y) + " | " + to_compact(doc) + ")");
  }
}

}  // namespace

SuiteResult verify_exact_inference(const VerifyOptions& opts) {
  Tally tally{opts.tolerance};
  const ChannelSpec sentence;
  for (const Sequence& src : small_sentence_sources(3)) check_sentence_source(sentence, src, tally);
  const ChannelSpec document = ChannelSpec::defaults(Level::Document);
  for (const Sequence& doc : small_documents()) check_document(document, doc, opts, tally);
  return {"exact-inference", tally.ok(), tally.checks, tally.worst, describe(tally)};
}

SuiteResult verify_normalization(const VerifyOptions& opts) {
  Tally tally{opts.tolerance};
  Rng rng = pair_stream(opts.seed, 1);
  const std::array<ChannelSpec, 2> specs{ChannelSpec{}, ChannelSpec::defaults(Level::Document)};
  std::uniform_int_distribution<int> pick(0, 1);
  while (tally.checks < opts.normalization_states) {
    const ChannelSpec& spec = specs[pick(rng)];
    const Sequence src = sample_source(spec, rng);
    const Sequence y = sample_target(spec, src, rng);
    const auto a = compile(spec, src);
    auto s = init_state(a);
    for (std::size_t k = 0; k <= y.size() && tally.checks < opts.normalization_states; ++k) {
      const double total = logsumexp(next_logprobs(a, s));
      tally.value(std::exp(total), 1.0, to_compact(src) + " after '" +
                                             to_compact(std::span(y).first(k)) + "'");
      if (k < y.size()) s = advance(a, s, y[k]);
    }
  }
  return {"normalization", tally.ok(), tally.checks, tally.worst, describe(tally)};
}

SuiteResult verify_beam_exhaustive(const VerifyOptions& opts) {
  Tally tally{opts.tolerance};
  const ChannelSpec spec;
  std::size_t mismatches = 0;
  std::string first;
  for (const Sequence& src : small_sentence_sources(3)) {
    if (src.empty()) continue;
    const OutputDistribution dist = enumerate_channel(spec, src, max_emission_length(spec, src));
    const Sequence* best = nullptr;
    double best_score = neg_inf<double>();
    for (const auto& [y, p] : dist) {
      if (y.empty()) continue;
      const double score = std::log(p) / static_cast<double>(y.size());
      // map order is lexicographic, so strict improvement keeps the tie order
      if (score > best_score || (score == best_score && y.size() < best->size())) {
        best = &y;
        best_score = score;
      }
    }
    BeamConfig beam;
    beam.beam_size = static_cast<int>(dist.size());
    const ExactScorer scorer(spec, src);
    const DecodeRecord r = beam_search(scorer, src, beam, PenaltyConfig{});
    tally.value(r.best.normalized_score, best_score, "score for " + to_compact(src));
    if (r.best.tokens != *best) {
      ++mismatches;
      if (first.empty()) first = to_compact(src) + ": beam " + to_compact(r.best.tokens) +
                                 ", exhaustive " + to_compact(*best);
    }
  }
  std::string detail = describe(tally);
  if (mismatches) detail += ", " + std::to_string(mismatches) + " argmax mismatches (" + first + ")";
  return {"beam-exhaustive", tally.ok() && mismatches == 0, tally.checks, tally.worst, detail};
}

SuiteResult verify_derivation(const VerifyOptions& opts) {
  const double at_zero = derivation_agreement(opts.derivation_samples, 1.0, 0.0, opts.seed);
  const double at_one =
      derivation_agreement(opts.derivation_samples, opts.derivation_max_ratio, 1.0, opts.seed);
  std::ostringstream os;
  os << "alpha 0 agreement " << 100 * at_zero << "%, alpha 1 (ratio <= "
     << opts.derivation_max_ratio << ") agreement " << 100 * at_one << "%";
  return {"derivation", at_zero == 1.0 && at_one >= 0.99, 2 * opts.derivation_samples,
          1.0 - std::min(at_zero, at_one), os.str()};
}

SuiteResult verify_sampling(const VerifyOptions& opts) {
  struct Case {
    Level level;
    const char* source;
  };
  const std::array<Case, 5> cases{{{Level::Sentence, "A"},
                                   {Level::Sentence, "AB"},
                                   {Level::Sentence, "CCB"},
                                   {Level::Document, "A."},
                                   {Level::Document, "A. B."}}};
  bool ok = true;
  double min_p = 1.0;
  std::ostringstream os;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const ChannelSpec spec = ChannelSpec::defaults(cases[c].level);
    const Sequence src = parse_compact(cases[c].source);
    const OutputDistribution dist = enumerate_channel(spec, src, max_emission_length(spec, src));
    std::map<Sequence, std::size_t> counts;
    Rng rng = pair_stream(opts.seed, 100 + c);
    std::size_t unknown = 0;
    for (std::size_t i = 0; i < opts.chi2_samples; ++i) {
      Sequence y = sample_target(spec, src, rng);
      if (!dist.count(y)) ++unknown;
      ++counts[std::move(y)];
    }
    const double n = static_cast<double>(opts.chi2_samples);
    double stat = 0, pooled_expected = 0, pooled_observed = 0;
    std::size_t bins = 0;
    for (const auto& [y, p] : dist) {
      const auto it = counts.find(y);
      const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
      if (n * p < 5) {
        pooled_expected += n * p;
        pooled_observed += observed;
        continue;
      }
      stat += (observed - n * p) * (observed - n * p) / (n * p);
      ++bins;
    }
    if (pooled_expected > 0) {
      stat += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) /
              pooled_expected;
      ++bins;
    }
    double p_value = 1.0;
    if (bins > 1) {
      const boost::math::chi_squared chi2(static_cast<double>(bins - 1));
      p_value = boost::math::cdf(boost::math::complement(chi2, stat));
    }
    const bool pass = unknown == 0 && p_value > opts.chi2_min_p;
    ok = ok && pass;
    min_p = std::min(min_p, p_value);
    os << (c ? "; " : "") << cases[c].source << ": chi2 " << stat << " df " << (bins - 1) << " p "
       << p_value;
    if (unknown) os << " (" << unknown << " impossible samples)";
  }
  return {"sampling-chi2", ok, cases.size(), min_p, os.str()};
}

std::vector<SuiteResult> verify_all(const VerifyOptions& opts) {
  return {verify_exact_inference(opts), verify_beam_exhaustive(opts), verify_derivation(opts),
          verify_sampling(opts)};
}

}  // namespace undertrans
