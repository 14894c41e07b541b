#include <cmath>

#include "gtest/gtest.h"
#include "undertrans/automaton.hpp"
#include "undertrans/enumerate.hpp"
#include "undertrans/scorer.hpp"
#include "undertrans/verify.hpp"

namespace undertrans {
namespace {

TEST(EnumerateTest, WordOutcomes) {
  const auto d = word_outcomes(ChannelSpec{}, Token::B);
  EXPECT_NEAR(d.at(Sequence{}), 0.075, 1e-15);
  EXPECT_NEAR(d.at(Sequence{Token::B}), 0.85 * 0.6, 1e-15);
  EXPECT_NEAR(d.at(Sequence{Token::B, Token::A}), 0.075 * 0.6 * 0.2, 1e-15);
  EXPECT_EQ(d.size(), 13u);
}

TEST(EnumerateTest, DocumentSentenceOutcomes) {
  const ChannelSpec spec = ChannelSpec::defaults(Level::Document);
  const auto d = sentence_outcomes(spec, Sequence{Token::A});
  EXPECT_NEAR(d.at(Sequence{}), 0.075, 1e-15);
  EXPECT_NEAR(d.at(parse_compact("A.")), 0.85 * 0.68, 1e-15);
  EXPECT_NEAR(d.at(parse_compact("A.A.")), 0.075 * 0.68 * 0.68, 1e-15);
  double total = 0;
  for (const auto& [y, p] : d) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(EnumerateTest, Guards) {
  const ChannelSpec spec;
  EXPECT_THROW(enumerate_channel(spec, parse_compact("ABCABCA"), 20), std::length_error);
  EXPECT_EQ(max_emission_length(spec, parse_compact("ABC")), 6u);
  EXPECT_GE(estimated_output_count(spec, parse_compact("AB")),
            static_cast<double>(enumerate_channel(spec, parse_compact("AB"), 4).size()));
}

TEST(EnumerateTest, TruncationDropsLongOutputs) {
  const auto d = enumerate_channel(ChannelSpec{}, parse_compact("AB"), 2);
  for (const auto& [y, p] : d) EXPECT_LE(y.size(), 2u);
}

TEST(SegmentOracleTest, MatchesFullEnumeration) {
  for (Level level : {Level::Sentence, Level::Document}) {
    const ChannelSpec spec = ChannelSpec::defaults(level);
    const Sequence src = parse_compact(level == Level::Sentence ? "CAB" : "B. A.");
    const SegmentOracle oracle(spec, src);
    EXPECT_NEAR(oracle.total_mass(), 1.0, 1e-12);
    const auto dist = enumerate_channel(spec, src, max_emission_length(spec, src));
    for (const auto& [y, p] : dist) EXPECT_NEAR(oracle.probability(y), p, 1e-14);
    EXPECT_NEAR(oracle.prefix_probability(Sequence{}), 1.0, 1e-12);
  }
}

TEST(SegmentOracleTest, PrefixProbability) {
  const SegmentOracle oracle(ChannelSpec{}, Sequence{Token::A});
  EXPECT_NEAR(oracle.prefix_probability(Sequence{Token::A}), 0.74, 1e-15);
  EXPECT_NEAR(oracle.prefix_probability(Sequence{Token::A, Token::A}), 0.048, 1e-15);
  EXPECT_DOUBLE_EQ(oracle.prefix_probability(Sequence{Token::Period}), 0.0);
}

TEST(OracleSuiteTest, ExactInferenceMatchesEnumeration) {
  const SuiteResult r = verify_exact_inference();
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_GT(r.checks, 10'000u);
}

TEST(OracleSuiteTest, Normalization) {
  const SuiteResult r = verify_normalization();
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_EQ(r.checks, 10'000u);
}

TEST(OracleSuiteTest, BeamMatchesExhaustive) {
  const SuiteResult r = verify_beam_exhaustive();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(OracleSuiteTest, SamplingGoodnessOfFit) {
  const SuiteResult r = verify_sampling();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(OracleSuiteTest, SamplingCatchesWrongChannel) {
  // A channel sampled with a different distortion rate must be rejected.
  VerifyOptions opts;
  opts.chi2_samples = 20'000;
  ChannelSpec wrong;
  wrong.noise.p_distort = 0.25;
  const Sequence src{Token::A};
  const auto truth = enumerate_channel(ChannelSpec{}, src, 2);
  Rng rng = pair_stream(1, 1);
  std::size_t copies = 0;
  for (std::size_t i = 0; i < opts.chi2_samples; ++i) copies += sample_target(wrong, src, rng) == src;
  const double n = static_cast<double>(opts.chi2_samples);
  const double expected = n * truth.at(src);
  EXPECT_GT(std::abs(static_cast<double>(copies) - expected), 5 * std::sqrt(expected));
}

}  // namespace
}  // namespace undertrans
