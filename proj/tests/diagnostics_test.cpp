#include "undertrans/diagnostics.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "undertrans/errors.hpp"

namespace undertrans {
namespace {

Sequence words(std::size_t n, Token t = Token::A) { return Sequence(n, t); }

TEST(LabelSentenceTest, LengthRule) {
  auto l = label_sentence(words(10), words(8));
  EXPECT_EQ(l.kind, ErrorKind::Under);
  EXPECT_EQ(l.missing_tokens, 2);
  l = label_sentence(words(10), words(10, Token::B));
  EXPECT_EQ(l.kind, ErrorKind::Correct);
  EXPECT_EQ(l.missing_tokens, 0);
  EXPECT_EQ(label_sentence(words(10), words(12)).kind, ErrorKind::Over);
}

struct DocCase {
  const char* source;
  const char* output;
  DocErrorType type;
};

class DocumentTypeFixtureTest : public ::testing::TestWithParam<DocCase> {};

TEST_P(DocumentTypeFixtureTest, Classifies) {
  const DocCase& c = GetParam();
  const auto l = label_document(parse_compact(c.source), parse_compact(c.output));
  EXPECT_EQ(l.kind, ErrorKind::Under);
  ASSERT_TRUE(l.doc_type.has_value());
  EXPECT_EQ(*l.doc_type, c.type) << to_string(*l.doc_type);
}

INSTANTIATE_TEST_SUITE_P(
    ReferenceFixtures, DocumentTypeFixtureTest,
    ::testing::Values(DocCase{"CABBAB. BCBCCC.", "CABBAB.", DocErrorType::Last},
                      DocCase{"CCBCA. CBAAA.", "CBAAA.", DocErrorType::Penultimate},
                      DocCase{"ABCCCA. BCBBAA.", "ABBBAA.", DocErrorType::Merge}));

TEST(LabelDocumentTest, MissingTokens) {
  EXPECT_EQ(label_document(parse_compact("CABBAB. BCBCCC."), parse_compact("CABBAB.")).missing_tokens, 6);
  EXPECT_EQ(label_document(parse_compact("CCBCA. CBAAA."), parse_compact("CBAAA.")).missing_tokens, 5);
  EXPECT_EQ(label_document(parse_compact("ABCCCA. BCBBAA."), parse_compact("ABBBAA.")).missing_tokens, 6);
}

TEST(LabelDocumentTest, PeriodCounts) {
  const Sequence src = parse_compact("AB. C.");
  EXPECT_EQ(label_document(src, parse_compact("AC. C.")).kind, ErrorKind::Correct);
  EXPECT_EQ(label_document(src, parse_compact("AB. C. C.")).kind, ErrorKind::Over);
  const auto two_missing = label_document(parse_compact("A. B. C."), parse_compact("A."));
  EXPECT_EQ(two_missing.kind, ErrorKind::Under);
  EXPECT_EQ(two_missing.doc_type, DocErrorType::Other);
  const auto empty = label_document(parse_compact("AB."), Sequence{});
  EXPECT_EQ(empty.kind, ErrorKind::Under);
  EXPECT_EQ(empty.doc_type, DocErrorType::Last);
  EXPECT_THROW(label_document(parse_compact("AB"), parse_compact("AB")), ValidationError);
}

TEST(LabelDocumentTest, LastPreferredOnTies) {
  // Identical sentences make every hypothesis cost the same.
  const auto l = label_document(parse_compact("AB. AB."), parse_compact("AB."));
  EXPECT_EQ(l.doc_type, DocErrorType::Last);
}

TEST(EditDistanceTest, Basic) {
  EXPECT_EQ(edit_distance(parse_compact("ABC"), parse_compact("ABC")), 0);
  EXPECT_EQ(edit_distance(parse_compact("ABC"), parse_compact("AC")), 1);
  EXPECT_EQ(edit_distance(parse_compact(""), parse_compact("CCC")), 3);
  EXPECT_EQ(edit_distance(parse_compact("ABCA"), parse_compact("BCAB")), 2);
}

TEST(WordDistributionTest, Shares) {
  const std::vector<Sequence> src{parse_compact("AB"), parse_compact("C")};
  const auto d = word_distribution(src, {});
  EXPECT_NEAR(d.source[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(d.source[1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(d.source[2], 1.0 / 3, 1e-15);
  EXPECT_EQ(d.output_words, 0u);
  const std::vector<Sequence> all_a{parse_compact("AAA. A.")};
  EXPECT_DOUBLE_EQ(word_distribution(all_a, all_a).source[0], 1.0);
  EXPECT_THROW(word_distribution({}, {}), std::invalid_argument);
}

TEST(EosHistogramTest, Binning) {
  const std::vector<double> eos{-0.1, -2.1};
  const std::vector<ErrorLabel> labels(2);
  const auto h = eos_histogram(eos, labels, 1.0);
  ASSERT_EQ(h.bins.size(), 3u);
  EXPECT_DOUBLE_EQ(h.bins[0].lo, -3.0);
  EXPECT_DOUBLE_EQ(h.bins[0].hi, -2.0);
  EXPECT_EQ(h.bins[0].count_all, 1u);
  EXPECT_EQ(h.bins[1].count_all, 0u);
  EXPECT_DOUBLE_EQ(h.bins[2].lo, -1.0);
  EXPECT_EQ(h.bins[2].count_all, 1u);
  EXPECT_EQ(h.n_under, 0u);
  EXPECT_FALSE(h.mean_under.has_value());
  EXPECT_NEAR(h.mean_all, -1.1, 1e-15);
  EXPECT_THROW(eos_histogram(std::vector<double>{}, std::vector<ErrorLabel>{}, 1.0),
               std::invalid_argument);
}

TEST(EosByMissingTest, Groups) {
  ErrorLabel under;
  under.kind = ErrorKind::Under;
  under.missing_tokens = 2;
  const auto g = eos_by_missing(std::vector<double>{-1.5}, std::vector<ErrorLabel>{under});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.at(2).count, 1u);
  EXPECT_DOUBLE_EQ(g.at(2).mean_eos_logprob, -1.5);
  EXPECT_TRUE(eos_by_missing(std::vector<double>{-1.5}, std::vector<ErrorLabel>(1)).empty());
}

TEST(SpearmanTest, Basic) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(*spearman(x, std::vector<double>{10, 20, 30, 40}), 1.0, 1e-15);
  EXPECT_NEAR(*spearman(x, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(*spearman(x, std::vector<double>{1, 2, 2, 3}), 0.9486832980505138, 1e-12);
  EXPECT_FALSE(spearman(x, std::vector<double>{5, 5, 5, 5}).has_value());
  EXPECT_FALSE(spearman(std::vector<double>{1}, std::vector<double>{1}).has_value());
}

TEST(CorpusBleuTest, Examples) {
  const std::vector<Sequence> refs{parse_compact("ABCABC"), parse_compact("CCBA")};
  EXPECT_DOUBLE_EQ(corpus_bleu(refs, refs), 100.0);
  EXPECT_DOUBLE_EQ(corpus_bleu(std::vector<Sequence>(2), refs), 0.0);
  EXPECT_THROW(corpus_bleu(std::vector<Sequence>(1), refs), std::invalid_argument);
}

TEST(CorpusBleuTest, ToyCorpusMatchesReference) {
  // Reference value from an independent BLEU implementation (no smoothing,
  // one token per symbol).
  const char* refs[] = {"CBBCCAACBCC", "BBAAC", "CACAAA", "CABBBCA", "CBBCACBBACB",
                        "CABAB", "AAAB", "CCACB", "BAAA", "ABCACABCBABB",
                        "BCBA", "BCCCAA", "BBACBBB", "AACCA", "BCBACBCAB",
                        "BACACA", "ACBBCABAAAAC", "BBCBBCACAA", "CCCCABAACAA", "ABBC"};
  const char* hyps[] = {"CBBCCAACBCC", "BBACCC", "CACAAA", "CABBCA", "CBBCACBBACB",
                        "ABAB", "AAABB", "CCCB", "BAA", "ABCACABCBABB",
                        "BCBA", "BCCCAA", "BBACBBB", "AACCA", "BCBACBCAB",
                        "BACACA", "ACBBCABAAAA", "BBCBBCACAA", "ACCCABAACAA", "BABC"};
  std::vector<Sequence> r, h;
  for (const char* s : refs) r.push_back(parse_compact(s));
  for (const char* s : hyps) h.push_back(parse_compact(s));
  EXPECT_NEAR(corpus_bleu(h, r), 91.34593945891895, 0.01);
  EXPECT_NEAR(corpus_bleu(h, r), 91.34593945891895, 1e-9);
}

TEST(DerivationTest, WorkedExample) {
  DerivationSample s;
  s.logp_pre = -20;
  s.len_pre = 40;
  s.logp_last = -8;
  s.len_last = 4;
  s.logp_eos_pre = -1.5;
  s.logp_eos_full = -0.1;
  s.alpha = 1;
  const auto r = derivation_check(s);
  EXPECT_NEAR(r.full_score, -0.63864, 1e-5);
  EXPECT_NEAR(r.truncated_score, -0.5375, 1e-12);
  EXPECT_NEAR(r.first_order_lhs, 0.375, 1e-12);
  EXPECT_NEAR(r.first_order_rhs, 1.4875, 1e-12);
  EXPECT_FALSE(r.exact_holds);
  EXPECT_FALSE(r.first_order_holds);
  EXPECT_TRUE(r.agree);
  EXPECT_DOUBLE_EQ(r.lambda_ratio, 0.1);
  s.len_last = 0;
  EXPECT_THROW(derivation_check(s), std::invalid_argument);
}

TEST(DerivationTest, AgreementRates) {
  EXPECT_DOUBLE_EQ(derivation_agreement(10'000, 1.0, 0.0, 3), 1.0);
  EXPECT_GE(derivation_agreement(10'000, 0.05, 1.0, 3), 0.99);
}

TEST(DerivationTest, SamplerRespectsRatio) {
  Rng rng = pair_stream(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_derivation(rng, 0.05, 1.0);
    ASSERT_LE(s.lambda_ratio(), 0.05);
    ASSERT_GE(s.len_last, 1);
    ASSERT_LE(s.logp_pre, 0.0);
    ASSERT_GE(s.logp_pre, -3.0 * s.len_pre);
  }
}

TEST(SummarizeTest, Counts) {
  std::vector<ErrorLabel> labels(4);
  labels[0].kind = ErrorKind::Under;
  labels[0].doc_type = DocErrorType::Merge;
  labels[1].kind = ErrorKind::Over;
  const auto s = summarize(labels);
  EXPECT_EQ(s.total, 4u);
  EXPECT_EQ(s.under, 1u);
  EXPECT_EQ(s.over, 1u);
  EXPECT_EQ(s.correct, 2u);
  EXPECT_DOUBLE_EQ(s.under_pct(), 25.0);
  EXPECT_EQ(s.doc_types.at(DocErrorType::Merge), 1u);
}

TEST(ComparePenaltiesTest, NeutralConfigsHaveZeroDeltas) {
  const auto corpus = generate_corpus(ChannelSpec{}, 40, CorpusMode::Test, 8);
  NamedConfig base{"baseline", {}, {}};
  NamedConfig same = base;
  same.name = "same";
  NamedConfig zero_beta = base;
  zero_beta.name = "eos-beta0";
  zero_beta.penalty.mode = PenaltyMode::Eos;
  zero_beta.penalty.beta = 0.0;
  const auto report = compare_penalties(corpus, ChannelSpec{}, {base, same, zero_beta}, 1);
  EXPECT_EQ(report.baseline, "baseline");
  ASSERT_EQ(report.rows.size(), 3u);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.resolved_under, 0u) << row.name;
    EXPECT_EQ(row.changed, 0u) << row.name;
    EXPECT_EQ(row.token_delta, 0) << row.name;
    EXPECT_DOUBLE_EQ(row.bleu_delta, 0.0) << row.name;
  }
}

TEST(ComparePenaltiesTest, RequiresBaseline) {
  const auto corpus = generate_corpus(ChannelSpec{}, 2, CorpusMode::Test, 8);
  NamedConfig eos{"eos", {}, {}};
  eos.penalty.mode = PenaltyMode::Eos;
  EXPECT_THROW(compare_penalties(corpus, ChannelSpec{}, {eos}, 1), ConfigError);
}

}  // namespace
}  // namespace undertrans
