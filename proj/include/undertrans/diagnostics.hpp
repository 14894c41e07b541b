#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "undertrans/channel.hpp"
#include "undertrans/decoder.hpp"
#include "undertrans/token.hpp"

namespace undertrans {

enum class ErrorKind { Correct, Under, Over };
enum class DocErrorType { Last, Penultimate, Merge, Other };

std::string_view to_string(ErrorKind kind);
std::string_view to_string(DocErrorType type);

struct ErrorLabel {
  ErrorKind kind = ErrorKind::Correct;
  std::optional<DocErrorType> doc_type;  // document-level Under only
  int missing_tokens = 0;
};

/// Under / Over / Correct by comparing lengths.
ErrorLabel label_sentence(std::span<const Token> source, std::span<const Token> output);

/// Under / Over / Correct by comparing PERIOD counts. When exactly one
/// sentence is missing, the error is typed by the cheapest of three
/// alignments: drop the last sentence, drop the penultimate one, or merge
/// the last two (a prefix of the penultimate joined to a suffix of the last).
ErrorLabel label_document(std::span<const Token> source, std::span<const Token> output);

ErrorLabel label_output(Level level, std::span<const Token> source, std::span<const Token> output);

/// Unit-cost Levenshtein distance.
int edit_distance(std::span<const Token> a, std::span<const Token> b);

struct WordDistribution {
  std::array<double, kNumWords> source{};  // shares of A, B, C
  std::array<double, kNumWords> output{};  // all zero when outputs are empty
  std::size_t source_words = 0;
  std::size_t output_words = 0;
};

WordDistribution word_distribution(std::span<const Sequence> sources,
                                   std::span<const Sequence> outputs);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count_all = 0;
  std::size_t count_under = 0;
};

struct EosHistogram {
  double bin_width = 1.0;
  std::vector<HistogramBin> bins;  // contiguous, ascending
  std::size_t n_all = 0;
  std::size_t n_under = 0;
  double mean_all = 0.0;
  std::optional<double> mean_under;
};

/// Bins [k*w, (k+1)*w) of final-step EOS log-probabilities, for all records
/// and for the Under-labelled ones.
EosHistogram eos_histogram(std::span<const double> eos_logprobs,
                           std::span<const ErrorLabel> labels, double bin_width);

struct MissingGroup {
  std::size_t count = 0;
  double mean_eos_logprob = 0.0;
};

/// Mean EOS log-probability of Under records, keyed by missing token count (>= 1).
std::map<int, MissingGroup> eos_by_missing(std::span<const double> eos_logprobs,
                                           std::span<const ErrorLabel> labels);

/// Rank correlation with average ranks for ties; nullopt when undefined.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Corpus BLEU-4 (no smoothing, brevity penalty exp(1 - r/c)), in [0, 100].
double corpus_bleu(std::span<const Sequence> outputs, std::span<const Sequence> references);

struct DerivationSample {
  double logp_pre = 0.0;       // ln P(Y_pre | X)
  double logp_last = 0.0;      // ln P(Y_last | X, Y_pre)
  double logp_eos_pre = 0.0;   // ln P(eos | X, Y_pre)
  double logp_eos_full = 0.0;  // ln P(eos | X, Y_pre:last)
  int len_pre = 1;
  int len_last = 1;
  double alpha = 1.0;

  double lambda_ratio() const { return static_cast<double>(len_last) / len_pre; }
};

struct DerivationResult {
  bool exact_holds = false;  // exact comparison of normalized objectives
  bool first_order_holds = false;  // first-order form, (1 + l)^a ~ 1 + a l
  bool agree = false;
  double lambda_ratio = 0.0;
  double full_score = 0.0;       // objective of Y_pre:last + eos
  double truncated_score = 0.0;  // objective of Y_pre + eos
  double first_order_lhs = 0.0;
  double first_order_rhs = 0.0;
};

DerivationResult derivation_check(const DerivationSample& sample);

/// Random sample with lambda_ratio <= max_ratio; per-token log-probabilities
/// are uniform on [-3, 0] and scaled by the segment lengths.
DerivationSample sample_derivation(Rng& rng, double max_ratio, double alpha);

/// Fraction of `n` random samples where both forms agree.
double derivation_agreement(std::size_t n, double max_ratio, double alpha, std::uint64_t seed);

struct ErrorSummary {
  std::size_t total = 0;
  std::size_t under = 0;
  std::size_t over = 0;
  std::size_t correct = 0;
  std::map<DocErrorType, std::size_t> doc_types;

  double under_pct() const { return total ? 100.0 * under / total : 0.0; }
  double over_pct() const { return total ? 100.0 * over / total : 0.0; }
};

ErrorSummary summarize(std::span<const ErrorLabel> labels);

struct NamedConfig {
  std::string name;
  BeamConfig beam;
  PenaltyConfig penalty;
};

struct ComparisonRow {
  std::string name;
  BeamConfig beam;
  PenaltyConfig penalty;
  ErrorSummary errors;
  std::size_t resolved_under = 0;  // baseline Under -> Correct
  std::size_t changed = 0;         // outputs differing from baseline
  long long token_delta = 0;
  double bleu = 0.0;
  double bleu_delta = 0.0;
};

struct ComparisonReport {
  std::string baseline;
  std::vector<ComparisonRow> rows;  // baseline first
};

/// Decodes the corpus under every configuration and reports deltas against
/// the first configuration with mode none. References are the pair targets.
ComparisonReport compare_penalties(const std::vector<Pair>& corpus, const ChannelSpec& spec,
                                   const std::vector<NamedConfig>& configs, unsigned workers = 0);

}  // namespace undertrans
