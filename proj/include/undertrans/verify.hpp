#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace undertrans {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t checks = 0;
  double worst = 0.0;  // largest deviation seen, in the suite's own units
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  std::size_t document_depth = 7;     // prefix-tree depth for document checks
  std::size_t document_samples = 50;  // sampled complete outputs per document
  std::size_t normalization_states = 10'000;
  std::size_t derivation_samples = 10'000;
  double derivation_max_ratio = 0.05;
  std::size_t chi2_samples = 20'000;
  double chi2_min_p = 1e-3;
};

/// DP scores against brute-force enumeration: every sentence source of up to
/// three words (full output sets) and every document of at most two
/// sentences of at most two words (segment oracle over a prefix tree plus
/// sampled outputs).
SuiteResult verify_exact_inference(const VerifyOptions& opts = {});

/// Next-outcome distributions sum to one on randomly reached states.
SuiteResult verify_normalization(const VerifyOptions& opts = {});

/// Beam search with a beam at least as wide as the output set returns the
/// exhaustive argmax of the length-normalized objective.
SuiteResult verify_beam_exhaustive(const VerifyOptions& opts = {});

/// Sign agreement of the exact and first-order derivation conditions at
/// alpha 0 (must be total) and alpha 1 with small length ratios (>= 99%).
SuiteResult verify_derivation(const VerifyOptions& opts = {});

/// Pearson chi-squared goodness of fit of channel samples against the
/// enumerated output distribution.
SuiteResult verify_sampling(const VerifyOptions& opts = {});

std::vector<SuiteResult> verify_all(const VerifyOptions& opts = {});

}  // namespace undertrans
