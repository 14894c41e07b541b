// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "undertrans/diagnostics.hpp"
#include "undertrans/io.hpp"
#include "undertrans/pipeline.hpp"
#include "undertrans/verify.hpp"

using namespace undertrans;

namespace {

// Pinned thresholds.
constexpr double kOracleTol = 1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kNormStates = 10'000;
constexpr std::size_t kSamples = 200'000;
constexpr double kCopyFreq = 0.68, kCopyTol = 0.005;
constexpr double kEmptyFreq = 0.075, kEmptyTol = 0.003;
constexpr std::size_t kCorpusPairs = 1000;
constexpr std::uint64_t kCorpusSeed = 1;
constexpr double kDecodeSeconds = 300.0;
constexpr std::size_t kDerivationSamples = 10'000;
constexpr double kDerivationRatio = 0.05, kDerivationMin = 0.99;
constexpr double kBleuTol = 1e-9;
constexpr double kCoverageBeta = 0.2;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<ErrorLabel> labels_of(const std::vector<Pair>& corpus, const std::vector<DecodeRecord>& rs) {
  std::vector<ErrorLabel> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.push_back(label_output(corpus[i].level, corpus[i].source, rs[i].best.tokens));
  }
  return out;
}

std::vector<Sequence> outputs_of(const std::vector<DecodeRecord>& rs) {
  std::vector<Sequence> out;
  for (const auto& r : rs) out.push_back(r.best.tokens);
  return out;
}

std::vector<Sequence> targets_of(const std::vector<Pair>& corpus) {
  std::vector<Sequence> out;
  for (const auto& p : corpus) out.push_back(p.target);
  return out;
}

std::string record_outputs(const std::vector<DecodeRecord>& rs) {
  std::string out;
  for (const auto& r : rs) out += dump_line(to_json(r.best.tokens)) + "\n";
  return out;
}

}  // namespace

int main() {
  const ChannelSpec sentence_spec;
  const ChannelSpec document_spec = ChannelSpec::defaults(Level::Document);
  const BeamConfig beam;  // beam 5, alpha 1
  const PenaltyConfig none;
  PenaltyConfig eos;
  eos.mode = PenaltyMode::Eos;  // tau 1, beta 0.4, cap 20

  VerifyOptions vopts;
  vopts.tolerance = kOracleTol;
  vopts.normalization_states = kNormStates;
  vopts.derivation_samples = kDerivationSamples;
  vopts.derivation_max_ratio = kDerivationRatio;

  // 1
  {
    SuiteResult r;
    const double t = seconds([&] { r = verify_exact_inference(vopts); });
    report(1, "exact-inference oracle", r.passed && t < kOracleSeconds,
           r.detail + ", " + str(t) + " s");
  }
  // 2
  {
    const SuiteResult r = verify_normalization(vopts);
    report(2, "normalization", r.passed && r.checks == kNormStates, r.detail);
  }
  // 3
  {
    const SuiteResult r = verify_beam_exhaustive(vopts);
    report(3, "beam vs exhaustive", r.passed, r.detail);
  }
  // 4
  {
    Rng rng = pair_stream(kCorpusSeed, 0);
    const Sequence src{Token::A};
    std::size_t copies = 0, empties = 0;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const Sequence y = sample_target(sentence_spec, src, rng);
      copies += y == src;
      empties += y.empty();
    }
    const double fc = static_cast<double>(copies) / kSamples;
    const double fe = static_cast<double>(empties) / kSamples;
    report(4, "sampling consistency",
           std::abs(fc - kCopyFreq) <= kCopyTol && std::abs(fe - kEmptyFreq) <= kEmptyTol,
           "freq([A]) " + str(fc) + ", freq([]) " + str(fe));
  }

  // Shared decodes for 5, 6, 7, 10, 11.
  const auto corpus = generate_corpus(sentence_spec, kCorpusPairs, CorpusMode::Test, kCorpusSeed);
  std::vector<DecodeRecord> base, pen;
  const double base_t = seconds([&] { base = decode_corpus(corpus, sentence_spec, beam, none); });
  const double pen_t = seconds([&] { pen = decode_corpus(corpus, sentence_spec, beam, eos); });
  const auto base_labels = labels_of(corpus, base);
  const auto pen_labels = labels_of(corpus, pen);
  const ErrorSummary base_sum = summarize(base_labels);
  const ErrorSummary pen_sum = summarize(pen_labels);

  const std::vector<Pair> stress{{0, Level::Sentence, Sequence(20, Token::C), Sequence(20, Token::C)}};
  const auto stress_base = decode_corpus(stress, sentence_spec, beam, none);
  const auto stress_pen = decode_corpus(stress, sentence_spec, beam, eos);
  std::size_t stress_dropped = 0, stress_restored = 0;
  for (std::size_t i = 0; i < stress.size(); ++i) {
    const bool dropped = stress_base[i].best.tokens.size() < stress[i].source.size();
    stress_dropped += dropped;
    stress_restored += dropped && stress_pen[i].best.tokens.size() == stress[i].source.size();
  }
  const auto stress_pen_labels = labels_of(stress, stress_pen);
  const auto stress_base_labels = labels_of(stress, stress_base);

  // 5
  {
    std::vector<Sequence> all_src, under_src;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      all_src.push_back(corpus[i].source);
      if (base_labels[i].kind == ErrorKind::Under) under_src.push_back(corpus[i].source);
    }
    const double c_all = word_distribution(all_src, {}).source[2];
    const bool have_under = !under_src.empty();
    const double c_under = have_under ? word_distribution(under_src, {}).source[2] : NAN;
    const bool rates = base_sum.under_pct() > base_sum.over_pct();
    const bool c_share = have_under && c_under > c_all;
    const bool stress_ok = 2 * stress_dropped > stress.size();
    std::string detail = "Under " + str(base_sum.under_pct()) + "% vs Over " +
                         str(base_sum.over_pct()) + "%; C share Under " +
                         (have_under ? str(c_under) : std::string("n/a")) + " vs all " + str(c_all) +
                         "; stress " + std::to_string(stress_dropped) + "/" +
                         std::to_string(stress.size()) + " dropped (baseline length " +
                         std::to_string(stress_base[0].best.tokens.size()) + ")";
    report(5, "under-translation emerges", rates && c_share && stress_ok, detail);
  }
  // 6
  {
    const long long under_drop = static_cast<long long>(base_sum.under) - static_cast<long long>(pen_sum.under);
    const long long over_rise = static_cast<long long>(pen_sum.over) - static_cast<long long>(base_sum.over);
    const std::size_t stress_under_base = summarize(stress_base_labels).under;
    const std::size_t stress_under_pen = summarize(stress_pen_labels).under;
    const bool corpus_ok = pen_sum.under < base_sum.under;
    const bool stress_ok = stress_under_pen < stress_under_base && 2 * stress_restored >= stress_dropped;
    const bool over_ok = over_rise <= 0 || over_rise < under_drop;
    const bool time_ok = pen_t < kDecodeSeconds && base_t < kDecodeSeconds;
    std::string detail = "Under " + std::to_string(base_sum.under) + " -> " +
                         std::to_string(pen_sum.under) + ", Over " + std::to_string(base_sum.over) +
                         " -> " + std::to_string(pen_sum.over) + "; stress Under " +
                         std::to_string(stress_under_base) + " -> " + std::to_string(stress_under_pen) +
                         ", restored " + std::to_string(stress_restored) + "/" +
                         std::to_string(stress_dropped) + " (penalized length " +
                         std::to_string(stress_pen[0].best.tokens.size()) + "); decode " + str(pen_t) + " s";
    report(6, "EOS penalty works", corpus_ok && stress_ok && over_ok && time_ok, detail);
  }
  // 7
  {
    std::vector<double> eos_lp;
    for (const auto& r : base) eos_lp.push_back(r.best.eos_logprob);
    const EosHistogram h = eos_histogram(eos_lp, base_labels, 0.5);
    const bool mean_ok = h.mean_under && *h.mean_under < h.mean_all;

    const auto docs = generate_corpus(document_spec, kCorpusPairs, CorpusMode::Test, kCorpusSeed);
    const auto doc_rs = decode_corpus(docs, document_spec, beam, none);
    const auto doc_labels = labels_of(docs, doc_rs);
    std::vector<double> doc_eos;
    for (const auto& r : doc_rs) doc_eos.push_back(r.best.eos_logprob);
    const auto groups = eos_by_missing(doc_eos, doc_labels);
    std::vector<double> xs, ys;
    for (const auto& [m, g] : groups) {
      xs.push_back(m);
      ys.push_back(g.mean_eos_logprob);
    }
    const auto rho = spearman(xs, ys);
    const bool rho_ok = rho && *rho < 0;
    std::string detail = "sentence mean EOS Under " +
                         (h.mean_under ? str(*h.mean_under) : std::string("n/a")) + " vs all " +
                         str(h.mean_all) + "; document Spearman " +
                         (rho ? str(*rho) : std::string("n/a")) + " over " +
                         std::to_string(groups.size()) + " missing-count groups (" +
                         std::to_string(summarize(doc_labels).under) + " Under documents)";
    report(7, "EOS diagnostics", mean_ok && rho_ok, detail);
  }
  // 8
  {
    const double a0 = derivation_agreement(kDerivationSamples, 1.0, 0.0, kCorpusSeed);
    const double a1 = derivation_agreement(kDerivationSamples, kDerivationRatio, 1.0, kCorpusSeed);
    report(8, "derivation checker", a0 == 1.0 && a1 >= kDerivationMin,
           "alpha 0 " + str(100 * a0) + "%, alpha 1 " + str(100 * a1) + "%");
  }
  // 9
  {
    struct Fixture {
      const char* src;
      const char* out;
      DocErrorType type;
    };
    const Fixture fixtures[] = {{"CABBAB. BCBCCC.", "CABBAB.", DocErrorType::Last},
                                {"CCBCA. CBAAA.", "CBAAA.", DocErrorType::Penultimate},
                                {"ABCCCA. BCBBAA.", "ABBBAA.", DocErrorType::Merge}};
    bool ok = true;
    std::string detail;
    for (const auto& f : fixtures) {
      const ErrorLabel l = label_document(parse_compact(f.src), parse_compact(f.out));
      const bool hit = l.kind == ErrorKind::Under && l.doc_type == f.type;
      ok = ok && hit;
      if (!detail.empty()) detail += "; ";
      detail += std::string(f.src) + " -> " + (l.doc_type ? std::string(to_string(*l.doc_type)) : "none");
    }
    report(9, "document error typing", ok, detail);
  }
  // 10
  {
    PenaltyConfig zero_beta = eos;
    zero_beta.beta = 0.0;
    PenaltyConfig no_detect = eos;
    no_detect.tau = neg_inf<double>();
    const std::string ref = record_outputs(base);
    const bool beta_same = record_outputs(decode_corpus(corpus, sentence_spec, beam, zero_beta)) == ref;
    const bool tau_same = record_outputs(decode_corpus(corpus, sentence_spec, beam, no_detect)) == ref;

    PenaltyConfig cov;
    cov.mode = PenaltyMode::Coverage;
    cov.beta_cov = kCoverageBeta;
    const auto report_rows = compare_penalties(
        corpus, sentence_spec, {{"baseline", beam, none}, {"eos", beam, eos}, {"coverage", beam, cov}});
    auto ratio = [](const ComparisonRow& r) {
      return r.changed ? static_cast<double>(r.resolved_under) / static_cast<double>(r.changed) : 0.0;
    };
    const ComparisonRow& e = report_rows.rows[1];
    const ComparisonRow& c = report_rows.rows[2];
    const bool precision = ratio(e) >= ratio(c);
    std::string detail = std::string("beta=0 identical ") + (beta_same ? "yes" : "no") +
                         ", tau=-inf identical " + (tau_same ? "yes" : "no") + "; EOS " +
                         std::to_string(e.resolved_under) + "/" + std::to_string(e.changed) +
                         " vs coverage " + std::to_string(c.resolved_under) + "/" +
                         std::to_string(c.changed);
    report(10, "neutrality and precision", beta_same && tau_same && precision, detail);
  }
  // 11
  {
    const auto refs = targets_of(corpus);
    const double self = corpus_bleu(refs, refs);
    const double b = corpus_bleu(outputs_of(base), refs);
    const double p = corpus_bleu(outputs_of(pen), refs);
    report(11, "BLEU sanity", std::abs(self - 100.0) <= kBleuTol && p >= b,
           "self " + str(self) + ", baseline " + str(b) + ", EOS penalty " + str(p));
  }

  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}
