#include "undertrans/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "undertrans/errors.hpp"
#include "undertrans/pipeline.hpp"

namespace undertrans {
namespace {

constexpr int kInfCost = std::numeric_limits<int>::max() / 4;

// Sentences of a document output; a trailing fragment without PERIOD is
// folded into the last sentence.
std::vector<Sequence> output_sentences(std::span<const Token> output) {
  std::vector<Sequence> out;
  for (auto s : split_sentences(output)) out.emplace_back(s.begin(), s.end());
  const auto all = split_sentences(output, true);
  if (all.size() > out.size()) {
    if (out.empty()) out.emplace_back();
    out.back().insert(out.back().end(), all.back().begin(), all.back().end());
  }
  return out;
}

// Full table D[i][j] = edit_distance(a[:i], b[:j]).
std::vector<std::vector<int>> edit_table(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d;
}

// Cheapest alignment of `out` as a non-empty prefix of `first` followed by a
// non-empty suffix of `second`; the material between them is skipped free.
int merge_cost(std::span<const Token> out, std::span<const Token> first,
               std::span<const Token> second) {
  if (out.size() < 2 || first.empty() || second.empty()) return kInfCost;
  const auto head = edit_table(out, first);
  Sequence rout(out.rbegin(), out.rend());
  Sequence rsecond(second.rbegin(), second.rend());
  const auto tail = edit_table(rout, rsecond);  // tail[i][j]: last i of out vs last j of second
  int best = kInfCost;
  for (std::size_t split = 1; split < out.size(); ++split) {
    const int h = *std::min_element(head[split].begin() + 1, head[split].end());
    const auto& trow = tail[out.size() - split];
    const int t = *std::min_element(trow.begin() + 1, trow.end());
    best = std::min(best, h + t);
  }
  return best;
}

double mean(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

using NgramCounts = std::map<Sequence, int>;

NgramCounts ngrams(std::span<const Token> seq, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[Sequence(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

bool same_output(const DecodeRecord& a, const DecodeRecord& b) {
  return a.best.tokens == b.best.tokens;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Correct: return "correct";
    case ErrorKind::Under: return "under";
    case ErrorKind::Over: return "over";
  }
  return "?";
}

std::string_view to_string(DocErrorType type) {
  switch (type) {
    case DocErrorType::Last: return "last";
    case DocErrorType::Penultimate: return "penultimate";
    case DocErrorType::Merge: return "merge";
    case DocErrorType::Other: return "other";
  }
  return "?";
}

int edit_distance(std::span<const Token> a, std::span<const Token> b) {
  return edit_table(a, b).back().back();
}

ErrorLabel label_sentence(std::span<const Token> source, std::span<const Token> output) {
  ErrorLabel label;
  if (output.size() < source.size()) {
    label.kind = ErrorKind::Under;
  } else if (output.size() > source.size()) {
    label.kind = ErrorKind::Over;
  }
  label.missing_tokens =
      std::max(0, static_cast<int>(source.size()) - static_cast<int>(output.size()));
  return label;
}

ErrorLabel label_document(std::span<const Token> source, std::span<const Token> output) {
  const std::size_t src_periods = count_periods(source);
  if (src_periods == 0) throw ValidationError("label_document: source has no PERIOD");
  const std::size_t out_periods = count_periods(output);
  ErrorLabel label;
  if (out_periods > src_periods) {
    label.kind = ErrorKind::Over;
    return label;
  }
  if (out_periods == src_periods) return label;

  label.kind = ErrorKind::Under;
  const int word_gap =
      std::max(0, static_cast<int>(count_words(source)) - static_cast<int>(count_words(output)));
  label.missing_tokens = word_gap;
  label.doc_type = DocErrorType::Other;
  if (out_periods + 1 != src_periods) return label;

  const auto src = split_sentences(source);
  const auto out = output_sentences(output);
  const std::size_t m = src.size();
  const std::size_t kept = out.size();
  // kept may exceed m - 1 only through a trailing fragment; treat as untyped.
  if (kept + 1 != m && !(kept == 0 && m == 1)) return label;

  int shared = 0;
  for (std::size_t k = 0; k + 2 < m; ++k) shared += edit_distance(out[k], src[k]);
  int last = shared, penultimate = kInfCost, merge = kInfCost;
  if (m >= 2) {
    last += edit_distance(out[m - 2], src[m - 2]);
    penultimate = shared + edit_distance(out[m - 2], src[m - 1]);
    const int mc = merge_cost(out[m - 2], src[m - 2], src[m - 1]);
    if (mc < kInfCost) merge = shared + mc;
  }
  if (last <= penultimate && last <= merge) {
    label.doc_type = DocErrorType::Last;
    label.missing_tokens = static_cast<int>(src[m - 1].size());
  } else if (penultimate <= merge) {
    label.doc_type = DocErrorType::Penultimate;
    label.missing_tokens = static_cast<int>(src[m - 2].size());
  } else {
    label.doc_type = DocErrorType::Merge;
  }
  return label;
}

ErrorLabel label_output(Level level, std::span<const Token> source, std::span<const Token> output) {
  return level == Level::Sentence ? label_sentence(source, output) : label_document(source, output);
}

WordDistribution word_distribution(std::span<const Sequence> sources,
                                   std::span<const Sequence> outputs) {
  if (sources.empty()) throw std::invalid_argument("word_distribution: empty subset");
  WordDistribution d;
  std::array<std::size_t, kNumWords> src{}, out{};
  for (const auto& s : sources) {
    for (Token t : s) {
      if (is_word(t)) ++src[index(t)];
    }
  }
  for (const auto& o : outputs) {
    for (Token t : o) {
      if (is_word(t)) ++out[index(t)];
    }
  }
  d.source_words = src[0] + src[1] + src[2];
  d.output_words = out[0] + out[1] + out[2];
  for (int w = 0; w < kNumWords; ++w) {
    if (d.source_words) d.source[w] = static_cast<double>(src[w]) / d.source_words;
    if (d.output_words) d.output[w] = static_cast<double>(out[w]) / d.output_words;
  }
  return d;
}

EosHistogram eos_histogram(std::span<const double> eos_logprobs,
                           std::span<const ErrorLabel> labels, double bin_width) {
  if (eos_logprobs.empty()) throw std::invalid_argument("eos_histogram: no records");
  if (labels.size() != eos_logprobs.size()) {
    throw std::invalid_argument("eos_histogram: labels and records differ in length");
  }
  if (!(bin_width > 0)) throw std::invalid_argument("eos_histogram: bin width must be positive");
  EosHistogram h;
  h.bin_width = bin_width;
  std::vector<long long> keys(eos_logprobs.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!std::isfinite(eos_logprobs[i])) {
      throw std::invalid_argument("eos_histogram: non-finite EOS log-probability");
    }
    keys[i] = static_cast<long long>(std::floor(eos_logprobs[i] / bin_width));
  }
  const auto [lo, hi] = std::minmax_element(keys.begin(), keys.end());
  for (long long k = *lo; k <= *hi; ++k) {
    h.bins.push_back({static_cast<double>(k) * bin_width, static_cast<double>(k + 1) * bin_width});
  }
  double sum_all = 0, sum_under = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    HistogramBin& bin = h.bins[static_cast<std::size_t>(keys[i] - *lo)];
    ++bin.count_all;
    ++h.n_all;
    sum_all += eos_logprobs[i];
    if (labels[i].kind == ErrorKind::Under) {
      ++bin.count_under;
      ++h.n_under;
      sum_under += eos_logprobs[i];
    }
  }
  h.mean_all = sum_all / h.n_all;
  if (h.n_under) h.mean_under = sum_under / h.n_under;
  return h;
}

std::map<int, MissingGroup> eos_by_missing(std::span<const double> eos_logprobs,
                                           std::span<const ErrorLabel> labels) {
  if (labels.size() != eos_logprobs.size()) {
    throw std::invalid_argument("eos_by_missing: labels and records differ in length");
  }
  std::map<int, MissingGroup> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].kind != ErrorKind::Under || labels[i].missing_tokens < 1) continue;
    MissingGroup& g = groups[labels[i].missing_tokens];
    ++g.count;
    g.mean_eos_logprob += (eos_logprobs[i] - g.mean_eos_logprob) / static_cast<double>(g.count);
  }
  return groups;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double corpus_bleu(std::span<const Sequence> outputs, std::span<const Sequence> references) {
  if (outputs.size() != references.size()) {
    throw std::invalid_argument("corpus_bleu: outputs and references differ in count");
  }
  if (references.empty()) throw std::invalid_argument("corpus_bleu: no references");
  constexpr std::size_t kMaxOrder = 4;
  std::array<double, kMaxOrder> matches{}, totals{};
  double out_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    out_len += outputs[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts hyp = ngrams(outputs[i], n);
      const NgramCounts ref = ngrams(references[i], n);
      for (const auto& [gram, count] : hyp) {
        totals[n - 1] += count;
        const auto it = ref.find(gram);
        if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (out_len == 0) return 0.0;
  double log_precision = 0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_precision += std::log(matches[n] / totals[n]) / kMaxOrder;
  }
  const double brevity = out_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / out_len);
  return 100.0 * brevity * std::exp(log_precision);
}

DerivationResult derivation_check(const DerivationSample& s) {
  if (s.len_pre < 1 || s.len_last < 1) {
    throw std::invalid_argument("derivation_check: lengths must be >= 1");
  }
  const double lp = s.len_pre, ll = s.len_last;
  DerivationResult r;
  r.lambda_ratio = s.lambda_ratio();
  const double full = (s.logp_pre + s.logp_last + s.logp_eos_full) / std::pow(lp + ll, s.alpha);
  const double truncated = (s.logp_pre + s.logp_eos_pre) / std::pow(lp, s.alpha);
  r.full_score = full;
  r.truncated_score = truncated;
  r.exact_holds = full > truncated;
  const double lhs = -s.logp_eos_pre / ll;
  const double rhs = s.alpha * (s.logp_pre + s.logp_eos_pre) / lp - (s.logp_last + s.logp_eos_full) / ll;
  r.first_order_lhs = lhs;
  r.first_order_rhs = rhs;
  r.first_order_holds = lhs > rhs;
  r.agree = r.exact_holds == r.first_order_holds;
  return r;
}

DerivationSample sample_derivation(Rng& rng, double max_ratio, double alpha) {
  if (!(max_ratio > 0)) throw std::invalid_argument("sample_derivation: max_ratio must be positive");
  std::uniform_real_distribution<double> per_token(-3.0, 0.0);
  const int min_pre = static_cast<int>(std::ceil(1.0 / max_ratio));
  std::uniform_int_distribution<int> pre(min_pre, std::max(min_pre, 20 * min_pre));
  DerivationSample s;
  s.alpha = alpha;
  s.len_pre = pre(rng);
  const int max_last = std::max(1, static_cast<int>(std::floor(max_ratio * s.len_pre)));
  s.len_last = std::uniform_int_distribution<int>(1, max_last)(rng);
  s.logp_pre = s.len_pre * per_token(rng);
  s.logp_last = s.len_last * per_token(rng);
  s.logp_eos_pre = per_token(rng);
  s.logp_eos_full = per_token(rng);
  return s;
}

double derivation_agreement(std::size_t n, double max_ratio, double alpha, std::uint64_t seed) {
  if (n == 0) return 1.0;
  Rng rng = pair_stream(seed, 0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) agree += derivation_check(sample_derivation(rng, max_ratio, alpha)).agree;
  return static_cast<double>(agree) / static_cast<double>(n);
}

ErrorSummary summarize(std::span<const ErrorLabel> labels) {
  ErrorSummary s;
  for (const ErrorLabel& l : labels) {
    ++s.total;
    switch (l.kind) {
      case ErrorKind::Under: ++s.under; break;
      case ErrorKind::Over: ++s.over; break;
      case ErrorKind::Correct: ++s.correct; break;
    }
    if (l.doc_type) ++s.doc_types[*l.doc_type];
  }
  return s;
}

ComparisonReport compare_penalties(const std::vector<Pair>& corpus, const ChannelSpec& spec,
                                   const std::vector<NamedConfig>& configs, unsigned workers) {
  const auto base_it = std::find_if(configs.begin(), configs.end(), [](const NamedConfig& c) {
    return c.penalty.mode == PenaltyMode::None;
  });
  if (base_it == configs.end()) throw ConfigError("compare_penalties: no baseline (mode none) config");

  std::vector<Sequence> references;
  for (const Pair& p : corpus) references.push_back(p.target);

  auto run = [&](const NamedConfig& cfg, std::vector<DecodeRecord>& records) {
    records = decode_corpus(corpus, spec, cfg.beam, cfg.penalty, workers);
    std::vector<ErrorLabel> labels;
    std::vector<Sequence> outputs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      labels.push_back(label_output(corpus[i].level, corpus[i].source, records[i].best.tokens));
      outputs.push_back(records[i].best.tokens);
    }
    ComparisonRow row;
    row.name = cfg.name;
    row.beam = cfg.beam;
    row.penalty = cfg.penalty;
    row.errors = summarize(labels);
    row.bleu = corpus_bleu(outputs, references);
    return std::pair{row, labels};
  };

  std::vector<DecodeRecord> base_records;
  auto [base_row, base_labels] = run(*base_it, base_records);
  long long base_tokens = 0;
  for (const auto& r : base_records) base_tokens += static_cast<long long>(r.best.tokens.size());

  ComparisonReport report;
  report.baseline = base_it->name;
  report.rows.push_back(base_row);
  for (auto it = configs.begin(); it != configs.end(); ++it) {
    if (it == base_it) continue;
    std::vector<DecodeRecord> records;
    auto [row, labels] = run(*it, records);
    long long tokens = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      tokens += static_cast<long long>(records[i].best.tokens.size());
      if (!same_output(records[i], base_records[i])) ++row.changed;
      if (base_labels[i].kind == ErrorKind::Under && labels[i].kind == ErrorKind::Correct) {
        ++row.resolved_under;
      }
    }
    row.token_delta = tokens - base_tokens;
    row.bleu_delta = row.bleu - base_row.bleu;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace undertrans
