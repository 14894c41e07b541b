#include "undertrans/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "undertrans/errors.hpp"

namespace undertrans {
namespace {

// JSON has no infinities; they travel as the strings "inf" / "-inf".
Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ValidationError("not a number: " + s);
}

Json numbers(const std::vector<double>& xs) {
  Json arr = Json::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

std::vector<double> numbers_from(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from(x));
  return out;
}

}  // namespace

Json to_json(const Sequence& seq) {
  Json arr = Json::array();
  for (Token t : seq) arr.push_back(std::string(to_string(t)));
  return arr;
}

Sequence sequence_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("token sequence must be an array");
  Sequence seq;
  for (const auto& t : j) seq.push_back(parse_token(t.get<std::string>()));
  return seq;
}

Json to_json(const ChannelSpec& spec) {
  Json matrix = Json::array();
  for (int r = 0; r < kNumWords; ++r) {
    Json row = Json::array();
    for (int c = 0; c < kNumWords; ++c) row.push_back(spec.matrix.probabilities()(r, c));
    matrix.push_back(row);
  }
  return Json{{"level", std::string(to_string(spec.level))},
              {"matrix", matrix},
              {"p_distort", spec.noise.p_distort},
              {"sentence_len_range", {spec.sentence_len.lo, spec.sentence_len.hi}},
              {"sentences_per_doc_range", {spec.sentences_per_doc.lo, spec.sentences_per_doc.hi}}};
}

ChannelSpec channel_spec_from_json(const Json& j) {
  ChannelSpec spec;
  if (j.contains("level")) spec.level = parse_level(j.at("level").get<std::string>());
  if (j.contains("matrix")) {
    const Json& m = j.at("matrix");
    if (!m.is_array() || m.size() != kNumWords) throw ValidationError("matrix must be 3x3");
    TranslationMatrix::Matrix probs;
    for (int r = 0; r < kNumWords; ++r) {
      if (!m[r].is_array() || m[r].size() != kNumWords) throw ValidationError("matrix must be 3x3");
      for (int c = 0; c < kNumWords; ++c) probs(r, c) = m[r][c].get<double>();
    }
    spec.matrix = TranslationMatrix(probs);
  }
  if (j.contains("p_distort")) spec.noise.p_distort = j.at("p_distort").get<double>();
  if (j.contains("sentence_len_range")) {
    spec.sentence_len = {j["sentence_len_range"][0].get<int>(), j["sentence_len_range"][1].get<int>()};
  }
  if (j.contains("sentences_per_doc_range")) {
    spec.sentences_per_doc = {j["sentences_per_doc_range"][0].get<int>(),
                              j["sentences_per_doc_range"][1].get<int>()};
  }
  spec.validate();
  return spec;
}

Json to_json(const Pair& pair) {
  return Json{{"id", pair.id},
              {"level", std::string(to_string(pair.level))},
              {"source", to_json(pair.source)},
              {"target", to_json(pair.target)}};
}

Pair pair_from_json(const Json& j) {
  Pair p;
  p.id = j.at("id").get<std::int64_t>();
  p.level = parse_level(j.at("level").get<std::string>());
  p.source = sequence_from_json(j.at("source"));
  p.target = sequence_from_json(j.at("target"));
  validate_source(p.source, p.level);
  return p;
}

Json to_json(const BeamConfig& beam) {
  Json j{{"beam", beam.beam_size},
         {"alpha", beam.alpha},
         {"min_len", beam.min_len},
         {"expansion_factor", beam.expansion_factor},
         {"temperature", beam.temperature}};
  j["max_len"] = beam.max_len ? Json(*beam.max_len) : Json(nullptr);
  return j;
}

Json to_json(const PenaltyConfig& penalty) {
  return Json{{"penalty", std::string(to_string(penalty.mode))},
              {"tau", number(penalty.tau)},
              {"beta", penalty.beta},
              {"cap", penalty.cap},
              {"beta_cov", penalty.beta_cov}};
}

Json to_json(const FinalizedCandidate& c) {
  Json j{{"output", to_json(c.tokens)},
         {"raw_logprob", number(c.raw_logprob)},
         {"normalized_score", number(c.normalized_score)},
         {"unpenalized_score", number(c.unpenalized_score)},
         {"eos_logprob", number(c.eos_logprob)},
         {"eos_margin", number(c.margin)},
         {"risky", c.risky},
         {"penalty_applied", c.penalty_applied}};
  if (!c.coverage.empty()) j["coverage"] = numbers(c.coverage);
  return j;
}

FinalizedCandidate candidate_from_json(const Json& j) {
  FinalizedCandidate c;
  c.tokens = sequence_from_json(j.at("output"));
  c.raw_logprob = number_from(j.at("raw_logprob"));
  c.normalized_score = number_from(j.at("normalized_score"));
  if (j.contains("unpenalized_score")) c.unpenalized_score = number_from(j.at("unpenalized_score"));
  c.eos_logprob = number_from(j.at("eos_logprob"));
  c.margin = number_from(j.at("eos_margin"));
  c.risky = j.at("risky").get<bool>();
  c.penalty_applied = j.at("penalty_applied").get<bool>();
  if (j.contains("coverage")) c.coverage = numbers_from(j.at("coverage"));
  return c;
}

Json to_json(const DecodeRecord& r) {
  Json j{{"id", r.id}};
  const Json best = to_json(r.best);
  for (const auto& [key, value] : best.items()) j[key] = value;
  j["penalty_applied"] = r.penalty_applied;
  j["eos_trace"] = numbers(r.eos_trace);
  Json cands = Json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  j["candidates"] = cands;
  return j;
}

DecodeRecord record_from_json(const Json& j) {
  DecodeRecord r;
  r.id = j.at("id").get<std::int64_t>();
  r.best = candidate_from_json(j);
  r.penalty_applied = j.at("penalty_applied").get<bool>();
  if (j.contains("eos_trace")) r.eos_trace = numbers_from(j.at("eos_trace"));
  for (const auto& c : j.at("candidates")) r.candidates.push_back(candidate_from_json(c));
  return r;
}

Json to_json(const ErrorSummary& s) {
  Json types = Json::object();
  for (DocErrorType t : {DocErrorType::Last, DocErrorType::Penultimate, DocErrorType::Merge,
                         DocErrorType::Other}) {
    const auto it = s.doc_types.find(t);
    types[std::string(to_string(t))] = it == s.doc_types.end() ? 0 : it->second;
  }
  return Json{{"total", s.total},       {"under", s.under},
              {"over", s.over},         {"correct", s.correct},
              {"under_pct", s.under_pct()}, {"over_pct", s.over_pct()},
              {"doc_types", types}};
}

Json to_json(const WordDistribution& d) {
  auto shares = [](const std::array<double, kNumWords>& a) {
    return Json{{"A", a[0]}, {"B", a[1]}, {"C", a[2]}};
  };
  return Json{{"source", shares(d.source)},
              {"output", shares(d.output)},
              {"source_words", d.source_words},
              {"output_words", d.output_words}};
}

Json to_json(const ComparisonReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row{{"name", r.name}};
    const Json beam = to_json(r.beam), penalty = to_json(r.penalty);
    for (const auto& [k, v] : beam.items()) row[k] = v;
    for (const auto& [k, v] : penalty.items()) row[k] = v;
    row["errors"] = to_json(r.errors);
    row["delta_under"] = r.resolved_under;
    row["delta_all"] = r.changed;
    row["delta_tokens"] = r.token_delta;
    row["bleu"] = r.bleu;
    row["delta_bleu"] = r.bleu_delta;
    rows.push_back(row);
  }
  return Json{{"baseline", report.baseline}, {"rows", rows}};
}

Json to_json(const EmissionAutomaton& automaton) {
  Json arcs = Json::array();
  for (const auto& a : automaton.arcs()) {
    arcs.push_back(Json{{"from", a.from},
                        {"to", a.to},
                        {"token", a.label ? Json(std::string(to_string(*a.label))) : Json(nullptr)},
                        {"prob", a.prob}});
  }
  Json words = Json::array();
  for (int w : automaton.emitting_word()) words.push_back(w);
  return Json{{"schema", kSchemaVersion},
              {"source", to_json(automaton.source())},
              {"level", std::string(to_string(automaton.spec().level))},
              {"num_states", automaton.num_states()},
              {"start", automaton.start()},
              {"accept", automaton.accept()},
              {"emitting_word", words},
              {"arcs", arcs}};
}

std::string dump_line(const Json& j) { return j.dump(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines) {
  std::string text;
  for (const auto& j : lines) {
    text += dump_line(j);
    text += '\n';
  }
  write_text(path, text);
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Pair>& corpus) {
  std::vector<Json> lines;
  lines.reserve(corpus.size());
  for (const auto& p : corpus) lines.push_back(to_json(p));
  write_jsonl(path, lines);
}

std::vector<Pair> read_corpus(const std::filesystem::path& path) {
  std::vector<Pair> corpus;
  std::size_t number = 0;
  for (const auto& j : read_jsonl(path)) {
    ++number;
    try {
      corpus.push_back(pair_from_json(j));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": pair " + std::to_string(number) + ": " + e.what());
    }
  }
  return corpus;
}

void write_records(const std::filesystem::path& path, const std::vector<DecodeRecord>& records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_jsonl(path, lines);
}

std::vector<DecodeRecord> read_records(const std::filesystem::path& path) {
  std::vector<DecodeRecord> records;
  std::size_t number = 0;
  for (const auto& j : read_jsonl(path)) {
    ++number;
    try {
      records.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": record " + std::to_string(number) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace undertrans
