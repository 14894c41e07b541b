#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "undertrans/automaton.hpp"
#include "undertrans/channel.hpp"
#include "undertrans/decoder.hpp"
#include "undertrans/diagnostics.hpp"

namespace undertrans {

using Json = nlohmann::ordered_json;

/// Failure reading or writing a file; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaVersion = "v1";

Json to_json(const Sequence& seq);
Sequence sequence_from_json(const Json& j);

Json to_json(const ChannelSpec& spec);
/// Missing fields keep their defaults.
ChannelSpec channel_spec_from_json(const Json& j);

Json to_json(const Pair& pair);
Pair pair_from_json(const Json& j);

Json to_json(const BeamConfig& beam);
Json to_json(const PenaltyConfig& penalty);

Json to_json(const FinalizedCandidate& c);
FinalizedCandidate candidate_from_json(const Json& j);
Json to_json(const DecodeRecord& r);
DecodeRecord record_from_json(const Json& j);

Json to_json(const ErrorSummary& s);
Json to_json(const WordDistribution& d);
Json to_json(const ComparisonReport& report);

/// Debug dump: states, arcs, and acceptance.
Json to_json(const EmissionAutomaton& automaton);

/// Compact JSON text; doubles use the shortest form that round-trips exactly.
std::string dump_line(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);
/// Throws IoError naming the path and line number on malformed input.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

void write_corpus(const std::filesystem::path& path, const std::vector<Pair>& corpus);
std::vector<Pair> read_corpus(const std::filesystem::path& path);

void write_records(const std::filesystem::path& path, const std::vector<DecodeRecord>& records);
std::vector<DecodeRecord> read_records(const std::filesystem::path& path);

}  // namespace undertrans
