#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace undertrans {

/// Channel vocabulary. EOS is not a token; it only appears as a distribution slot.
enum class Token : std::uint8_t { A = 0, B = 1, C = 2, Period = 3 };

inline constexpr int kNumWords = 3;     // A, B, C
inline constexpr int kNumTokens = 4;    // A, B, C, PERIOD
inline constexpr int kEosIndex = 4;     // slot of EOS in next-token distributions
inline constexpr int kNumOutcomes = 5;  // tokens plus EOS

inline constexpr std::array<Token, kNumWords> kWords{Token::A, Token::B, Token::C};
inline constexpr std::array<Token, kNumTokens> kTokens{Token::A, Token::B, Token::C,
                                                       Token::Period};

enum class Level { Sentence, Document };

using Sequence = std::vector<Token>;

constexpr int index(Token t) { return static_cast<int>(t); }
constexpr bool is_word(Token t) { return t != Token::Period; }

std::string_view to_string(Token t);
std::string_view to_string(Level level);
Token parse_token(std::string_view s);
Level parse_level(std::string_view s);

/// Compact rendering, e.g. "CABBAB. BCBCCC." (a space follows every inner PERIOD).
std::string to_compact(std::span<const Token> seq);
/// Inverse of to_compact; whitespace is ignored.
Sequence parse_compact(std::string_view text);

std::size_t count_periods(std::span<const Token> seq);
std::size_t count_words(std::span<const Token> seq);

/// Splits a document into sentences (PERIOD excluded). A trailing fragment
/// without PERIOD is returned as a final sentence when `keep_fragment` is set.
std::vector<std::span<const Token>> split_sentences(std::span<const Token> seq,
                                                    bool keep_fragment = false);

/// Throws ValidationError if `seq` is not a valid source for `level`.
void validate_source(std::span<const Token> seq, Level level);

}  // namespace undertrans
