#include "undertrans/token.hpp"

#include <algorithm>
#include <cctype>

#include "undertrans/errors.hpp"

namespace undertrans {

std::string_view to_string(Token t) {
  switch (t) {
    case Token::A: return "A";
    case Token::B: return "B";
    case Token::C: return "C";
    case Token::Period: return ".";
  }
  return "?";
}

std::string_view to_string(Level level) {
  return level == Level::Sentence ? "sentence" : "document";
}

Token parse_token(std::string_view s) {
  if (s == "A") return Token::A;
  if (s == "B") return Token::B;
  if (s == "C") return Token::C;
  if (s == ".") return Token::Period;
  throw ValidationError("unknown token '" + std::string(s) + "'");
}

Level parse_level(std::string_view s) {
  if (s == "sentence") return Level::Sentence;
  if (s == "document") return Level::Document;
  throw ValidationError("unknown level '" + std::string(s) + "'");
}

std::string to_compact(std::span<const Token> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out += to_string(seq[i]);
    if (seq[i] == Token::Period && i + 1 < seq.size()) out += ' ';
  }
  return out;
}

Sequence parse_compact(std::string_view text) {
  Sequence seq;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    seq.push_back(parse_token(std::string_view(&c, 1)));
  }
  return seq;
}

std::size_t count_periods(std::span<const Token> seq) {
  return static_cast<std::size_t>(std::count(seq.begin(), seq.end(), Token::Period));
}

std::size_t count_words(std::span<const Token> seq) { return seq.size() - count_periods(seq); }

std::vector<std::span<const Token>> split_sentences(std::span<const Token> seq,
                                                    bool keep_fragment) {
  std::vector<std::span<const Token>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] == Token::Period) {
      out.push_back(seq.subspan(begin, i - begin));
      begin = i + 1;
    }
  }
  if (keep_fragment && begin < seq.size()) out.push_back(seq.subspan(begin));
  return out;
}

void validate_source(std::span<const Token> seq, Level level) {
  if (level == Level::Sentence) {
    if (count_periods(seq) != 0) {
      throw ValidationError("sentence-level source must not contain PERIOD");
    }
    return;
  }
  if (!seq.empty() && seq.back() != Token::Period) {
    throw ValidationError("document source must end with PERIOD: " + to_compact(seq));
  }
}

}  // namespace undertrans
