#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace breps {

enum class TokenKind { Word, Punct };

/// One token of the engine tokenizer. `leading` holds the whitespace that
/// separated this token from the previous one (empty for tokens split out of
/// the same whitespace-delimited chunk).
struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;
  std::string leading;

  bool operator==(const Token&) const = default;
};

/// Tokens plus the whitespace after the last token, enough to rebuild the
/// source text byte for byte.
struct TokenSequence {
  std::vector<Token> tokens;
  std::string trailing;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

// Splits on whitespace, detaches leading/trailing punctuation marks and cuts
// CJK runs into one token per character. Deterministic; never throws on
// well-formed UTF-8 and treats invalid bytes as ordinary word characters.
TokenSequence tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

/// Rebuilds the source text from a full token sequence.
std::string detokenize(const TokenSequence& sequence);

/// Joins a run of tokens with their inner separators. The leading whitespace
/// of the first token is dropped, so the result is an exact substring of the
/// source text.
std::string join_tokens(std::span<const Token> tokens);

/// True for the punctuation alphabet: . ! ? ; : , and the CJK 。！？；：，
bool is_punctuation(std::string_view utf8_char);

}  // namespace breps
