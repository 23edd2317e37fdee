#include "breps/tokenization.hpp"

#include <array>
#include <cstdint>

namespace breps {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

// Decodes one UTF-8 sequence. Invalid lead or continuation bytes decode as a
// single byte with value 0xFFFD so tokenization never fails.
CodePoint decode(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) return {lead, 1};

  std::size_t length = 0;
  char32_t value = 0;
  if ((lead & 0xE0) == 0xC0) {
    length = 2;
    value = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    value = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    value = lead & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + length > text.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < length; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) return {0xFFFD, 1};
    value = (value << 6) | (c & 0x3F);
  }
  return {value, length};
}

bool is_space(char32_t c) {
  switch (c) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_ascii_punct(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U';' || c == U':' ||
         c == U',';
}

bool is_cjk_punct(char32_t c) {
  return c == U'。' || c == U'！' || c == U'？' || c == U'；' || c == U'：' ||
         c == U'，';
}

bool is_cjk_char(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) ||    // unified ideographs
         (c >= 0x3400 && c <= 0x4DBF) ||    // extension A
         (c >= 0x20000 && c <= 0x2EBEF) ||  // extensions B-F
         (c >= 0xF900 && c <= 0xFAFF) ||    // compatibility ideographs
         (c >= 0x3040 && c <= 0x30FF);      // hiragana, katakana
}

// Tokenizes one run of non-CJK, non-whitespace characters: leading and
// trailing ASCII punctuation become Punct tokens, the middle stays one word.
void emit_latin_run(std::string_view run, std::string& pending_leading,
                    std::vector<Token>& out) {
  std::size_t begin = 0;
  std::size_t end = run.size();
  while (begin < end && is_ascii_punct(static_cast<unsigned char>(run[begin]))) {
    ++begin;
  }
  while (end > begin && is_ascii_punct(static_cast<unsigned char>(run[end - 1]))) {
    --end;
  }
  auto push = [&](std::string_view text, TokenKind kind) {
    out.push_back(Token{std::string(text), kind, std::move(pending_leading)});
    pending_leading.clear();
  };
  for (std::size_t i = 0; i < begin; ++i) push(run.substr(i, 1), TokenKind::Punct);
  if (end > begin) push(run.substr(begin, end - begin), TokenKind::Word);
  for (std::size_t i = end; i < run.size(); ++i) push(run.substr(i, 1), TokenKind::Punct);
}

}  // namespace

bool is_punctuation(std::string_view utf8_char) {
  if (utf8_char.empty()) return false;
  const CodePoint cp = decode(utf8_char, 0);
  if (cp.length != utf8_char.size()) return false;
  return is_ascii_punct(cp.value) || is_cjk_punct(cp.value);
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence result;
  std::string pending_leading;
  std::size_t pos = 0;
  std::size_t run_start = std::string_view::npos;

  auto flush_run = [&](std::size_t run_end) {
    if (run_start == std::string_view::npos) return;
    emit_latin_run(text.substr(run_start, run_end - run_start), pending_leading,
                   result.tokens);
    run_start = std::string_view::npos;
  };

  while (pos < text.size()) {
    const CodePoint cp = decode(text, pos);
    if (is_space(cp.value)) {
      flush_run(pos);
      pending_leading.append(text.substr(pos, cp.length));
    } else if (is_cjk_char(cp.value) || is_cjk_punct(cp.value)) {
      flush_run(pos);
      result.tokens.push_back(
          Token{std::string(text.substr(pos, cp.length)),
                is_cjk_punct(cp.value) ? TokenKind::Punct : TokenKind::Word,
                std::move(pending_leading)});
      pending_leading.clear();
    } else if (run_start == std::string_view::npos) {
      run_start = pos;
    }
    pos += cp.length;
  }
  flush_run(text.size());
  result.trailing = std::move(pending_leading);
  return result;
}

std::size_t count_tokens(std::string_view text) { return tokenize(text).size(); }

std::string detokenize(const TokenSequence& sequence) {
  std::string out;
  for (const Token& token : sequence.tokens) {
    out += token.leading;
    out += token.text;
  }
  out += sequence.trailing;
  return out;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += tokens[i].leading;
    out += tokens[i].text;
  }
  return out;
}

}  // namespace breps
