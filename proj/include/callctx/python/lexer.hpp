#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace callctx::python {

enum class TokenKind { Name, Number, String, Op, Comment, Newline, Indent, Dedent, EndMarker };

struct Token {
  TokenKind kind;
  std::uint32_t begin;  // byte offsets into the source
  std::uint32_t end;
  std::uint32_t line;    // 0-based
  std::uint32_t column;  // byte column

  std::string_view text(std::string_view source) const { return source.substr(begin, end - begin); }
  // Names, numbers, strings and operators; layout and comments are not significant.
  bool significant() const {
    return kind == TokenKind::Name || kind == TokenKind::Number || kind == TokenKind::String ||
           kind == TokenKind::Op;
  }
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, std::uint32_t line, std::uint32_t column)
      : std::runtime_error(std::to_string(line + 1) + ":" + std::to_string(column + 1) + ": " + what),
        line_(line),
        column_(column) {}
  std::uint32_t line() const { return line_; }
  std::uint32_t column() const { return column_; }

 private:
  std::uint32_t line_;
  std::uint32_t column_;
};

// Full module tokenization with INDENT/DEDENT/NEWLINE layout tokens and
// bracket balancing. Throws SyntaxError.
std::vector<Token> tokenize(std::string_view source);

// Tokenizes an expression fragment (argument text, predictions): newlines are
// whitespace and brackets need not balance. Throws SyntaxError on unterminated
// strings or stray characters.
std::vector<Token> tokenize_fragment(std::string_view source);

// Texts of the significant tokens of a fragment.
std::vector<std::string> fragment_tokens(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace callctx::python
