#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/lsp/position.hpp"
#include "callctx/python/lexer.hpp"

namespace callctx::python {

struct Scope {
  enum class Kind { Module, Function, Class };

  Kind kind = Kind::Module;
  std::string name;
  int parent = -1;
  std::vector<int> children;
  std::vector<std::string> decorators;  // dotted decorator names, e.g. "staticmethod", "typing.overload"

  // Token indices into SourceFile::tokens().
  std::size_t keyword_token = 0;  // `def`, `async` or `class`
  std::size_t name_token = 0;
  std::size_t colon_token = 0;    // end of the header
  std::size_t last_token = 0;     // last significant token of the body
  bool block_body = false;        // false for `def f(): return 1`

  std::uint32_t begin_byte = 0;       // start of the keyword
  std::uint32_t body_begin_byte = 0;  // just after the header colon
  std::uint32_t end_byte = 0;         // end of the last body token
};

// A parsed module: tokens, bracket pairs and the def/class scope tree.
class SourceFile {
 public:
  // Throws SyntaxError.
  static SourceFile parse(std::string text);

  std::string_view text() const { return text_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Scope>& scopes() const { return scopes_; }
  const lsp::LineIndex& lines() const { return lines_; }

  std::string_view token_text(std::size_t i) const { return tokens_[i].text(text_); }
  // Partner of the bracket token at `i`.
  std::optional<std::size_t> matching(std::size_t i) const;
  std::optional<std::size_t> prev_significant(std::size_t i) const;
  std::optional<std::size_t> next_significant(std::size_t i) const;

  // Innermost function whose body (after the header colon) covers [begin, end).
  std::optional<int> innermost_function(std::uint32_t begin, std::uint32_t end) const;
  // Innermost def/class whose name token starts at `byte`.
  std::optional<int> scope_named_at(std::uint32_t byte) const;

  // Significant token texts whose begin lies in [begin, end).
  std::vector<std::string> tokens_between(std::uint32_t begin, std::uint32_t end) const;

 private:
  SourceFile(std::string text, std::vector<Token> tokens);
  void build_brackets();
  void build_scopes();

  std::string text_;
  std::vector<Token> tokens_;
  std::vector<std::ptrdiff_t> match_;
  std::vector<Scope> scopes_;
  lsp::LineIndex lines_;
};

}  // namespace callctx::python
