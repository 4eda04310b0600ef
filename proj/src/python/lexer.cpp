#include "callctx/python/lexer.hpp"

#include <array>
#include <optional>

namespace callctx::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False",  "None",   "True",    "and",      "as",       "assert", "async",  "await",    "break",
    "class",  "continue", "def",   "del",      "elif",     "else",   "except", "finally",  "for",
    "from",   "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",     "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};

constexpr std::array<std::string_view, 4> kOps3 = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 19> kOps2 = {"**", "//", ">>", "<<", "<=", ">=", "==",
                                                     "!=", "->", "+=", "-=", "*=", "/=", "%=",
                                                     "&=", "|=", "^=", "@=", ":="};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:;.=";

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
 public:
  Lexer(std::string_view src, bool layout) : src_(src), layout_(layout) {}

  std::vector<Token> run() {
    if (layout_) indents_.push_back(0);
    at_line_start_ = layout_;
    while (pos_ < src_.size()) {
      if (at_line_start_) {
        if (!handle_indentation()) continue;
      }
      scan_token();
    }
    finish();
    return std::move(tokens_);
  }

 private:
  unsigned char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : 0;
  }

  std::uint32_t column_at(std::size_t offset) const { return static_cast<std::uint32_t>(offset - line_start_); }

  void emit(TokenKind kind, std::size_t begin, std::size_t end) {
    tokens_.push_back(Token{kind, static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end),
                            static_cast<std::uint32_t>(line_), column_at(begin)});
  }

  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw SyntaxError(what, static_cast<std::uint32_t>(line_), column_at(at));
  }

  void newline_at(std::size_t nl_pos) {
    ++line_;
    line_start_ = nl_pos + 1;
  }

  // Measures indentation of a fresh logical line. Returns false when the line
  // was blank or comment-only and has been consumed entirely.
  bool handle_indentation() {
    std::size_t col = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ') {
        ++col;
      } else if (c == '\t') {
        col = (col / 8 + 1) * 8;
      } else if (c == '\f') {
        col = 0;
      } else {
        break;
      }
      ++pos_;
    }
    if (pos_ >= src_.size()) return false;
    char c = src_[pos_];
    if (c == '#') {
      std::size_t begin = pos_;
      while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
      emit(TokenKind::Comment, begin, pos_);
      return false;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && peek(1) == '\n') ++pos_;
      newline_at(pos_);
      ++pos_;
      return false;
    }
    at_line_start_ = false;
    if (col > indents_.back()) {
      indents_.push_back(col);
      emit(TokenKind::Indent, pos_, pos_);
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, pos_, pos_);
      }
      if (col != indents_.back()) fail("unindent does not match any outer indentation level", pos_);
    }
    return true;
  }

  void scan_token() {
    unsigned char c = peek();
    if (c == ' ' || c == '\t' || c == '\f') {
      ++pos_;
      return;
    }
    if (c == '\r' || c == '\n') {
      std::size_t begin = pos_;
      if (c == '\r' && peek(1) == '\n') ++pos_;
      if (layout_ && brackets_.empty()) {
        emit(TokenKind::Newline, begin, pos_ + 1);
        at_line_start_ = true;
      }
      newline_at(pos_);
      ++pos_;
      return;
    }
    if (c == '#') {
      std::size_t begin = pos_;
      while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
      emit(TokenKind::Comment, begin, pos_);
      return;
    }
    if (c == '\\') {
      if (peek(1) == '\n') {
        newline_at(pos_ + 1);
        pos_ += 2;
        return;
      }
      if (peek(1) == '\r' && peek(2) == '\n') {
        newline_at(pos_ + 2);
        pos_ += 3;
        return;
      }
      fail("unexpected character after line continuation", pos_);
    }
    if (auto quote = string_start()) {
      scan_string(*quote);
      return;
    }
    if (is_name_start(c)) {
      std::size_t begin = pos_;
      while (pos_ < src_.size() && is_name_char(peek())) ++pos_;
      emit(TokenKind::Name, begin, pos_);
      return;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(peek(1)))) {
      scan_number();
      return;
    }
    scan_operator();
  }

  // Length of the prefix before the opening quote when a string starts here.
  std::optional<std::size_t> string_start() const {
    std::size_t i = 0;
    while (i < 2 && std::string_view("rRbBuUfF").find(static_cast<char>(peek(i))) != std::string_view::npos) {
      ++i;
    }
    for (std::size_t k = 0; k <= i; ++k) {
      unsigned char q = peek(k);
      if (q == '\'' || q == '"') return k;
      if (k < i && !(q == 'r' || q == 'R' || q == 'b' || q == 'B' || q == 'u' || q == 'U' || q == 'f' ||
                     q == 'F')) {
        break;
      }
    }
    return std::nullopt;
  }

  void scan_string(std::size_t prefix_len) {
    std::size_t begin = pos_;
    std::uint32_t begin_line = static_cast<std::uint32_t>(line_);
    std::uint32_t begin_col = column_at(begin);
    pos_ += prefix_len;
    char quote = src_[pos_];
    bool triple = peek(1) == static_cast<unsigned char>(quote) && peek(2) == static_cast<unsigned char>(quote);
    pos_ += triple ? 3 : 1;
    for (;;) {
      if (pos_ >= src_.size()) {
        throw SyntaxError("unterminated string literal", begin_line, begin_col);
      }
      char c = src_[pos_];
      if (c == '\\') {
        if (peek(1) == '\n') newline_at(pos_ + 1);
        pos_ += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) throw SyntaxError("unterminated string literal", begin_line, begin_col);
        newline_at(pos_);
        ++pos_;
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (peek(1) == static_cast<unsigned char>(quote) && peek(2) == static_cast<unsigned char>(quote)) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    tokens_.push_back(Token{TokenKind::String, static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(pos_),
                            begin_line, begin_col});
  }

  void scan_number() {
    std::size_t begin = pos_;
    bool hex = peek() == '0' && (peek(1) == 'x' || peek(1) == 'X');
    while (pos_ < src_.size()) {
      unsigned char c = peek();
      if (std::isalnum(c) || c == '_' || c == '.') {
        ++pos_;
      } else if ((c == '+' || c == '-') && !hex && pos_ > begin &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')) {
        ++pos_;
      } else {
        break;
      }
    }
    emit(TokenKind::Number, begin, pos_);
  }

  void scan_operator() {
    std::string_view rest = src_.substr(pos_);
    for (auto op : kOps3) {
      if (rest.substr(0, 3) == op) return emit_op(3);
    }
    if (rest.substr(0, 3) == "...") return emit_op(3);
    for (auto op : kOps2) {
      if (rest.substr(0, 2) == op) return emit_op(2);
    }
    char c = rest.front();
    if (kOps1.find(c) == std::string_view::npos) {
      if (!layout_ && (c == '!' || c == '$' || c == '?' || c == '`')) {
        return emit_op(1);
      }
      fail(std::string("unexpected character '") + c + "'", pos_);
    }
    if (c == '(' || c == '[' || c == '{') {
      brackets_.push_back(c);
    } else if (c == ')' || c == ']' || c == '}') {
      char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (layout_) {
        if (brackets_.empty()) fail(std::string("unmatched '") + c + "'", pos_);
        if (brackets_.back() != open) fail(std::string("closing '") + c + "' does not match", pos_);
      }
      if (!brackets_.empty()) brackets_.pop_back();
    }
    emit_op(1);
  }

  void emit_op(std::size_t len) {
    emit(TokenKind::Op, pos_, pos_ + len);
    pos_ += len;
  }

  void finish() {
    if (layout_ && !brackets_.empty()) fail("unexpected end of file inside brackets", pos_);
    if (!layout_) return;
    bool need_newline = false;
    for (auto it = tokens_.rbegin(); it != tokens_.rend(); ++it) {
      if (it->kind == TokenKind::Comment) continue;
      need_newline = it->kind != TokenKind::Newline && it->kind != TokenKind::Dedent;
      break;
    }
    if (need_newline) emit(TokenKind::Newline, pos_, pos_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(TokenKind::Dedent, pos_, pos_);
    }
    emit(TokenKind::EndMarker, pos_, pos_);
  }

  std::string_view src_;
  bool layout_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t line_start_ = 0;
  bool at_line_start_ = false;
  std::vector<std::size_t> indents_;
  std::vector<char> brackets_;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source, true).run(); }

std::vector<Token> tokenize_fragment(std::string_view source) { return Lexer(source, false).run(); }

std::vector<std::string> fragment_tokens(std::string_view source) {
  std::vector<std::string> out;
  for (const auto& t : tokenize_fragment(source)) {
    if (t.significant()) out.emplace_back(t.text(source));
  }
  return out;
}

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

}  // namespace callctx::python
