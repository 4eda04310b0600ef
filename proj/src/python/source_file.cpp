#include "callctx/python/source_file.hpp"

#include <algorithm>

namespace callctx::python {

SourceFile::SourceFile(std::string text, std::vector<Token> tokens)
    : text_(std::move(text)), tokens_(std::move(tokens)), lines_(text_) {}

SourceFile SourceFile::parse(std::string text) {
  auto tokens = tokenize(text);
  SourceFile file(std::move(text), std::move(tokens));
  file.build_brackets();
  file.build_scopes();
  return file;
}

std::optional<std::size_t> SourceFile::matching(std::size_t i) const {
  if (i >= match_.size() || match_[i] < 0) return std::nullopt;
  return static_cast<std::size_t>(match_[i]);
}

std::optional<std::size_t> SourceFile::prev_significant(std::size_t i) const {
  while (i > 0) {
    --i;
    if (tokens_[i].significant()) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> SourceFile::next_significant(std::size_t i) const {
  for (++i; i < tokens_.size(); ++i) {
    if (tokens_[i].significant()) return i;
  }
  return std::nullopt;
}

void SourceFile::build_brackets() {
  match_.assign(tokens_.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].kind != TokenKind::Op) continue;
    auto t = token_text(i);
    if (t == "(" || t == "[" || t == "{") {
      stack.push_back(i);
    } else if ((t == ")" || t == "]" || t == "}") && !stack.empty()) {
      match_[i] = static_cast<std::ptrdiff_t>(stack.back());
      match_[stack.back()] = static_cast<std::ptrdiff_t>(i);
      stack.pop_back();
    }
  }
}

namespace {

bool is_op(const SourceFile& f, std::size_t i, std::string_view op) {
  return f.tokens()[i].kind == TokenKind::Op && f.token_text(i) == op;
}

bool is_name(const SourceFile& f, std::size_t i, std::string_view name) {
  return f.tokens()[i].kind == TokenKind::Name && f.token_text(i) == name;
}

}  // namespace

void SourceFile::build_scopes() {
  Scope module;
  module.kind = Scope::Kind::Module;
  module.end_byte = static_cast<std::uint32_t>(text_.size());
  module.block_body = true;
  scopes_.push_back(module);

  struct Open {
    int scope;
    int body_depth;  // indentation depth of a block body; -1 for one-line bodies
  };
  std::vector<Open> open;
  int depth = 0;
  bool stmt_start = true;
  std::optional<std::size_t> last_sig;
  std::vector<std::string> pending_decorators;

  auto close_scope = [&](int idx) {
    Scope& s = scopes_[static_cast<std::size_t>(idx)];
    std::size_t last = last_sig.value_or(s.colon_token);
    s.last_token = std::max(last, s.colon_token);
    s.end_byte = tokens_[s.last_token].end;
  };

  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const Token& tok = tokens_[i];
    switch (tok.kind) {
      case TokenKind::Comment:
        continue;
      case TokenKind::Newline:
        while (!open.empty() && open.back().body_depth < 0) {
          close_scope(open.back().scope);
          open.pop_back();
        }
        stmt_start = true;
        continue;
      case TokenKind::Indent:
        ++depth;
        stmt_start = true;
        continue;
      case TokenKind::Dedent:
        --depth;
        while (!open.empty() && open.back().body_depth > depth) {
          close_scope(open.back().scope);
          open.pop_back();
        }
        stmt_start = true;
        continue;
      case TokenKind::EndMarker:
        while (!open.empty()) {
          close_scope(open.back().scope);
          open.pop_back();
        }
        continue;
      default:
        break;
    }

    if (stmt_start && is_op(*this, i, "@")) {
      // Decorator: record the dotted name that follows.
      std::string name;
      for (std::size_t j = i + 1; j < tokens_.size(); ++j) {
        if (tokens_[j].kind == TokenKind::Name || is_op(*this, j, ".")) {
          name += token_text(j);
        } else {
          break;
        }
      }
      pending_decorators.push_back(name);
    }

    bool is_def = is_name(*this, i, "def");
    bool is_async_def = is_name(*this, i, "async") && i + 1 < tokens_.size() && is_name(*this, i + 1, "def");
    bool is_class = is_name(*this, i, "class");
    if (stmt_start && (is_def || is_async_def || is_class)) {
      std::size_t kw = i;
      std::size_t name_tok = is_async_def ? i + 2 : i + 1;
      if (name_tok >= tokens_.size() || tokens_[name_tok].kind != TokenKind::Name) {
        throw SyntaxError("expected a name after def/class", tok.line, tok.column);
      }
      // Header ends at the first ':' outside brackets.
      std::size_t j = name_tok + 1;
      for (; j < tokens_.size(); ++j) {
        if (tokens_[j].kind == TokenKind::Newline || tokens_[j].kind == TokenKind::EndMarker) {
          throw SyntaxError("expected ':' to end the header", tok.line, tok.column);
        }
        if (auto m = matching(j); m && *m > j) {
          j = *m;
          continue;
        }
        if (is_op(*this, j, ":")) break;
      }
      Scope s;
      s.kind = is_class ? Scope::Kind::Class : Scope::Kind::Function;
      s.name = std::string(token_text(name_tok));
      s.parent = open.empty() ? 0 : open.back().scope;
      s.decorators = std::move(pending_decorators);
      pending_decorators.clear();
      s.keyword_token = kw;
      s.name_token = name_tok;
      s.colon_token = j;
      s.begin_byte = tokens_[kw].begin;
      s.body_begin_byte = tokens_[j].end;
      std::size_t after = j + 1;
      while (after < tokens_.size() && tokens_[after].kind == TokenKind::Comment) ++after;
      s.block_body = after < tokens_.size() && tokens_[after].kind == TokenKind::Newline;
      int idx = static_cast<int>(scopes_.size());
      scopes_[static_cast<std::size_t>(s.parent)].children.push_back(idx);
      scopes_.push_back(std::move(s));
      open.push_back(Open{idx, scopes_.back().block_body ? depth + 1 : -1});
      last_sig = j;
      i = j;
      stmt_start = false;
      continue;
    }

    if (tok.significant()) {
      last_sig = i;
      if (stmt_start && !is_op(*this, i, "@")) pending_decorators.clear();
      stmt_start = false;
    }
  }
}

std::optional<int> SourceFile::innermost_function(std::uint32_t begin, std::uint32_t end) const {
  std::optional<int> best;
  for (std::size_t i = 1; i < scopes_.size(); ++i) {
    const Scope& s = scopes_[i];
    if (s.kind != Scope::Kind::Function) continue;
    if (s.body_begin_byte <= begin && end <= s.end_byte) {
      if (!best || s.body_begin_byte >= scopes_[static_cast<std::size_t>(*best)].body_begin_byte) {
        best = static_cast<int>(i);
      }
    }
  }
  return best;
}

std::optional<int> SourceFile::scope_named_at(std::uint32_t byte) const {
  for (std::size_t i = 1; i < scopes_.size(); ++i) {
    if (tokens_[scopes_[i].name_token].begin == byte) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<std::string> SourceFile::tokens_between(std::uint32_t begin, std::uint32_t end) const {
  std::vector<std::string> out;
  auto it = std::lower_bound(tokens_.begin(), tokens_.end(), begin,
                             [](const Token& t, std::uint32_t b) { return t.begin < b; });
  for (; it != tokens_.end() && it->begin < end; ++it) {
    if (it->significant() && it->end <= end) out.emplace_back(it->text(text_));
  }
  return out;
}

}  // namespace callctx::python
