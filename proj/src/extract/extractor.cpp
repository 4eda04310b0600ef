#include "callctx/extract/extractor.hpp"

namespace callctx::extract {

using python::SourceFile;
using python::TokenKind;

Span make_span(const SourceFile& file, std::uint32_t begin, std::uint32_t end) {
  Span s;
  s.begin_byte = begin;
  s.end_byte = end;
  s.start = file.lines().position_of(begin, lsp::OffsetEncoding::Utf16);
  s.end = file.lines().position_of(end, lsp::OffsetEncoding::Utf16);
  return s;
}

namespace {

bool is_op(const SourceFile& f, std::size_t i, std::string_view op) {
  return f.tokens()[i].kind == TokenKind::Op && f.token_text(i) == op;
}

bool is_plain_name(const SourceFile& f, std::size_t i) {
  return f.tokens()[i].kind == TokenKind::Name && !python::is_keyword(f.token_text(i));
}

bool is_closer(const SourceFile& f, std::size_t i) { return is_op(f, i, ")") || is_op(f, i, "]"); }

// True when the '(' at `open` starts an argument list.
bool opens_call(const SourceFile& f, std::size_t open) {
  auto p = f.prev_significant(open);
  if (!p) return false;
  if (is_closer(f, *p)) return true;
  if (!is_plain_name(f, *p)) return false;
  auto pp = f.prev_significant(*p);
  if (pp && f.tokens()[*pp].kind == TokenKind::Name) {
    auto kw = f.token_text(*pp);
    if (kw == "def" || kw == "class") return false;
  }
  return true;
}

// First token of the primary expression ending at `last`.
std::size_t expression_start(const SourceFile& f, std::size_t last) {
  std::size_t q = last;
  for (;;) {
    const auto& tok = f.tokens()[q];
    if (tok.kind == TokenKind::Name || tok.kind == TokenKind::String || tok.kind == TokenKind::Number) {
      auto pp = f.prev_significant(q);
      if (tok.kind == TokenKind::Name && pp && is_op(f, *pp, ".")) {
        auto before_dot = f.prev_significant(*pp);
        if (!before_dot) return q;
        q = *before_dot;
        continue;
      }
      return q;
    }
    if (is_closer(f, q) || is_op(f, q, "}")) {
      auto open = f.matching(q);
      if (!open) return q;
      auto pp = f.prev_significant(*open);
      bool trailer = !is_op(f, q, "}") && pp && (is_plain_name(f, *pp) || is_closer(f, *pp));
      if (trailer) {
        q = *pp;
        continue;
      }
      return *open;
    }
    return q;
  }
}

// The name token that names the callee, when there is one.
std::optional<std::size_t> callee_name_token(const SourceFile& f, std::size_t before_paren) {
  std::size_t q = before_paren;
  while (is_closer(f, q)) {
    auto open = f.matching(q);
    if (!open) return std::nullopt;
    auto pp = f.prev_significant(*open);
    if (!pp) return std::nullopt;
    if (is_plain_name(f, *pp)) return pp;
    if (!is_closer(f, *pp)) return std::nullopt;
    q = *pp;
  }
  if (is_plain_name(f, q)) return q;
  return std::nullopt;
}

std::string compact_text(const SourceFile& f, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last; ++i) {
    if (f.tokens()[i].significant()) out += f.token_text(i);
  }
  return out;
}

}  // namespace

std::vector<CallInstance> extract_calls(const SourceFile& file, std::string_view project,
                                        std::string_view logical_path, const ExtractOptions& options) {
  std::vector<CallInstance> out;
  const auto& toks = file.tokens();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!is_op(file, i, "(") || !opens_call(file, i)) continue;
    auto close = file.matching(i);
    if (!close) continue;
    std::size_t before = *file.prev_significant(i);
    std::size_t start_tok = expression_start(file, before);

    CallInstance inst;
    inst.project = std::string(project);
    inst.file = std::string(logical_path);
    inst.id = inst.project + ":" + inst.file + ":" + std::to_string(toks[i].begin);
    auto name_tok = callee_name_token(file, before);
    std::size_t callee_tok = name_tok.value_or(before);
    inst.callee_name = name_tok ? std::string(file.token_text(*name_tok)) : std::string();
    inst.callee_expr = compact_text(file, start_tok, before);
    inst.callee = make_span(file, toks[callee_tok].begin, toks[callee_tok].end);
    inst.call = make_span(file, toks[start_tok].begin, toks[*close].end);

    auto first_arg = file.next_significant(i);
    if (first_arg && *first_arg < *close) {
      std::size_t last_arg = *file.prev_significant(*close);
      inst.args = make_span(file, toks[*first_arg].begin, toks[last_arg].end);
    } else {
      inst.args = make_span(file, toks[i].end, toks[i].end);
    }
    inst.ground_truth_args =
        std::string(file.text().substr(inst.args.begin_byte, inst.args.end_byte - inst.args.begin_byte));

    if (auto prev = file.prev_significant(start_tok)) {
      inst.raised = toks[*prev].kind == TokenKind::Name && file.token_text(*prev) == "raise";
      inst.decorator = is_op(file, *prev, "@");
    }

    auto fn = file.innermost_function(inst.call.begin_byte, inst.call.end_byte);
    if (fn) {
      const auto& scope = file.scopes()[static_cast<std::size_t>(*fn)];
      inst.enclosing_fn = make_span(file, scope.begin_byte, scope.end_byte);
      inst.enclosing_fn_name = scope.name;
      inst.left_context = file.tokens_between(scope.begin_byte, inst.args.begin_byte);
      inst.right_context = file.tokens_between(inst.args.end_byte, scope.end_byte);
    } else if (!options.include_top_level) {
      continue;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace callctx::extract
