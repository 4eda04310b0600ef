#include "callctx/eval/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "callctx/python/lexer.hpp"

namespace callctx::eval {

using python::TokenKind;

namespace {

bool is_open(std::string_view t) { return t == "(" || t == "[" || t == "{"; }
bool is_close(std::string_view t) { return t == ")" || t == "]" || t == "}"; }

bool is_word(const python::Token& t) {
  return t.kind == TokenKind::Name || t.kind == TokenKind::Number || t.kind == TokenKind::String;
}

// Index of the bracket closing tokens[0], or npos.
std::size_t closing_of_first(const std::vector<std::string>& toks) {
  int depth = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (is_open(toks[i])) ++depth;
    if (is_close(toks[i]) && --depth == 0) return i;
  }
  return std::string::npos;
}

bool starts_operand(std::string_view prev) {
  // After these a '*', '**', '-', '+' or '~' is a prefix operator.
  static const std::set<std::string_view> kAfter = {"(", "[", "{", ",", "=", ":", "+", "-", "*", "/", "%", "**",
                                                    "//", "<", ">", "<=", ">=", "==", "!=", "and", "or", "not",
                                                    "in", "is", "return", "lambda", "if", "else", "~", "@", "|",
                                                    "&", "^", "<<", ">>", ":="};
  return kAfter.count(prev) > 0;
}

std::string render(const std::vector<python::Token>& toks, const std::vector<std::string>& texts) {
  std::string out;
  std::vector<std::string> brackets;
  bool prev_prefix = false;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& t = texts[i];
    bool prefix = false;
    if (t == "*" || t == "**" || t == "-" || t == "+" || t == "~") {
      prefix = i == 0 || starts_operand(texts[i - 1]);
    }
    bool keyword_eq = false;
    if (t == "=" && i >= 1 && toks[i - 1].kind == TokenKind::Name) {
      keyword_eq = i == 1 || texts[i - 2] == "(" || texts[i - 2] == ",";
    }
    bool prev_keyword_eq = false;
    if (i >= 1 && texts[i - 1] == "=" && i >= 2 && toks[i - 2].kind == TokenKind::Name) {
      prev_keyword_eq = i == 2 || texts[i - 3] == "(" || texts[i - 3] == ",";
    }

    bool space = i > 0;
    if (i > 0) {
      const auto& p = texts[i - 1];
      bool in_subscript = !brackets.empty() && brackets.back() == "[";
      if (is_open(p) || p == "." || prev_prefix || keyword_eq || prev_keyword_eq) space = false;
      if (is_close(t) || t == "," || t == "." || t == ":") space = false;
      if ((t == "(" || t == "[") && (toks[i - 1].kind == TokenKind::Name || is_close(p) ||
                                     toks[i - 1].kind == TokenKind::String)) {
        space = python::is_keyword(p) && p != "None" && p != "True" && p != "False";
      }
      if (p == ":" && in_subscript) space = false;
      if (is_word(toks[i]) && is_word(toks[i - 1])) space = true;
    }
    if (space) out.push_back(' ');
    out += t;
    if (is_open(t)) brackets.push_back(t);
    if (is_close(t) && !brackets.empty()) brackets.pop_back();
    prev_prefix = prefix;
  }
  return out;
}

NormalizedArgs whitespace_fallback(std::string_view text) {
  NormalizedArgs n;
  n.lexed = false;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) n.tokens.push_back(w);
  for (std::size_t i = 0; i < n.tokens.size(); ++i) {
    if (i) n.text.push_back(' ');
    n.text += n.tokens[i];
  }
  return n;
}

}  // namespace

NormalizedArgs normalize_args(std::string_view text) {
  std::vector<python::Token> toks;
  try {
    for (const auto& t : python::tokenize_fragment(text)) {
      if (t.significant()) toks.push_back(t);
    }
  } catch (const python::SyntaxError&) {
    return whitespace_fallback(text);
  }
  std::vector<std::string> texts;
  for (const auto& t : toks) texts.emplace_back(t.text(text));

  if (texts.size() >= 2 && texts.front() == "(" && closing_of_first(texts) == texts.size() - 1) {
    texts.erase(texts.begin());
    texts.pop_back();
    toks.erase(toks.begin());
    toks.pop_back();
  }
  if (!texts.empty() && texts.back() == ",") {
    texts.pop_back();
    toks.pop_back();
  }
  NormalizedArgs n;
  n.text = render(toks, texts);
  n.tokens = std::move(texts);
  return n;
}

bool exact_match(std::string_view pred, std::string_view truth) {
  return normalize_args(pred).tokens == normalize_args(truth).tokens;
}

namespace {

std::u32string code_points(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    char32_t cp = len == 1 ? c : (c & (0x7F >> len));
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

std::size_t levenshtein(std::string_view a_text, std::string_view b_text) {
  auto a = code_points(a_text);
  auto b = code_points(b_text);
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
  std::size_t longest = std::max(code_points(a).size(), code_points(b).size());
  if (longest == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest));
}

double normalized_edit_similarity(std::string_view pred, std::string_view truth) {
  return edit_similarity(normalize_args(pred).text, normalize_args(truth).text);
}

std::optional<ArgumentList> parse_arguments(std::string_view text) {
  auto norm = normalize_args(text);
  if (!norm.lexed) return std::nullopt;
  ArgumentList args;
  if (norm.tokens.empty()) return args;

  std::vector<std::vector<std::string>> parts(1);
  int depth = 0;
  for (const auto& t : norm.tokens) {
    if (is_open(t)) ++depth;
    if (is_close(t) && --depth < 0) return std::nullopt;
    if (t == "," && depth == 0) {
      parts.emplace_back();
      continue;
    }
    parts.back().push_back(t);
  }
  if (depth != 0) return std::nullopt;

  bool seen_keyword = false;
  std::set<std::string> names;
  for (const auto& part : parts) {
    if (part.empty()) return std::nullopt;
    if (part[0] == "**") {
      if (part.size() == 1) return std::nullopt;
      args.double_star = true;
      seen_keyword = true;
    } else if (part[0] == "*") {
      if (part.size() == 1 || args.double_star) return std::nullopt;  // `*a` after `**k`
      args.star = true;
    } else if (part.size() >= 2 && part[1] == "=") {
      const auto& name = part[0];
      bool identifier = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_' ||
                                          static_cast<unsigned char>(name[0]) >= 0x80);
      if (!identifier || python::is_keyword(name) || part.size() == 2) return std::nullopt;
      if (!names.insert(name).second) return std::nullopt;  // repeated keyword is a syntax error
      args.keywords.push_back(name);
      seen_keyword = true;
    } else {
      if (seen_keyword) return std::nullopt;  // positional after keyword
      ++args.positional;
    }
  }
  return args;
}

SpmResult spm(std::string_view pred, const analysis::Signature& sig, bool require_all) {
  SpmResult r;
  auto args = parse_arguments(pred);
  if (!args) {
    r.parse_failure = true;
    return r;
  }
  std::vector<bool> bound(sig.params.size(), false);

  // (b) positional capacity
  std::size_t capacity = sig.positional_capacity();
  if (args->positional > capacity && !sig.has_var_positional()) return r;
  std::size_t remaining = args->positional;
  for (std::size_t i = 0; i < sig.params.size() && remaining > 0; ++i) {
    if (sig.params[i].accepts_positional()) {
      bound[i] = true;
      --remaining;
    }
  }

  // (a) keyword names, (c) no double binding
  for (const auto& kw : args->keywords) {
    std::size_t idx = sig.params.size();
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      if (sig.params[i].name == kw && sig.params[i].accepts_keyword()) idx = i;
    }
    if (idx == sig.params.size()) {
      if (!sig.has_var_keyword()) return r;
      continue;
    }
    if (bound[idx]) return r;
    bound[idx] = true;
  }

  // (d) required parameters; unpacked arguments may cover them
  if (require_all) {
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      const auto& p = sig.params[i];
      if (bound[i] || p.has_default || p.variadic()) continue;
      if (args->star && p.accepts_positional()) continue;
      if (args->double_star && p.accepts_keyword()) continue;
      return r;
    }
  }
  r.match = true;
  return r;
}

}  // namespace callctx::eval
