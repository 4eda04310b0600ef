#include "callctx/analysis/signature.hpp"

#include "callctx/python/lexer.hpp"

namespace callctx::analysis {

using Kind = Parameter::Kind;

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::PositionalOnly:
      return "positional-only";
    case Kind::PositionalOrKeyword:
      return "positional-or-keyword";
    case Kind::KeywordOnly:
      return "keyword-only";
    case Kind::VarPositional:
      return "var-positional";
    case Kind::VarKeyword:
      return "var-keyword";
  }
  return "positional-or-keyword";
}

static std::optional<Kind> kind_from_name(std::string_view s) {
  for (auto k : {Kind::PositionalOnly, Kind::PositionalOrKeyword, Kind::KeywordOnly, Kind::VarPositional,
                 Kind::VarKeyword}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

bool Signature::has_var_positional() const {
  for (const auto& p : params)
    if (p.kind == Kind::VarPositional) return true;
  return false;
}

bool Signature::has_var_keyword() const {
  for (const auto& p : params)
    if (p.kind == Kind::VarKeyword) return true;
  return false;
}

std::size_t Signature::positional_capacity() const {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.accepts_positional()) ++n;
  return n;
}

const Parameter* Signature::find(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

Signature Signature::bound() const {
  Signature s = *this;
  if (!s.params.empty() && s.params.front().accepts_positional()) s.params.erase(s.params.begin());
  return s;
}

std::string Signature::render() const {
  std::string out = "(";
  bool keyword_marker_needed = true;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.kind == Kind::KeywordOnly && keyword_marker_needed) {
      out += "*, ";
    }
    if (p.kind == Kind::VarPositional || p.kind == Kind::KeywordOnly) keyword_marker_needed = false;
    if (p.kind == Kind::VarPositional) out += "*";
    if (p.kind == Kind::VarKeyword) out += "**";
    out += p.name;
    if (p.has_default) out += "=...";
    if (p.kind == Kind::PositionalOnly && (i + 1 == params.size() || params[i + 1].kind != Kind::PositionalOnly)) {
      out += ", /";
    }
    if (i + 1 < params.size()) out += ", ";
  }
  return out + ")";
}

Json Signature::to_json() const {
  Json arr = Json::array();
  for (const auto& p : params) {
    arr.push_back(Json{{"name", p.name}, {"kind", kind_name(p.kind)}, {"default", p.has_default}});
  }
  return arr;
}

Signature Signature::from_json(const Json& j) {
  Signature s;
  for (const auto& e : j) {
    Parameter p;
    p.name = e.at("name").get<std::string>();
    p.kind = kind_from_name(e.at("kind").get<std::string>()).value_or(Kind::PositionalOrKeyword);
    p.has_default = e.value("default", false);
    s.params.push_back(std::move(p));
  }
  return s;
}

Signature parse_parameters(const std::vector<std::string>& tokens) {
  // Split on top-level commas.
  std::vector<std::vector<std::string>> parts(1);
  int depth = 0;
  for (const auto& t : tokens) {
    if (t == "(" || t == "[" || t == "{") ++depth;
    if (t == ")" || t == "]" || t == "}") --depth;
    if (t == "," && depth == 0) {
      parts.emplace_back();
      continue;
    }
    parts.back().push_back(t);
  }

  Signature sig;
  bool keyword_only = false;
  for (const auto& part : parts) {
    if (part.empty()) continue;
    if (part[0] == "/") {
      for (auto& p : sig.params)
        if (p.kind == Kind::PositionalOrKeyword) p.kind = Kind::PositionalOnly;
      continue;
    }
    Parameter p;
    std::size_t at = 0;
    if (part[0] == "*") {
      keyword_only = true;
      if (part.size() == 1 || part[1] == ":") continue;  // bare `*`
      p.kind = Kind::VarPositional;
      at = 1;
    } else if (part[0] == "**") {
      p.kind = Kind::VarKeyword;
      at = 1;
    } else {
      p.kind = keyword_only ? Kind::KeywordOnly : Kind::PositionalOrKeyword;
    }
    if (at >= part.size()) continue;
    p.name = part[at];
    int d = 0;
    for (std::size_t i = at + 1; i < part.size(); ++i) {
      const auto& t = part[i];
      if (t == "(" || t == "[" || t == "{") ++d;
      if (t == ")" || t == "]" || t == "}") --d;
      if (t == "=" && d == 0) p.has_default = true;
    }
    sig.params.push_back(std::move(p));
  }
  return sig;
}

Signature parse_parameters(std::string_view text) { return parse_parameters(python::fragment_tokens(text)); }

std::optional<Signature> signature_of(const python::SourceFile& file, int scope_index) {
  const auto& scope = file.scopes().at(static_cast<std::size_t>(scope_index));
  if (scope.kind != python::Scope::Kind::Function) return std::nullopt;
  auto open = file.next_significant(scope.name_token);
  if (!open || file.token_text(*open) != "(") return std::nullopt;
  auto close = file.matching(*open);
  if (!close) return std::nullopt;
  std::vector<std::string> tokens;
  for (std::size_t i = *open + 1; i < *close; ++i) {
    if (file.tokens()[i].significant()) tokens.emplace_back(file.token_text(i));
  }
  return parse_parameters(tokens);
}

}  // namespace callctx::analysis
