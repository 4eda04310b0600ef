#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/python/source_file.hpp"
#include "callctx/util/json.hpp"

namespace callctx::analysis {

struct Parameter {
  enum class Kind { PositionalOnly, PositionalOrKeyword, KeywordOnly, VarPositional, VarKeyword };

  std::string name;
  Kind kind = Kind::PositionalOrKeyword;
  bool has_default = false;

  bool accepts_positional() const { return kind == Kind::PositionalOnly || kind == Kind::PositionalOrKeyword; }
  bool accepts_keyword() const { return kind == Kind::PositionalOrKeyword || kind == Kind::KeywordOnly; }
  bool variadic() const { return kind == Kind::VarPositional || kind == Kind::VarKeyword; }
  bool operator==(const Parameter&) const = default;
};

std::string_view kind_name(Parameter::Kind k);

struct Signature {
  std::vector<Parameter> params;

  bool has_var_positional() const;
  bool has_var_keyword() const;
  std::size_t positional_capacity() const;
  const Parameter* find(std::string_view name) const;

  // Drops the first parameter (self / cls) of a bound method.
  Signature bound() const;

  // "(a, b=..., *args, c, **kw)"
  std::string render() const;
  Json to_json() const;
  static Signature from_json(const Json& j);
  bool operator==(const Signature&) const = default;
};

// Parses the parameter list between the parentheses of a def header.
Signature parse_parameters(const std::vector<std::string>& tokens);
// Parses "a, b=1, *, c" style text. Throws python::SyntaxError.
Signature parse_parameters(std::string_view text);

// Signature of the function scope `scope_index` of `file`.
std::optional<Signature> signature_of(const python::SourceFile& file, int scope_index);

}  // namespace callctx::analysis
