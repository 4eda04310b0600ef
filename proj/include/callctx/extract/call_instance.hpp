#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "callctx/lsp/position.hpp"
#include "callctx/util/json.hpp"

namespace callctx::extract {

// A byte range of one file plus its line/UTF-16 column endpoints.
struct Span {
  std::uint32_t begin_byte = 0;
  std::uint32_t end_byte = 0;
  lsp::SourcePosition start;
  lsp::SourcePosition end;

  bool contains(const Span& inner) const {
    return begin_byte <= inner.begin_byte && inner.end_byte <= end_byte;
  }
  bool operator==(const Span&) const = default;
};

struct CallInstance {
  std::string id;       // "<project>:<file>:<byte offset of '('>"
  std::string project;
  std::string file;     // path relative to the project's environment root
  std::string callee_name;
  std::string callee_expr;  // e.g. "self.arguments.map"
  Span callee;              // the callee name token; where the analyzer is queried
  Span call;                // callee expression through ')'
  Span args;                // inside the parentheses, trimmed to the first/last token
  std::optional<Span> enclosing_fn;  // absent for calls outside any function body
  std::string enclosing_fn_name;
  std::string ground_truth_args;
  std::vector<std::string> left_context;   // enclosing function tokens before `args`
  std::vector<std::string> right_context;  // enclosing function tokens after `args`
  bool raised = false;     // operand of a `raise` statement
  bool decorator = false;

  bool in_function() const { return enclosing_fn.has_value(); }
  // Tokens of the arguments, comments stripped.
  std::vector<std::string> argument_tokens() const;
};

Json to_json(const Span& span);
Span span_from_json(const Json& j);

Json to_json(const CallInstance& inst);
CallInstance instance_from_json(const Json& j);

}  // namespace callctx::extract
