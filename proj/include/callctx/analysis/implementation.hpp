#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "callctx/analysis/signature.hpp"
#include "callctx/python/source_file.hpp"
#include "callctx/util/json.hpp"

namespace callctx::analysis {

struct ImplementationContext {
  std::string kind;                 // "function" or "class"
  std::string text;                 // source text from the header on
  std::vector<std::string> tokens;  // Imp
  std::optional<Signature> signature;  // as seen by the caller (receiver removed when bound)
  bool stub = false;                // declaration without a body: header only
  bool bound_receiver = false;

  Json to_json() const;
  static ImplementationContext from_json(const Json& j);
};

// Body is only `...` (after an optional docstring), or the def is an @overload.
bool is_stub(const python::SourceFile& file, int scope_index);

// Implementation of the def/class whose name starts at `name_byte`. `receiver`
// is the callee expression's receiver text ("self.arguments" for
// `self.arguments.map`), empty for bare names. Classes contribute their header
// and `__init__`, with the instance receiver bound.
std::optional<ImplementationContext> extract_implementation(const python::SourceFile& file, std::uint32_t name_byte,
                                                            bool stub_file, const std::string& receiver);

}  // namespace callctx::analysis
