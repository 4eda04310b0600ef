#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "callctx/extract/call_instance.hpp"
#include "callctx/python/source_file.hpp"

namespace callctx::extract {

struct ExtractOptions {
  // Also report calls outside function bodies (they fail R4); off for datasets.
  bool include_top_level = false;
};

// All call expressions of `file` in document order of their opening parenthesis.
std::vector<CallInstance> extract_calls(const python::SourceFile& file, std::string_view project,
                                        std::string_view logical_path, const ExtractOptions& options = {});

// Byte offset -> Span with UTF-16 columns.
Span make_span(const python::SourceFile& file, std::uint32_t begin, std::uint32_t end);

}  // namespace callctx::extract
