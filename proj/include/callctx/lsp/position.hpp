#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/util/json.hpp"

namespace callctx::lsp {

// How a server counts the `character` field of a position.
enum class OffsetEncoding { Utf8, Utf16, Utf32 };

std::optional<OffsetEncoding> parse_encoding(std::string_view name);
std::string_view encoding_name(OffsetEncoding encoding);

// 0-based line and column, as on the wire.
struct SourcePosition {
  std::uint32_t line = 0;
  std::uint32_t character = 0;

  auto operator<=>(const SourcePosition&) const = default;
};

struct SourceRange {
  std::string uri;
  SourcePosition start;
  SourcePosition end;

  bool operator==(const SourceRange&) const = default;
};

Json to_json(const SourcePosition& pos);
Json to_json(const SourceRange& range);  // LSP Location shape: {uri, range}
SourcePosition position_from_json(const Json& j);
SourceRange location_from_json(const Json& j);

// Maps byte offsets of one document to line/column pairs in any encoding.
class LineIndex {
 public:
  explicit LineIndex(std::string text);

  std::size_t line_count() const { return starts_.size(); }
  std::size_t line_start(std::size_t line) const { return starts_.at(line); }
  std::size_t line_of(std::size_t byte_offset) const;

  SourcePosition position_of(std::size_t byte_offset, OffsetEncoding enc) const;
  // Positions past the end of a line clamp to the line end.
  std::size_t offset_of(SourcePosition pos, OffsetEncoding enc) const;

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::vector<std::size_t> starts_;
};

}  // namespace callctx::lsp
