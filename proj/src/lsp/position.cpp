#include "callctx/lsp/position.hpp"

#include <algorithm>
#include <stdexcept>

namespace callctx::lsp {

std::optional<OffsetEncoding> parse_encoding(std::string_view name) {
  if (name == "utf-8") return OffsetEncoding::Utf8;
  if (name == "utf-16") return OffsetEncoding::Utf16;
  if (name == "utf-32") return OffsetEncoding::Utf32;
  return std::nullopt;
}

std::string_view encoding_name(OffsetEncoding encoding) {
  switch (encoding) {
    case OffsetEncoding::Utf8:
      return "utf-8";
    case OffsetEncoding::Utf16:
      return "utf-16";
    case OffsetEncoding::Utf32:
      return "utf-32";
  }
  return "utf-16";
}

Json to_json(const SourcePosition& pos) {
  return Json{{"line", pos.line}, {"character", pos.character}};
}

Json to_json(const SourceRange& range) {
  return Json{{"uri", range.uri},
              {"range", Json{{"start", to_json(range.start)}, {"end", to_json(range.end)}}}};
}

SourcePosition position_from_json(const Json& j) {
  SourcePosition pos;
  pos.line = j.at("line").get<std::uint32_t>();
  pos.character = j.at("character").get<std::uint32_t>();
  return pos;
}

SourceRange location_from_json(const Json& j) {
  SourceRange range;
  // LocationLink carries targetUri/targetSelectionRange instead.
  if (j.contains("targetUri")) {
    range.uri = j.at("targetUri").get<std::string>();
    const Json& r = j.contains("targetSelectionRange") ? j.at("targetSelectionRange")
                                                       : j.at("targetRange");
    range.start = position_from_json(r.at("start"));
    range.end = position_from_json(r.at("end"));
    return range;
  }
  range.uri = j.at("uri").get<std::string>();
  range.start = position_from_json(j.at("range").at("start"));
  range.end = position_from_json(j.at("range").at("end"));
  return range;
}

LineIndex::LineIndex(std::string text) : text_(std::move(text)) {
  starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '\n') starts_.push_back(i + 1);
  }
}

std::size_t LineIndex::line_of(std::size_t byte_offset) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), byte_offset);
  return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

namespace {

std::size_t utf8_sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: count it as one unit
}

std::size_t units_for(std::size_t seq_len, OffsetEncoding enc) {
  switch (enc) {
    case OffsetEncoding::Utf8:
      return seq_len;
    case OffsetEncoding::Utf16:
      return seq_len == 4 ? 2 : 1;
    case OffsetEncoding::Utf32:
      return 1;
  }
  return 1;
}

std::size_t line_end(const std::string& text, std::size_t start) {
  auto nl = text.find('\n', start);
  std::size_t end = nl == std::string::npos ? text.size() : nl;
  if (end > start && text[end - 1] == '\r') --end;
  return end;
}

}  // namespace

SourcePosition LineIndex::position_of(std::size_t byte_offset, OffsetEncoding enc) const {
  byte_offset = std::min(byte_offset, text_.size());
  std::size_t line = line_of(byte_offset);
  std::size_t units = 0;
  for (std::size_t i = starts_[line]; i < byte_offset;) {
    std::size_t len = utf8_sequence_length(static_cast<unsigned char>(text_[i]));
    units += units_for(len, enc);
    i += len;
  }
  return SourcePosition{static_cast<std::uint32_t>(line), static_cast<std::uint32_t>(units)};
}

std::size_t LineIndex::offset_of(SourcePosition pos, OffsetEncoding enc) const {
  if (pos.line >= starts_.size()) return text_.size();
  std::size_t i = starts_[pos.line];
  std::size_t end = line_end(text_, i);
  std::size_t units = 0;
  while (i < end && units < pos.character) {
    std::size_t len = utf8_sequence_length(static_cast<unsigned char>(text_[i]));
    units += units_for(len, enc);
    i += len;
  }
  return std::min(i, end);
}

}  // namespace callctx::lsp
