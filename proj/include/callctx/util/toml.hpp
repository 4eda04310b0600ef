#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "callctx/util/json.hpp"

namespace callctx {

class TomlError : public std::runtime_error {
 public:
  TomlError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// TOML document as JSON. Dates and times are rejected.
Json parse_toml(std::string_view text);

}  // namespace callctx
