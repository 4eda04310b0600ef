#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "callctx/extract/call_instance.hpp"
#include "callctx/util/json.hpp"

namespace callctx::context {

using TokenSet = std::set<std::string, std::less<>>;

TokenSet token_set(const std::vector<std::string>& tokens);

// Another call site of the same definition, offered as an example.
struct UsageContext {
  std::string instance_id;
  std::string file;
  extract::Span source;               // the usage's call span
  std::vector<std::string> tokens;    // U_i: enclosing-function tokens of the usage
  std::vector<std::string> left_tokens;  // basis of S_u
  double similarity = 0.0;
  std::string args_text;
  bool same_file = false;             // same file as the target, and before it
  std::uint32_t distance = 0;         // bytes between the usage call and the target's arguments (same file only)
};

Json to_json(const UsageContext& u, bool with_left_tokens = false);
UsageContext usage_from_json(const Json& j);

}  // namespace callctx::context
