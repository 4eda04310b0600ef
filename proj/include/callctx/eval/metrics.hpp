#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/analysis/signature.hpp"

namespace callctx::eval {

// Argument text in comparable form: enclosing parentheses, comments and a
// trailing comma removed, whitespace canonical.
struct NormalizedArgs {
  std::vector<std::string> tokens;
  std::string text;     // canonical rendering of `tokens`
  bool lexed = true;    // false when lexing failed and whitespace splitting was used
};

NormalizedArgs normalize_args(std::string_view text);

// Case-sensitive comparison of normalized token sequences.
bool exact_match(std::string_view pred, std::string_view truth);

// Levenshtein distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);
// 100 * (1 - lev / max length) of the raw strings; both empty gives 100.
double edit_similarity(std::string_view a, std::string_view b);
// edit_similarity of the normalized texts.
double normalized_edit_similarity(std::string_view pred, std::string_view truth);

struct ArgumentList {
  std::size_t positional = 0;
  std::vector<std::string> keywords;
  bool star = false;         // *expr
  bool double_star = false;  // **expr
};

// Splits a call's argument text. Empty when it is not a valid argument list.
std::optional<ArgumentList> parse_arguments(std::string_view text);

struct SpmResult {
  bool match = false;
  bool parse_failure = false;
};

// Whether the arguments bind to `signature`: known keywords, positional
// capacity, no parameter bound twice and, when `require_all` is set, every
// parameter without a default bound.
SpmResult spm(std::string_view pred, const analysis::Signature& signature, bool require_all = true);

}  // namespace callctx::eval
