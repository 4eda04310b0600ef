#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "callctx/extract/call_instance.hpp"

namespace callctx::extract {

// Selection rules, numbered as in the dataset's published criteria.
enum class Rule {
  ErrorOrLogging = 1,   // R1
  TypeConversion = 2,   // R2
  TestAssertion = 3,    // R3
  OutsideFunction = 4,  // R4
  NoArguments = 5,      // R5
  Unresolved = 6,       // R6
  StringLiteral = 7,    // R7
  Denylisted = 8,       // R8
};

std::string rule_tag(Rule rule);  // "R1".."R8"
std::optional<Rule> rule_from_tag(std::string_view tag);

struct FilterVerdict {
  bool kept = true;
  std::optional<Rule> rule;

  static FilterVerdict keep() { return {true, std::nullopt}; }
  static FilterVerdict reject(Rule r) { return {false, r}; }
  bool operator==(const FilterVerdict&) const = default;
};

enum class Resolution { Pending, Resolved, Unresolved };

struct FilterConfig {
  std::set<std::string> denylist{"sleep", "add_argument"};

  // One callee name per line; '#' starts a comment.
  static FilterConfig from_file(const std::filesystem::path& path);
};

// Syntactic rules first, in rule order, then R6, so a verdict never depends
// on whether the analyzer was consulted.
FilterVerdict apply_filters(const CallInstance& inst, Resolution resolution, const FilterConfig& config);

// Rejections per rule plus kept count.
class RuleHistogram {
 public:
  void add(const FilterVerdict& v);
  std::size_t kept() const { return kept_; }
  std::size_t rejected(Rule r) const { return counts_[static_cast<std::size_t>(r) - 1]; }
  Json to_json() const;
  void merge(const RuleHistogram& other);

 private:
  std::size_t kept_ = 0;
  std::array<std::size_t, 8> counts_{};
};

}  // namespace callctx::extract
