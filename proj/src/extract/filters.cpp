#include "callctx/extract/filters.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "callctx/python/lexer.hpp"
#include "callctx/util/io.hpp"

namespace callctx::extract {

std::string rule_tag(Rule rule) { return "R" + std::to_string(static_cast<int>(rule)); }

std::optional<Rule> rule_from_tag(std::string_view tag) {
  if (tag.size() != 2 || tag[0] != 'R' || tag[1] < '1' || tag[1] > '8') return std::nullopt;
  return static_cast<Rule>(tag[1] - '0');
}

FilterConfig FilterConfig::from_file(const std::filesystem::path& path) {
  FilterConfig config;
  config.denylist.clear();
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    config.denylist.insert(line.substr(b, e - b + 1));
  }
  return config;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_error_or_logging(const CallInstance& inst) {
  const std::string& name = inst.callee_name;
  if (inst.raised) return true;
  if (name == "print" || name == "warn" || name == "pprint") return true;
  if (ends_with(name, "Error") || ends_with(name, "Exception") || ends_with(name, "Warning")) return true;
  static const std::set<std::string, std::less<>> kLogMethods = {
      "debug", "info", "warning", "error", "exception", "critical", "fatal", "log"};
  if (kLogMethods.count(name)) {
    auto dot = inst.callee_expr.rfind('.');
    std::string receiver = dot == std::string::npos ? std::string() : lower(inst.callee_expr.substr(0, dot));
    return receiver.find("log") != std::string::npos;
  }
  return false;
}

bool is_type_conversion(const CallInstance& inst) {
  static const std::set<std::string, std::less<>> kTypes = {
      "int",   "float",     "complex", "str",   "bytes",      "bytearray", "bool",   "list", "tuple",
      "dict",  "set",       "frozenset", "range", "memoryview", "object",  "type",   "slice"};
  // Only the builtin spelling; `np.float64(x)` is an ordinary call.
  return inst.callee_expr == inst.callee_name && kTypes.count(inst.callee_name) > 0;
}

bool has_string_literal(const CallInstance& inst) {
  try {
    for (const auto& t : python::tokenize_fragment(inst.ground_truth_args)) {
      if (t.kind == python::TokenKind::String) return true;
    }
  } catch (const python::SyntaxError&) {
    return true;
  }
  return false;
}

}  // namespace

FilterVerdict apply_filters(const CallInstance& inst, Resolution resolution, const FilterConfig& config) {
  if (is_error_or_logging(inst)) return FilterVerdict::reject(Rule::ErrorOrLogging);
  if (is_type_conversion(inst)) return FilterVerdict::reject(Rule::TypeConversion);
  if (inst.callee_name.rfind("assert", 0) == 0) return FilterVerdict::reject(Rule::TestAssertion);
  if (!inst.in_function()) return FilterVerdict::reject(Rule::OutsideFunction);
  if (inst.args.begin_byte == inst.args.end_byte) return FilterVerdict::reject(Rule::NoArguments);
  if (has_string_literal(inst)) return FilterVerdict::reject(Rule::StringLiteral);
  if (config.denylist.count(inst.callee_name)) return FilterVerdict::reject(Rule::Denylisted);
  if (resolution == Resolution::Unresolved) return FilterVerdict::reject(Rule::Unresolved);
  return FilterVerdict::keep();
}

void RuleHistogram::add(const FilterVerdict& v) {
  if (v.kept) {
    ++kept_;
  } else {
    ++counts_[static_cast<std::size_t>(*v.rule) - 1];
  }
}

void RuleHistogram::merge(const RuleHistogram& other) {
  kept_ += other.kept_;
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

Json RuleHistogram::to_json() const {
  Json rejected = Json::object();
  for (int r = 1; r <= 8; ++r) rejected[rule_tag(static_cast<Rule>(r))] = counts_[static_cast<std::size_t>(r - 1)];
  return Json{{"kept", kept_}, {"rejected", rejected}};
}

}  // namespace callctx::extract
