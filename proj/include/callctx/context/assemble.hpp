#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/context/similarity.hpp"
#include "callctx/context/usage.hpp"
#include "callctx/util/json.hpp"

namespace callctx::context {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kSep = "</s>";
inline constexpr std::string_view kPredict = "<PREDICT>";

enum class Template { DecoderOnly, EncoderDecoder };
enum class Mode { Unidirectional, Infilling };

// Default: decoder-only lists U_m..U_1 so the best usage sits next to X_L;
// encoder-decoder lists U_1..U_m.
enum class UsageOrder { Default, MostSimilarFirst, MostSimilarLast };

std::string_view template_name(Template t);  // "decoder" | "enc-dec"
std::optional<Template> template_from_name(std::string_view name);
std::string_view mode_name(Mode m);  // "unidirectional" | "infilling"
std::optional<Mode> mode_from_name(std::string_view name);
std::optional<UsageOrder> usage_order_from_name(std::string_view name);  // "default" | "first" | "last"
std::string_view usage_order_name(UsageOrder o);

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token budgets per component. Separators are charged up front for the
// fullest input the template can produce.
struct BudgetPlan {
  std::string name;
  std::size_t total = 0;
  std::size_t left_ctx = 0;
  std::size_t right_ctx = 0;
  std::size_t implementation = 0;
  std::size_t per_usage = 0;
  std::size_t max_usages = 0;

  static std::size_t separator_overhead(Template t, std::size_t usages);
  bool feasible(Template t) const;
  Json to_json() const;
};

// Presets: "cdi", "finetune", and usage-budget variants "512x3x64",
// "1024x3x128", "1024x6x64", "1024x8x64" (total x usages x tokens-per-usage).
// `total` overrides the preset's default input length. Throws AssemblyError.
BudgetPlan make_plan(std::string_view preset, Template t, Mode mode, std::optional<std::size_t> total = {});
const std::vector<std::string>& preset_names();

enum class Direction {
  DropFromRight,  // keep the longest prefix
  DropFromLeft,   // keep the longest suffix
};

std::vector<std::string> truncate(std::span<const std::string> tokens, std::size_t budget, Direction direction);

struct ContextBundle {
  std::string instance_id;
  std::vector<std::string> left;   // X_L
  std::vector<std::string> right;  // X_R
  std::optional<std::vector<std::string>> implementation;
  std::vector<UsageContext> usages;  // ranked, most similar first

  Json to_json() const;
  static ContextBundle from_json(const Json& j);
};

struct Slot {
  std::string name;  // "left", "right", "implementation", "usage_<rank>"
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct AssembledInput {
  Template tmpl = Template::EncoderDecoder;
  std::vector<std::string> tokens;  // with marker tokens
  std::vector<Slot> slots;          // in template order

  std::string text() const;
  std::size_t length() const { return tokens.size(); }
  Json to_json() const;
};

// Truncates each component to the plan (implementation and X_R lose their
// tail, usages and X_L lose their head) and renders the template. Budget left
// unused by short components goes to X_L, or 3:1 to X_L and X_R when
// in-filling. Empty components drop out together with their separator.
AssembledInput assemble(const ContextBundle& bundle, const BudgetPlan& plan, Template tmpl, Mode mode,
                        UsageOrder order = UsageOrder::Default);

}  // namespace callctx::context
