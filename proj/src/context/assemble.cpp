#include "callctx/context/assemble.hpp"

#include <algorithm>
#include <charconv>

namespace callctx::context {

std::string_view template_name(Template t) { return t == Template::DecoderOnly ? "decoder" : "enc-dec"; }

std::optional<Template> template_from_name(std::string_view name) {
  if (name == "decoder" || name == "decoder-only") return Template::DecoderOnly;
  if (name == "enc-dec" || name == "encoder-decoder") return Template::EncoderDecoder;
  return std::nullopt;
}

std::string_view mode_name(Mode m) { return m == Mode::Unidirectional ? "unidirectional" : "infilling"; }

std::optional<Mode> mode_from_name(std::string_view name) {
  if (name == "unidirectional") return Mode::Unidirectional;
  if (name == "infilling" || name == "in-filling") return Mode::Infilling;
  return std::nullopt;
}

std::optional<UsageOrder> usage_order_from_name(std::string_view name) {
  if (name == "default") return UsageOrder::Default;
  if (name == "first") return UsageOrder::MostSimilarFirst;
  if (name == "last") return UsageOrder::MostSimilarLast;
  return std::nullopt;
}

std::string_view usage_order_name(UsageOrder o) {
  switch (o) {
    case UsageOrder::Default:
      return "default";
    case UsageOrder::MostSimilarFirst:
      return "first";
    case UsageOrder::MostSimilarLast:
      return "last";
  }
  return "default";
}

std::size_t BudgetPlan::separator_overhead(Template t, std::size_t usages) {
  // decoder: <s> Imp </s> U.. </s> X_L ; enc-dec: <s> X_L <PREDICT> X_R </s> Imp </s> U.. </s>
  return t == Template::DecoderOnly ? 2 + usages : 4 + usages;
}

bool BudgetPlan::feasible(Template t) const {
  std::size_t fixed = separator_overhead(t, max_usages) + implementation + max_usages * per_usage;
  return left_ctx >= 1 && fixed + left_ctx + right_ctx <= total;
}

Json BudgetPlan::to_json() const {
  return Json{{"name", name},
              {"total", total},
              {"left_ctx", left_ctx},
              {"right_ctx", right_ctx},
              {"implementation", implementation},
              {"per_usage", per_usage},
              {"max_usages", max_usages}};
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {"cdi",       "finetune",  "512x3x64",
                                                  "1024x3x128", "1024x6x64", "1024x8x64"};
  return kNames;
}

namespace {

std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

BudgetPlan make_plan(std::string_view preset, Template t, Mode mode, std::optional<std::size_t> total) {
  if (t == Template::DecoderOnly && mode == Mode::Infilling) {
    throw AssemblyError("decoder-only inputs are unidirectional; in-filling needs the enc-dec template");
  }
  BudgetPlan plan;
  plan.name = std::string(preset);
  if (preset == "cdi") {
    // Analyzer context gets a quarter of the input: half to Imp, half shared by the usages.
    plan.total = total.value_or(512);
    plan.max_usages = kDefaultUsageCount;
    plan.implementation = plan.total / 8;
    plan.per_usage = plan.total / (8 * plan.max_usages);
  } else if (preset == "finetune") {
    plan.total = total.value_or(1024);
    plan.max_usages = kDefaultUsageCount;
    plan.implementation = plan.total / 8;
    plan.per_usage = plan.total / 8;
  } else {
    auto x1 = preset.find('x');
    auto x2 = x1 == std::string_view::npos ? x1 : preset.find('x', x1 + 1);
    if (x2 == std::string_view::npos) throw AssemblyError("unknown budget preset: " + std::string(preset));
    auto t0 = parse_size(preset.substr(0, x1));
    auto m = parse_size(preset.substr(x1 + 1, x2 - x1 - 1));
    auto u = parse_size(preset.substr(x2 + 1));
    if (!t0 || !m || !u) throw AssemblyError("unknown budget preset: " + std::string(preset));
    plan.total = total.value_or(*t0);
    plan.max_usages = *m;
    plan.per_usage = *u;
    plan.implementation = plan.total / 8;
  }
  std::size_t fixed = BudgetPlan::separator_overhead(t, plan.max_usages) + plan.implementation +
                      plan.max_usages * plan.per_usage;
  if (fixed >= plan.total) {
    throw AssemblyError("budget preset '" + plan.name + "' leaves no room for the left context at total " +
                        std::to_string(plan.total));
  }
  std::size_t rest = plan.total - fixed;
  if (mode == Mode::Infilling) {
    plan.right_ctx = rest / 4;  // right gets a third of the left
    plan.left_ctx = rest - plan.right_ctx;
  } else {
    plan.left_ctx = rest;
  }
  return plan;
}

std::vector<std::string> truncate(std::span<const std::string> tokens, std::size_t budget, Direction direction) {
  if (tokens.size() <= budget) return {tokens.begin(), tokens.end()};
  if (direction == Direction::DropFromRight) return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(budget)};
  return {tokens.end() - static_cast<std::ptrdiff_t>(budget), tokens.end()};
}

Json ContextBundle::to_json() const {
  Json usages_json = Json::array();
  for (const auto& u : usages) usages_json.push_back(context::to_json(u));
  return Json{{"instance_id", instance_id},
              {"left", left},
              {"right", right},
              {"implementation", implementation ? Json(*implementation) : Json(nullptr)},
              {"usages", usages_json}};
}

ContextBundle ContextBundle::from_json(const Json& j) {
  ContextBundle b;
  b.instance_id = j.value("instance_id", std::string());
  b.left = j.at("left").get<std::vector<std::string>>();
  b.right = j.at("right").get<std::vector<std::string>>();
  if (j.contains("implementation") && !j.at("implementation").is_null()) {
    b.implementation = j.at("implementation").get<std::vector<std::string>>();
  }
  for (const auto& u : j.at("usages")) b.usages.push_back(usage_from_json(u));
  return b;
}

std::string AssembledInput::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Json AssembledInput::to_json() const {
  Json slots_json = Json::array();
  for (const auto& s : slots) slots_json.push_back(Json{{"name", s.name}, {"begin", s.begin}, {"end", s.end}});
  return Json{{"template", template_name(tmpl)}, {"length", length()}, {"text", text()}, {"slots", slots_json}};
}

namespace {

class Builder {
 public:
  explicit Builder(AssembledInput& out) : out_(out) {}

  void marker(std::string_view m) { out_.tokens.emplace_back(m); }

  void component(std::string name, const std::vector<std::string>& tokens) {
    std::size_t begin = out_.tokens.size();
    out_.tokens.insert(out_.tokens.end(), tokens.begin(), tokens.end());
    out_.slots.push_back(Slot{std::move(name), begin, out_.tokens.size()});
  }

 private:
  AssembledInput& out_;
};

}  // namespace

AssembledInput assemble(const ContextBundle& bundle, const BudgetPlan& plan, Template tmpl, Mode mode,
                        UsageOrder order) {
  if (!plan.feasible(tmpl)) throw AssemblyError("budget plan '" + plan.name + "' is infeasible");
  if (tmpl == Template::DecoderOnly && mode == Mode::Infilling) {
    throw AssemblyError("decoder-only inputs are unidirectional");
  }

  std::vector<std::string> imp;
  if (bundle.implementation && plan.implementation > 0) {
    imp = truncate(*bundle.implementation, plan.implementation, Direction::DropFromRight);
  }
  // usages[i] holds the (i+1)-th most similar usage.
  std::vector<std::vector<std::string>> usages;
  if (plan.per_usage > 0) {
    for (std::size_t i = 0; i < std::min(plan.max_usages, bundle.usages.size()); ++i) {
      auto u = truncate(bundle.usages[i].tokens, plan.per_usage, Direction::DropFromLeft);
      if (u.empty()) continue;
      usages.push_back(std::move(u));
    }
  }

  bool analyzer = !imp.empty() || !usages.empty();
  std::size_t separators = 0;
  if (analyzer) {
    separators = 1 + (imp.empty() ? 0 : 1) + usages.size();
    if (tmpl == Template::EncoderDecoder) separators += 2;  // <PREDICT> and the </s> after X_R
  } else if (tmpl == Template::EncoderDecoder) {
    separators = 1;
  }
  std::size_t used = separators + imp.size();
  for (const auto& u : usages) used += u.size();
  if (used >= plan.total) throw AssemblyError("no room left for the left context");
  std::size_t free = plan.total - used;

  std::size_t right_budget = 0;
  if (mode == Mode::Infilling) {
    right_budget = std::min(bundle.right.size(), std::max(free / 4, free - std::min(free, bundle.left.size())));
  }
  std::size_t left_budget = std::min(bundle.left.size(), free - right_budget);
  auto left = truncate(bundle.left, left_budget, Direction::DropFromLeft);
  auto right = truncate(bundle.right, right_budget, Direction::DropFromRight);

  bool most_similar_first = order == UsageOrder::MostSimilarFirst ||
                            (order == UsageOrder::Default && tmpl == Template::EncoderDecoder);
  std::vector<std::size_t> usage_order(usages.size());
  for (std::size_t i = 0; i < usages.size(); ++i) usage_order[i] = most_similar_first ? i : usages.size() - 1 - i;

  AssembledInput out;
  out.tmpl = tmpl;
  Builder b(out);
  if (tmpl == Template::DecoderOnly) {
    if (analyzer) {
      b.marker(kBos);
      if (!imp.empty()) {
        b.component("implementation", imp);
        b.marker(kSep);
      }
      for (auto i : usage_order) {
        b.component("usage_" + std::to_string(i + 1), usages[i]);
        b.marker(kSep);
      }
    }
    b.component("left", left);
  } else {
    if (analyzer) b.marker(kBos);
    b.component("left", left);
    b.marker(kPredict);
    b.component("right", right);
    if (analyzer) {
      b.marker(kSep);
      if (!imp.empty()) {
        b.component("implementation", imp);
        b.marker(kSep);
      }
      for (auto i : usage_order) {
        b.component("usage_" + std::to_string(i + 1), usages[i]);
        b.marker(kSep);
      }
    }
  }
  return out;
}

}  // namespace callctx::context
