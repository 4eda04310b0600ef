#include "callctx/analysis/resolver.hpp"

#include <algorithm>

#include "callctx/context/similarity.hpp"
#include "callctx/extract/extractor.hpp"
#include "callctx/util/io.hpp"

namespace callctx::analysis {

namespace fs = std::filesystem;
using extract::CallInstance;

Json to_json(const DefinitionSite& d) { return Json{{"file", d.file}, {"range", extract::to_json(d.range)}}; }

DefinitionSite definition_from_json(const Json& j) {
  return DefinitionSite{j.at("file").get<std::string>(), extract::span_from_json(j.at("range"))};
}

Json to_json(const ResolvedCall& r) {
  Json j = extract::to_json(r.instance);
  j["def_range"] = to_json(r.def);
  j["origin"] = env::origin_name(r.origin);
  j["def_group_id"] = r.def_group_id;
  Json alts = Json::array();
  for (const auto& a : r.alternates) alts.push_back(to_json(a));
  j["alternates"] = alts;
  j["implementation"] = r.implementation ? r.implementation->to_json() : Json(nullptr);
  Json usages = Json::array();
  for (const auto& u : r.usages) usages.push_back(context::to_json(u, true));
  j["usages"] = usages;
  j["usage_candidates"] = r.usage_candidates;
  return j;
}

ResolvedCall resolved_from_json(const Json& j) {
  ResolvedCall r;
  r.instance = extract::instance_from_json(j);
  r.def = definition_from_json(j.at("def_range"));
  r.origin = env::origin_from_name(j.at("origin").get<std::string>()).value_or(env::Origin::ThirdParty);
  r.def_group_id = j.at("def_group_id").get<std::string>();
  for (const auto& a : j.value("alternates", Json::array())) r.alternates.push_back(definition_from_json(a));
  if (j.contains("implementation") && !j.at("implementation").is_null()) {
    r.implementation = ImplementationContext::from_json(j.at("implementation"));
  }
  for (const auto& u : j.value("usages", Json::array())) r.usages.push_back(context::usage_from_json(u));
  r.usage_candidates = j.value("usage_candidates", r.usages.size());
  return r;
}

std::string group_id(const DefinitionSite& def) {
  return sha256_hex(def.file + ":" + std::to_string(def.range.begin_byte)).substr(0, 16);
}

std::shared_ptr<const python::SourceFile> SourceCache::get(const fs::path& physical) {
  {
    std::lock_guard lock(mutex_);
    auto it = files_.find(physical);
    if (it != files_.end()) return it->second;
  }
  std::shared_ptr<const python::SourceFile> parsed;
  try {
    parsed = std::make_shared<const python::SourceFile>(python::SourceFile::parse(read_file(physical)));
  } catch (const std::exception&) {
    parsed = nullptr;
  }
  std::lock_guard lock(mutex_);
  return files_.emplace(physical, parsed).first->second;
}

namespace {

std::string receiver_of(const std::string& callee_expr) {
  auto dot = callee_expr.rfind('.');
  return dot == std::string::npos ? std::string() : callee_expr.substr(0, dot);
}

bool external_stdlib(const fs::path& p) {
  for (const auto& part : p) {
    if (part == "stdlib" || part == "typeshed") return true;
  }
  return false;
}

struct Located {
  DefinitionSite site;
  fs::path physical;
  env::Origin origin;
};

std::optional<Located> locate(const lsp::SourceRange& range, const env::SourceUniverse& universe, SourceCache& cache,
                              lsp::OffsetEncoding encoding) {
  fs::path physical = uri_to_path(range.uri);
  Located out;
  out.physical = physical;
  if (auto logical = universe.logical(physical)) {
    out.site.file = *logical;
    auto origin = universe.origin_of(*logical);
    if (!origin) {
      origin = logical->starts_with(env::SourceUniverse::kStdlibPrefix) ? env::Origin::Stdlib : env::Origin::ThirdParty;
    }
    out.origin = *origin;
  } else {
    out.site.file = std::string(kExternalPrefix) + fs::absolute(physical).lexically_normal().generic_string();
    out.origin = external_stdlib(physical) ? env::Origin::Stdlib : env::Origin::ThirdParty;
  }
  auto file = cache.get(physical);
  if (!file) return std::nullopt;
  auto begin = static_cast<std::uint32_t>(file->lines().offset_of(range.start, encoding));
  auto end = static_cast<std::uint32_t>(file->lines().offset_of(range.end, encoding));
  out.site.range = extract::make_span(*file, begin, std::max(begin, end));
  return out;
}

}  // namespace

Resolution resolve_call(lsp::AnalyzerClient& client, const env::SourceUniverse& universe, SourceCache& cache,
                        const CallInstance& inst) {
  Resolution res;
  fs::path physical = universe.physical(inst.file);
  auto file = cache.get(physical);
  if (!file) {
    res.cause = "unreadable source file";
    return res;
  }
  auto outcome = client.definition(physical, std::string(file->text()), inst.callee.begin_byte);
  if (outcome.status != lsp::AnalyzerClient::Status::Ok) {
    res.cause = outcome.cause;
    return res;
  }
  if (outcome.ranges.empty()) {
    res.cause = "no definition";
    return res;
  }
  auto encoding = client.encoding();
  auto first = locate(outcome.ranges.front(), universe, cache, encoding);
  if (!first) {
    res.cause = "definition file unreadable: " + outcome.ranges.front().uri;
    return res;
  }
  ResolvedCall call;
  call.instance = inst;
  call.def = first->site;
  call.origin = first->origin;
  call.def_group_id = group_id(call.def);
  for (std::size_t i = 1; i < outcome.ranges.size(); ++i) {
    if (auto alt = locate(outcome.ranges[i], universe, cache, encoding)) call.alternates.push_back(alt->site);
  }
  auto def_file = cache.get(first->physical);
  call.implementation = extract_implementation(*def_file, call.def.range.begin_byte,
                                               first->physical.extension() == ".pyi", receiver_of(inst.callee_expr));
  res.call = std::move(call);
  return res;
}

std::vector<context::UsageContext> collect_usages(const ResolvedCall& target,
                                                  const std::vector<const ResolvedCall*>& group,
                                                  const std::map<std::string, env::Origin, std::less<>>& file_origin,
                                                  SourceCache& cache, const env::SourceUniverse& universe) {
  std::vector<context::UsageContext> out;
  const auto& t = target.instance;
  auto target_set = context::token_set(t.left_context);
  for (const ResolvedCall* member : group) {
    const auto& u = member->instance;
    if (u.id == t.id || u.project != t.project || !u.enclosing_fn) continue;
    bool same_file = u.file == t.file;
    if (same_file) {
      if (u.call.end_byte > t.args.begin_byte) continue;
    } else {
      auto it = file_origin.find(u.file);
      if (it == file_origin.end() || it->second != env::Origin::InProject) continue;
    }

    context::UsageContext usage;
    usage.instance_id = u.id;
    usage.file = u.file;
    usage.source = u.call;
    usage.args_text = u.ground_truth_args;
    usage.same_file = same_file;
    usage.distance = same_file ? t.args.begin_byte - u.call.end_byte : 0;
    usage.left_tokens = u.left_context;
    bool shares_function = same_file && t.enclosing_fn && u.enclosing_fn->contains(t.args);
    if (shares_function) {
      auto file = cache.get(universe.physical(u.file));
      if (!file) continue;
      usage.tokens = file->tokens_between(u.enclosing_fn->begin_byte, u.call.end_byte);
    } else {
      usage.tokens = u.left_context;
      auto args = u.argument_tokens();
      usage.tokens.insert(usage.tokens.end(), args.begin(), args.end());
      usage.tokens.insert(usage.tokens.end(), u.right_context.begin(), u.right_context.end());
    }
    usage.similarity = context::usage_similarity(target_set, context::token_set(u.left_context)).value;
    out.push_back(std::move(usage));
  }
  return out;
}

void attach_usages(std::vector<ResolvedCall>& calls, const env::SourceUniverse& universe, SourceCache& cache,
                   std::size_t max_stored) {
  std::map<std::pair<std::string, std::string>, std::vector<const ResolvedCall*>> groups;
  for (const auto& c : calls) groups[{c.instance.project, c.def_group_id}].push_back(&c);
  std::map<std::string, env::Origin, std::less<>> file_origin;
  for (const auto& f : universe.files) file_origin.emplace(f.path, f.origin);

  std::vector<std::vector<context::UsageContext>> found(calls.size());
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const auto& group = groups[{calls[i].instance.project, calls[i].def_group_id}];
    found[i] = collect_usages(calls[i], group, file_origin, cache, universe);
  }
  for (std::size_t i = 0; i < calls.size(); ++i) {
    calls[i].usage_candidates = found[i].size();
    calls[i].usages = context::rank_usages(std::move(found[i]), max_stored);
  }
}

}  // namespace callctx::analysis
