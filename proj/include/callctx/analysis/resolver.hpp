#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "callctx/analysis/implementation.hpp"
#include "callctx/context/usage.hpp"
#include "callctx/env/universe.hpp"
#include "callctx/extract/call_instance.hpp"
#include "callctx/lsp/session.hpp"
#include "callctx/python/source_file.hpp"

namespace callctx::analysis {

// Logical path of definitions outside the universe (analyzer-bundled stubs).
inline constexpr std::string_view kExternalPrefix = "@external";

struct DefinitionSite {
  std::string file;  // logical path
  extract::Span range;

  bool operator==(const DefinitionSite&) const = default;
};

Json to_json(const DefinitionSite& d);
DefinitionSite definition_from_json(const Json& j);

struct ResolvedCall {
  extract::CallInstance instance;
  DefinitionSite def;
  env::Origin origin = env::Origin::InProject;
  std::string def_group_id;
  std::vector<DefinitionSite> alternates;  // further definition results, not used
  std::optional<ImplementationContext> implementation;
  std::vector<context::UsageContext> usages;  // ranked, most similar first
  std::size_t usage_candidates = 0;           // before capping
};

Json to_json(const ResolvedCall& r);
ResolvedCall resolved_from_json(const Json& j);

// Stable id of a definition: digest of its file and start byte.
std::string group_id(const DefinitionSite& def);

// Parsed files shared across threads. Unparseable files are cached as null.
class SourceCache {
 public:
  std::shared_ptr<const python::SourceFile> get(const std::filesystem::path& physical);

 private:
  std::mutex mutex_;
  std::map<std::filesystem::path, std::shared_ptr<const python::SourceFile>> files_;
};

struct Resolution {
  std::optional<ResolvedCall> call;
  std::string cause;  // why the call is unresolved
};

// Queries the definition of `inst` at its callee name. The first returned
// range becomes the definition; the rest are kept as alternates.
Resolution resolve_call(lsp::AnalyzerClient& client, const env::SourceUniverse& universe, SourceCache& cache,
                        const extract::CallInstance& inst);

// Usages of `target` among `group` (calls sharing its definition): same-file
// calls that end before the target's arguments and calls in other project
// files. Each carries the enclosing function of the usage site, cut at the end
// of the usage call when that function also encloses the target.
std::vector<context::UsageContext> collect_usages(const ResolvedCall& target,
                                                  const std::vector<const ResolvedCall*>& group,
                                                  const std::map<std::string, env::Origin, std::less<>>& file_origin,
                                                  SourceCache& cache, const env::SourceUniverse& universe);

// Groups `calls` by (project, definition), then ranks and stores at most
// `max_stored` usages on each call.
void attach_usages(std::vector<ResolvedCall>& calls, const env::SourceUniverse& universe, SourceCache& cache,
                   std::size_t max_stored);

}  // namespace callctx::analysis
