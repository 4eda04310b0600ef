#include "callctx/env/universe.hpp"

#include <algorithm>

#include "callctx/util/io.hpp"

namespace callctx::env {

namespace fs = std::filesystem;

std::string_view origin_name(Origin o) {
  switch (o) {
    case Origin::InProject:
      return "in-project";
    case Origin::ThirdParty:
      return "third-party";
    case Origin::Stdlib:
      return "stdlib";
  }
  return "third-party";
}

std::optional<Origin> origin_from_name(std::string_view name) {
  if (name == "in-project") return Origin::InProject;
  if (name == "third-party") return Origin::ThirdParty;
  if (name == "stdlib") return Origin::Stdlib;
  return std::nullopt;
}

fs::path SourceUniverse::physical(std::string_view logical) const {
  if (logical.substr(0, kStdlibPrefix.size()) == kStdlibPrefix) {
    return stdlib_root / fs::path(std::string(logical.substr(kStdlibPrefix.size())));
  }
  return env_root / fs::path(std::string(logical));
}

std::optional<std::string> SourceUniverse::logical(const fs::path& physical) const {
  auto abs = fs::absolute(physical).lexically_normal();
  if (auto rel = relative_under(abs, fs::absolute(env_root))) return rel->generic_string();
  if (!stdlib_root.empty()) {
    if (auto rel = relative_under(abs, fs::absolute(stdlib_root))) {
      return std::string(kStdlibPrefix) + rel->generic_string();
    }
  }
  return std::nullopt;
}

std::optional<Origin> SourceUniverse::origin_of(std::string_view logical) const {
  auto it = by_path_.find(logical);
  if (it != by_path_.end()) return it->second;
  // Files the enumeration skipped (compiled stubs, tests) still classify by location.
  if (logical.substr(0, kStdlibPrefix.size()) == kStdlibPrefix) return Origin::Stdlib;
  return std::nullopt;
}

std::vector<std::string> SourceUniverse::in_project_files() const {
  std::vector<std::string> out;
  for (const auto& f : files) {
    if (f.origin == Origin::InProject) out.push_back(f.path);
  }
  return out;
}

void SourceUniverse::index() {
  by_path_.clear();
  for (const auto& f : files) by_path_.emplace(f.path, f.origin);
}

Json SourceUniverse::to_json(const fs::path& base) const {
  Json files_json = Json::array();
  for (const auto& f : files) files_json.push_back(Json{{"path", f.path}, {"origin", origin_name(f.origin)}});
  auto rel_env = fs::absolute(env_root).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal());
  return Json{{"project", project},
              {"env_root", rel_env.generic_string()},
              {"stdlib_root", stdlib_root.string()},
              {"top_level", top_level},
              {"files", files_json},
              {"warnings", warnings}};
}

SourceUniverse SourceUniverse::from_json(const Json& j, const fs::path& base) {
  SourceUniverse u;
  u.project = j.at("project").get<std::string>();
  fs::path env = j.at("env_root").get<std::string>();
  u.env_root = env.is_absolute() ? env : (base / env).lexically_normal();
  u.stdlib_root = j.value("stdlib_root", std::string());
  u.top_level = j.value("top_level", std::vector<std::string>{});
  for (const auto& f : j.at("files")) {
    u.files.push_back(File{f.at("path").get<std::string>(),
                           origin_from_name(f.at("origin").get<std::string>()).value_or(Origin::ThirdParty)});
  }
  u.warnings = j.value("warnings", std::vector<std::string>{});
  u.index();
  return u;
}

SourceUniverse SourceUniverse::load(const fs::path& universe_json) {
  return from_json(read_json(universe_json), fs::absolute(universe_json).parent_path());
}

namespace {

bool is_source(const fs::path& p) { return p.extension() == ".py" || p.extension() == ".pyi"; }

bool skipped_dir(const std::string& name) {
  return name == "site-packages" || name == "dist-packages" || name == "__pycache__" || name == "test" ||
         name == "tests" || name == "idlelib" || name == "turtledemo" || name == "ensurepip";
}

}  // namespace

SourceUniverse enumerate_sources(const Project& project, const fs::path& stdlib_root) {
  SourceUniverse u;
  u.project = project.name;
  u.env_root = fs::absolute(project.env_root).lexically_normal();
  u.stdlib_root = stdlib_root.empty() ? fs::path() : fs::absolute(stdlib_root).lexically_normal();

  fs::path site = find_site_packages(u.env_root);
  auto site_rel = site.lexically_relative(u.env_root);
  auto scan = scan_site_packages(site);
  for (const auto& broken : scan.broken) {
    u.warnings.push_back("unreadable metadata in " + broken + "; its files are omitted");
  }
  for (const auto& dist : scan.distributions) {
    Origin origin = normalize_name(dist.metadata.name) == normalize_name(project.name) ? Origin::InProject
                                                                                      : Origin::ThirdParty;
    for (const auto& top : dist.top_level) u.top_level.push_back(top);
    for (const auto& f : dist.files) {
      if (!is_source(f) || *f.begin() == "..") continue;
      if (!fs::exists(site / f)) continue;
      u.files.push_back({(site_rel / f).generic_string(), origin});
    }
  }

  if (!u.stdlib_root.empty() && fs::is_directory(u.stdlib_root)) {
    for (auto it = fs::recursive_directory_iterator(u.stdlib_root); it != fs::recursive_directory_iterator(); ++it) {
      if (it->is_directory() && skipped_dir(it->path().filename().string())) {
        it.disable_recursion_pending();
        continue;
      }
      if (it->is_regular_file() && is_source(it->path())) {
        u.files.push_back({std::string(SourceUniverse::kStdlibPrefix) +
                               it->path().lexically_relative(u.stdlib_root).generic_string(),
                           Origin::Stdlib});
      }
    }
  }

  std::sort(u.files.begin(), u.files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  u.files.erase(std::unique(u.files.begin(), u.files.end(),
                            [](const auto& a, const auto& b) { return a.path == b.path; }),
                u.files.end());
  std::sort(u.top_level.begin(), u.top_level.end());
  u.top_level.erase(std::unique(u.top_level.begin(), u.top_level.end()), u.top_level.end());
  u.index();
  return u;
}

bool is_stdlib_module(std::string_view module, const SourceUniverse& universe) {
  std::string top(module.substr(0, module.find('.')));
  if (std::binary_search(universe.top_level.begin(), universe.top_level.end(), top)) return false;
  static const std::set<std::string, std::less<>> kBuiltinModules = {"sys", "builtins", "_thread", "gc",
                                                                     "marshal", "posix", "time", "math"};
  if (kBuiltinModules.count(top)) return true;
  if (universe.stdlib_root.empty()) return false;
  return fs::exists(universe.stdlib_root / (top + ".py")) || fs::exists(universe.stdlib_root / (top + ".pyi")) ||
         fs::exists(universe.stdlib_root / top / "__init__.py") ||
         fs::exists(universe.stdlib_root / top / "__init__.pyi");
}

}  // namespace callctx::env
