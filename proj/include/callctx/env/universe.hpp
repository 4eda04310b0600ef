#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "callctx/env/environment.hpp"
#include "callctx/util/json.hpp"

namespace callctx::env {

enum class Origin { InProject, ThirdParty, Stdlib };

std::string_view origin_name(Origin o);  // "in-project" | "third-party" | "stdlib"
std::optional<Origin> origin_from_name(std::string_view name);

// Source files visible to one project's analyzer. Paths are logical:
// environment files are relative to env_root, stdlib files carry the
// "@stdlib/" prefix and are relative to stdlib_root.
class SourceUniverse {
 public:
  struct File {
    std::string path;
    Origin origin;
  };

  static constexpr std::string_view kStdlibPrefix = "@stdlib/";

  std::string project;
  std::filesystem::path env_root;
  std::filesystem::path stdlib_root;
  std::vector<File> files;  // sorted by path
  std::vector<std::string> top_level;  // importable names installed in the environment
  std::vector<std::string> warnings;

  std::filesystem::path physical(std::string_view logical) const;
  // Logical path of a physical file when it lies inside this universe.
  std::optional<std::string> logical(const std::filesystem::path& physical) const;
  std::optional<Origin> origin_of(std::string_view logical) const;
  std::vector<std::string> in_project_files() const;

  // Serialized with env_root relative to `base` (the directory holding universe.json).
  Json to_json(const std::filesystem::path& base) const;
  static SourceUniverse from_json(const Json& j, const std::filesystem::path& base);
  static SourceUniverse load(const std::filesystem::path& universe_json);

  // Rebuilds the path lookup after `files` changes.
  void index();

 private:
  std::map<std::string, Origin, std::less<>> by_path_;
};

// Lists the project's own files, its dependencies' files and the standard
// library, each tagged with exactly one origin.
SourceUniverse enumerate_sources(const Project& project, const std::filesystem::path& stdlib_root);

// A module is stdlib when it resolves under the interpreter's library and no
// installed distribution provides it.
bool is_stdlib_module(std::string_view module, const SourceUniverse& universe);

}  // namespace callctx::env
