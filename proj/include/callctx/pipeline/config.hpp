#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "callctx/util/json.hpp"

namespace callctx::pipeline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a run depends on. Relative paths in a config file are resolved
// against the file's directory.
struct RunConfig {
  // [corpus]
  std::vector<std::string> requirements;
  std::filesystem::path registry;  // directory of unpacked packages, for installer "local"
  std::string installer = "local";  // "local" | "pip"
  std::string python = "python3";
  std::filesystem::path stdlib;    // empty: ask the interpreter
  unsigned jobs = 4;

  // [analyzer]
  std::vector<std::string> analyzer_command;
  std::int64_t timeout_ms = 30000;

  // [extract]
  std::vector<std::string> denylist{"sleep", "add_argument"};
  std::size_t max_stored_usages = 32;

  // [split]
  int level = 4;
  std::string ratio = "10:1:1";
  std::uint64_t seed = 0;
  std::size_t attempts = 16;

  // [assemble]
  std::string preset = "finetune";
  std::string template_name = "enc-dec";
  std::string mode = "infilling";
  std::string usage_order = "default";
  std::optional<std::size_t> total;

  // [eval]
  std::string predictor = "copy-threshold";
  std::string fallback = "empty";
  std::string eval_split = "test";
  bool spm_require_all = true;
  std::size_t coverage_k = 10;
  std::int64_t adapter_timeout_ms = 30000;
  std::size_t max_in_flight = 8;

  // [output]
  std::filesystem::path out_dir = "out";

  // Throws ConfigError for unknown keys and bad values.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
  // .toml or .json, with "section.key=value" overrides applied first.
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

  Json to_json() const;
  std::string hash() const;
};

// Applies "section.key=value"; the value is read as a TOML value, or as a
// plain string when it does not parse as one.
void apply_override(Json& config, const std::string& assignment);

// Interpreter standard library directory.
std::filesystem::path detect_stdlib(const std::string& python);

}  // namespace callctx::pipeline
