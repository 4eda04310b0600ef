#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "callctx/extract/filters.hpp"
#include "callctx/split/split.hpp"
#include "callctx/util/json.hpp"

namespace callctx::pipeline {

namespace fs = std::filesystem;

class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageReport {
  std::size_t records = 0;
  Json stats = Json::object();
  std::vector<fs::path> outputs;
};

struct EnvsOptions {
  std::vector<std::string> requirements;
  std::string installer = "local";
  fs::path registry;
  std::string python = "python3";
  fs::path stdlib;
  unsigned jobs = 4;
};

// Layout: <out>/<project>/{env/, lock.json, project.json, universe.json} and
// <out>/outcomes.jsonl with one status line per requirement.
StageReport build_envs(const EnvsOptions& options, const fs::path& out_dir);

// Built projects listed in <envs>/outcomes.jsonl, in order.
std::vector<std::string> built_projects(const fs::path& envs_dir);

// Extracts calls from the in-project files of each universe and applies the
// syntactic selection rules. Rejected instances are written only with
// `keep_rejected`; every record carries its verdict.
StageReport extract_stage(const std::vector<fs::path>& universes, const extract::FilterConfig& filters,
                          bool keep_rejected, unsigned jobs, const fs::path& out);

struct ResolveOptions {
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_stored_usages = 32;
  unsigned jobs = 4;
  bool keep_rejected = false;
};

// Resolves kept instances through one analyzer session per project, then
// groups them by definition and attaches ranked usages.
StageReport resolve_stage(const fs::path& instances, const fs::path& envs_dir, const ResolveOptions& options,
                          const fs::path& out);

// Import graph from the built projects' declared dependencies.
StageReport graph_stage(const fs::path& envs_dir, const fs::path& out);

StageReport split_stage(const fs::path& graph, const split::SampleOptions& options, const fs::path& out);

struct AssembleOptions {
  std::string preset = "finetune";
  std::string template_name = "enc-dec";
  std::string mode = "infilling";
  std::string usage_order = "default";
  std::optional<std::size_t> total;
};

StageReport assemble_stage(const fs::path& resolved, const std::optional<fs::path>& split_manifest,
                           const AssembleOptions& options, const fs::path& out);

struct EvalOptions {
  std::string predictor = "copy-threshold";
  std::string fallback = "empty";
  std::string split = "test";  // or "all"
  bool spm_require_all = true;
  std::size_t coverage_k = 10;
  std::chrono::milliseconds adapter_timeout{30000};
  std::size_t max_in_flight = 8;
  std::optional<fs::path> predictions_out;
};

StageReport eval_stage(const fs::path& assembled, const EvalOptions& options, const fs::path& out);

StageReport coverage_stage(const fs::path& assembled, std::size_t k_max, const std::string& split, const fs::path& out);

}  // namespace callctx::pipeline
