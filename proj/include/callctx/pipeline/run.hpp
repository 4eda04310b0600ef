#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "callctx/pipeline/config.hpp"
#include "callctx/util/json.hpp"

namespace callctx::pipeline {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct StageRecord {
  std::string name;
  std::string status;  // "ran" | "skipped" | "failed"
  double seconds = 0;
  std::size_t records = 0;
  Json stats = Json::object();
  std::map<std::string, std::string> outputs;  // path relative to the run directory -> sha256
  std::string error;
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_hash;
  Json config;
  Json knobs;
  std::vector<StageRecord> stages;
  std::optional<std::string> failed_stage;

  bool ok() const { return !failed_stage.has_value(); }
  // Digest of every stage output, keyed by relative path.
  std::map<std::string, std::string> artifact_digests() const;
  Json to_json() const;
};

// Every decision the dataset depends on, for the manifest.
Json decision_knobs(const RunConfig& config);

// envs -> extract -> resolve -> graph -> split -> assemble -> eval -> coverage.
// Stages whose inputs, settings and outputs are unchanged since their last run
// are skipped. A failing stage stops the run; the manifest written to
// <out>/manifest.json records what completed.
RunManifest pipeline_run(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace callctx::pipeline
