#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "callctx/pipeline/config.hpp"
#include "callctx/pipeline/run.hpp"
#include "callctx/pipeline/stages.hpp"
#include "callctx/util/io.hpp"
#include "callctx/util/subprocess.hpp"

namespace fs = std::filesystem;
using namespace callctx;
using namespace callctx::pipeline;

namespace {

void print_report(const std::string& stage, const StageReport& r) {
  std::cout << stage << ": " << r.records << " records\n";
  if (!r.stats.empty()) std::cout << r.stats.dump(2) << "\n";
}

std::vector<fs::path> universes_under(const fs::path& envs) {
  std::vector<fs::path> out;
  for (const auto& name : built_projects(envs)) out.push_back(envs / name / "universe.json");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Call-argument completion dataset toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // envs
  auto* envs = app.add_subcommand("envs", "Project environments");
  envs->require_subcommand(1);
  auto* envs_build = envs->add_subcommand("build", "Install each requirement into its own environment");
  EnvsOptions eo;
  fs::path envs_out = "out/envs";
  fs::path registry_list;
  envs_build->add_option("requirements", eo.requirements, "Requirement specifiers");
  envs_build->add_option("--registry-list", registry_list, "File with one requirement per line")
      ->check(CLI::ExistingFile);
  envs_build->add_option("--registry", eo.registry, "Directory of unpacked packages (local installer)");
  envs_build->add_option("--installer", eo.installer)->check(CLI::IsMember({"local", "pip"}));
  envs_build->add_option("--python", eo.python);
  envs_build->add_option("--stdlib", eo.stdlib, "Standard library directory");
  envs_build->add_option("--out", envs_out);
  envs_build->add_option("--jobs", eo.jobs);

  // extract
  auto* extract = app.add_subcommand("extract", "Extract call instances");
  std::vector<fs::path> universes;
  fs::path extract_envs, extract_out = "out/instances.jsonl", denylist_file;
  bool keep_rejected = false;
  unsigned extract_jobs = 4;
  extract->add_option("--universe", universes, "universe.json files")->check(CLI::ExistingFile);
  extract->add_option("--envs", extract_envs, "Use every built project under this directory");
  extract->add_option("--out", extract_out);
  extract->add_option("--denylist-file", denylist_file)->check(CLI::ExistingFile);
  extract->add_flag("--keep-rejected", keep_rejected);
  extract->add_option("--jobs", extract_jobs);

  // resolve
  auto* resolve = app.add_subcommand("resolve", "Resolve definitions and usages through a language server");
  fs::path resolve_instances, resolve_envs, resolve_out = "out/resolved.jsonl";
  std::string server_cmd;
  std::int64_t timeout_ms = 30000;
  ResolveOptions ro;
  resolve->add_option("--instances", resolve_instances)->required()->check(CLI::ExistingFile);
  resolve->add_option("--envs", resolve_envs)->required()->check(CLI::ExistingDirectory);
  resolve->add_option("--server-cmd", server_cmd, "Language server command line")->required();
  resolve->add_option("--timeout-ms", timeout_ms);
  resolve->add_option("--max-usages", ro.max_stored_usages);
  resolve->add_option("--jobs", ro.jobs);
  resolve->add_flag("--keep-rejected", ro.keep_rejected);
  resolve->add_option("--out", resolve_out);

  // graph
  auto* graph = app.add_subcommand("graph", "Build the project dependency graph");
  fs::path graph_envs, graph_out = "out/graph.json";
  graph->add_option("--envs", graph_envs)->required()->check(CLI::ExistingDirectory);
  graph->add_option("--out", graph_out);

  // split
  auto* split = app.add_subcommand("split", "Dependency-isolated train/valid/test split");
  fs::path split_graph, split_out = "out/split.json";
  split::SampleOptions so;
  std::string ratio = "10:1:1";
  split->add_option("--graph", split_graph)->required()->check(CLI::ExistingFile);
  split->add_option("--level", so.level)->check(CLI::Range(1, 4));
  split->add_option("--ratio", ratio);
  split->add_option("--seed", so.seed);
  split->add_option("--attempts", so.attempts);
  split->add_option("--out", split_out);

  // assemble
  auto* assemble = app.add_subcommand("assemble", "Assemble model inputs");
  fs::path asm_resolved, asm_split, asm_out = "out/assembled.jsonl";
  AssembleOptions ao;
  std::size_t total = 0;
  assemble->add_option("--resolved", asm_resolved)->required()->check(CLI::ExistingFile);
  assemble->add_option("--split", asm_split)->check(CLI::ExistingFile);
  assemble->add_option("--preset", ao.preset);
  assemble->add_option("--template", ao.template_name)->check(CLI::IsMember({"decoder", "enc-dec"}));
  assemble->add_option("--mode", ao.mode)->check(CLI::IsMember({"unidirectional", "infilling"}));
  assemble->add_option("--usage-order", ao.usage_order)->check(CLI::IsMember({"default", "first", "last"}));
  assemble->add_option("--total", total, "Total token budget");
  assemble->add_option("--out", asm_out);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a predictor");
  fs::path eval_assembled, eval_out = "out/report.json", predictions_out;
  EvalOptions vo;
  std::int64_t adapter_timeout_ms = 30000;
  eval->add_option("--assembled", eval_assembled)->required()->check(CLI::ExistingFile);
  eval->add_option("--predictor", vo.predictor,
                   "empty | oracle | copy-top | copy-threshold[:theta] | file:PATH | external:cmd=COMMAND");
  eval->add_option("--fallback", vo.fallback);
  eval->add_option("--split", vo.split);
  eval->add_option("--coverage-k", vo.coverage_k);
  eval->add_option("--adapter-timeout-ms", adapter_timeout_ms);
  eval->add_option("--max-in-flight", vo.max_in_flight);
  eval->add_flag("!--spm-allow-missing", vo.spm_require_all, "Do not require every required parameter");
  eval->add_option("--predictions-out", predictions_out);
  eval->add_option("--out", eval_out);

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Fraction of instances whose answer appears in the top-k usages");
  fs::path cov_assembled, cov_out = "out/coverage.json";
  std::size_t k_max = 10;
  std::string cov_split = "test";
  coverage->add_option("--assembled", cov_assembled)->required()->check(CLI::ExistingFile);
  coverage->add_option("--k", k_max);
  coverage->add_option("--split", cov_split);
  coverage->add_option("--out", cov_out);

  // run
  auto* run = app.add_subcommand("run", "Run every stage from a config file");
  fs::path config_path;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "section.key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (envs_build->parsed()) {
      if (!registry_list.empty()) {
        std::istringstream lines(read_file(registry_list));
        for (std::string line; std::getline(lines, line);) {
          auto hash = line.find('#');
          if (hash != std::string::npos) line.resize(hash);
          line.erase(0, line.find_first_not_of(" \t\r"));
          line.erase(line.find_last_not_of(" \t\r") + 1);
          if (!line.empty()) eo.requirements.push_back(line);
        }
      }
      if (eo.requirements.empty()) throw ConfigError("no requirements given");
      if (eo.stdlib.empty() && eo.installer == "pip") eo.stdlib = detect_stdlib(eo.python);
      print_report("envs", build_envs(eo, envs_out));
    } else if (extract->parsed()) {
      if (!extract_envs.empty()) {
        auto more = universes_under(extract_envs);
        universes.insert(universes.end(), more.begin(), more.end());
      }
      if (universes.empty()) throw ConfigError("give --universe or --envs");
      extract::FilterConfig fc;
      if (!denylist_file.empty()) fc = extract::FilterConfig::from_file(denylist_file);
      print_report("extract", extract_stage(universes, fc, keep_rejected, extract_jobs, extract_out));
    } else if (resolve->parsed()) {
      ro.command = split_command_line(server_cmd);
      ro.timeout = std::chrono::milliseconds(timeout_ms);
      print_report("resolve", resolve_stage(resolve_instances, resolve_envs, ro, resolve_out));
    } else if (graph->parsed()) {
      print_report("graph", graph_stage(graph_envs, graph_out));
    } else if (split->parsed()) {
      try {
        so.ratio = split::Ratio::parse(ratio);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
      print_report("split", split_stage(split_graph, so, split_out));
    } else if (assemble->parsed()) {
      if (total) ao.total = total;
      std::optional<fs::path> sp;
      if (!asm_split.empty()) sp = asm_split;
      print_report("assemble", assemble_stage(asm_resolved, sp, ao, asm_out));
    } else if (eval->parsed()) {
      vo.adapter_timeout = std::chrono::milliseconds(adapter_timeout_ms);
      if (!predictions_out.empty()) vo.predictions_out = predictions_out;
      print_report("eval", eval_stage(eval_assembled, vo, eval_out));
    } else if (coverage->parsed()) {
      print_report("coverage", coverage_stage(cov_assembled, k_max, cov_split, cov_out));
    } else if (run->parsed()) {
      auto config = RunConfig::load(config_path, overrides);
      auto manifest = pipeline_run(config, &std::cerr);
      if (!manifest.ok()) {
        std::cerr << "stage " << *manifest.failed_stage << " failed; see " << (config.out_dir / "manifest.json")
                  << "\n";
        return 1;
      }
      std::cout << "run complete: " << (config.out_dir / "manifest.json").string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
