#include "callctx/pipeline/stages.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "callctx/analysis/resolver.hpp"
#include "callctx/context/assemble.hpp"
#include "callctx/env/environment.hpp"
#include "callctx/env/universe.hpp"
#include "callctx/eval/predictors.hpp"
#include "callctx/eval/report.hpp"
#include "callctx/extract/extractor.hpp"
#include "callctx/util/io.hpp"
#include "callctx/util/parallel.hpp"

namespace callctx::pipeline {

using extract::CallInstance;
using extract::FilterVerdict;

namespace {

Json verdict_json(const FilterVerdict& v) {
  return Json{{"kept", v.kept}, {"rule", v.rule ? Json(extract::rule_tag(*v.rule)) : Json(nullptr)}};
}

FilterVerdict verdict_from_json(const Json& j) {
  if (!j.is_object() || j.value("kept", true)) return FilterVerdict::keep();
  auto rule = extract::rule_from_tag(j.value("rule", std::string()));
  return rule ? FilterVerdict::reject(*rule) : FilterVerdict::keep();
}

}  // namespace

StageReport build_envs(const EnvsOptions& options, const fs::path& out_dir) {
  std::vector<std::string> reqs;
  std::set<std::string> seen;
  for (const auto& r : options.requirements) {
    if (seen.insert(env::requirement_name(r)).second) reqs.push_back(r);
  }
  fs::create_directories(out_dir);
  fs::path stdlib = options.stdlib;

  std::vector<Json> outcomes(reqs.size());
  parallel_for(reqs.size(), options.jobs, [&](std::size_t i) {
    const auto& req = reqs[i];
    std::string name = env::requirement_name(req);
    fs::path dir = out_dir / name;
    std::unique_ptr<env::Installer> installer;
    if (options.installer == "pip") {
      installer = std::make_unique<env::PipInstaller>(options.python);
    } else {
      installer = std::make_unique<env::LocalRegistryInstaller>(options.registry);
    }
    auto outcome = env::build_environment(req, dir / "env", *installer);
    Json line{{"requirement", req}, {"project", name}, {"status", env::status_name(outcome.status)}};
    if (!outcome.reason.empty()) line["reason"] = outcome.reason;
    if (outcome.status != env::EnvironmentOutcome::Status::Built) {
      std::error_code ec;
      fs::remove_all(dir, ec);
      outcomes[i] = std::move(line);
      return;
    }
    auto& project = *outcome.project;
    std::vector<std::string> deps;
    for (const auto& d : project.direct_deps) deps.push_back(env::normalize_name(d));
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    write_json(dir / "lock.json", outcome.lock);
    write_json(dir / "project.json", Json{{"name", project.name},
                                          {"version", project.version},
                                          {"license", project.license},
                                          {"direct_deps", deps}});
    auto universe = env::enumerate_sources(project, stdlib);
    write_json(dir / "universe.json", universe.to_json(dir));
    line["files"] = universe.files.size();
    if (!universe.warnings.empty()) line["warnings"] = universe.warnings;
    outcomes[i] = std::move(line);
  });

  StageReport report;
  std::map<std::string, std::size_t> counts{{"built", 0}, {"rejected", 0}, {"failed", 0}};
  for (const auto& o : outcomes) ++counts[o.at("status").get<std::string>()];
  write_jsonl(out_dir / "outcomes.jsonl", outcomes);
  report.outputs.push_back(out_dir / "outcomes.jsonl");
  for (const auto& o : outcomes) {
    if (o.at("status") != "built") continue;
    fs::path dir = out_dir / o.at("project").get<std::string>();
    for (const char* f : {"lock.json", "project.json", "universe.json"}) report.outputs.push_back(dir / f);
  }
  report.records = counts["built"];
  report.stats = Json{{"requirements", reqs.size()},
                      {"built", counts["built"]},
                      {"rejected", counts["rejected"]},
                      {"failed", counts["failed"]}};
  return report;
}

std::vector<std::string> built_projects(const fs::path& envs_dir) {
  std::vector<std::string> out;
  fs::path outcomes = envs_dir / "outcomes.jsonl";
  if (!fs::exists(outcomes)) throw StageError("missing " + outcomes.string());
  for (const auto& o : read_jsonl(outcomes)) {
    if (o.value("status", std::string()) == "built") out.push_back(o.at("project").get<std::string>());
  }
  return out;
}

StageReport extract_stage(const std::vector<fs::path>& universe_paths, const extract::FilterConfig& filters,
                          bool keep_rejected, unsigned jobs, const fs::path& out) {
  struct Task {
    std::size_t universe;
    std::string file;
  };
  std::vector<env::SourceUniverse> universes;
  std::vector<Task> tasks;
  for (const auto& p : universe_paths) {
    universes.push_back(env::SourceUniverse::load(p));
    for (const auto& f : universes.back().in_project_files()) tasks.push_back({universes.size() - 1, f});
  }

  struct Result {
    std::vector<CallInstance> instances;
    std::optional<std::string> error;
  };
  std::vector<Result> results(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const auto& u = universes[tasks[i].universe];
    try {
      auto file = python::SourceFile::parse(read_file(u.physical(tasks[i].file)));
      extract::ExtractOptions opts;
      opts.include_top_level = true;
      results[i].instances = extract::extract_calls(file, u.project, tasks[i].file, opts);
    } catch (const python::SyntaxError& e) {
      results[i].error = e.what();
    } catch (const IoError& e) {
      results[i].error = e.what();
    }
  });

  extract::RuleHistogram histogram;
  Json skipped = Json::array();
  std::vector<Json> records;
  std::size_t extracted = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (results[i].error) {
      skipped.push_back(Json{{"project", universes[tasks[i].universe].project},
                             {"file", tasks[i].file},
                             {"error", *results[i].error}});
      continue;
    }
    for (const auto& inst : results[i].instances) {
      auto verdict = extract::apply_filters(inst, extract::Resolution::Pending, filters);
      histogram.add(verdict);
      if (inst.in_function()) ++extracted;
      if (!verdict.kept && !keep_rejected) continue;
      Json j = extract::to_json(inst);
      j["verdict"] = verdict_json(verdict);
      records.push_back(std::move(j));
    }
  }
  write_jsonl(out, records);
  StageReport report;
  report.records = records.size();
  report.outputs.push_back(out);
  report.stats = Json{{"files", tasks.size()},
                      {"skipped_files", skipped},
                      {"extracted", extracted},
                      {"filters", histogram.to_json()}};
  return report;
}

StageReport resolve_stage(const fs::path& instances_path, const fs::path& envs_dir, const ResolveOptions& options,
                          const fs::path& out) {
  if (options.command.empty()) throw StageError("no analyzer command configured");
  std::vector<std::string> projects;
  std::map<std::string, std::vector<CallInstance>> by_project;
  std::size_t already_rejected = 0;
  for (const auto& j : read_jsonl(instances_path)) {
    if (!verdict_from_json(j.value("verdict", Json())).kept) {
      ++already_rejected;
      continue;
    }
    auto inst = extract::instance_from_json(j);
    if (!by_project.count(inst.project)) projects.push_back(inst.project);
    by_project[inst.project].push_back(std::move(inst));
  }

  struct ProjectResult {
    std::vector<analysis::ResolvedCall> resolved;
    std::vector<std::pair<CallInstance, std::string>> unresolved;
    std::size_t restarts = 0;
    std::optional<std::string> spawn_failure;
  };
  std::vector<ProjectResult> results(projects.size());
  parallel_for(projects.size(), options.jobs, [&](std::size_t p) {
    const auto& name = projects[p];
    auto universe = env::SourceUniverse::load(envs_dir / name / "universe.json");
    lsp::SessionOptions so;
    so.command = options.command;
    so.workspace_root = universe.env_root;
    so.timeout = options.timeout;
    Json extra = Json::array({env::find_site_packages(universe.env_root).string()});
    so.initialization_options = Json{{"workspace",
                                      {{"root", universe.env_root.string()},
                                       {"extraPaths", extra},
                                       {"stdlibPath", universe.stdlib_root.string()}}}};
    lsp::AnalyzerClient client(so);
    analysis::SourceCache cache;
    auto& r = results[p];
    for (const auto& inst : by_project[name]) {
      auto res = analysis::resolve_call(client, universe, cache, inst);
      if (client.spawn_failure()) {
        r.spawn_failure = *client.spawn_failure();
        return;
      }
      if (res.call) {
        r.resolved.push_back(std::move(*res.call));
      } else {
        r.unresolved.emplace_back(inst, res.cause);
      }
    }
    r.restarts = client.restarts();
    analysis::attach_usages(r.resolved, universe, cache, options.max_stored_usages);
  });

  for (std::size_t p = 0; p < projects.size(); ++p) {
    if (results[p].spawn_failure) throw StageError("analyzer for " + projects[p] + ": " + *results[p].spawn_failure);
  }

  std::vector<Json> records;
  std::map<std::string, std::size_t> causes;
  std::map<std::string, std::size_t> origins;
  std::size_t alternates = 0, restarts = 0, with_usages = 0, without_imp = 0, stubs = 0;
  for (std::size_t p = 0; p < projects.size(); ++p) {
    auto& r = results[p];
    restarts += r.restarts;
    // Kept records and, when asked, R6 rejections, merged in instance order.
    std::vector<std::pair<std::uint32_t, Json>> merged;
    std::map<std::string, std::size_t> order;
    const auto& insts = by_project[projects[p]];
    for (std::size_t i = 0; i < insts.size(); ++i) order[insts[i].id] = i;
    for (const auto& c : r.resolved) {
      ++origins[std::string(env::origin_name(c.origin))];
      alternates += c.alternates.empty() ? 0 : 1;
      with_usages += c.usages.empty() ? 0 : 1;
      without_imp += c.implementation ? 0 : 1;
      stubs += c.implementation && c.implementation->stub ? 1 : 0;
      Json j = analysis::to_json(c);
      j["verdict"] = verdict_json(FilterVerdict::keep());
      merged.emplace_back(order[c.instance.id], std::move(j));
    }
    for (const auto& [inst, cause] : r.unresolved) {
      ++causes[cause];
      if (!options.keep_rejected) continue;
      Json j = extract::to_json(inst);
      j["verdict"] = verdict_json(FilterVerdict::reject(extract::Rule::Unresolved));
      j["cause"] = cause;
      merged.emplace_back(order[inst.id], std::move(j));
    }
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [k, j] : merged) records.push_back(std::move(j));
  }
  write_jsonl(out, records);

  std::size_t unresolved = 0;
  for (const auto& [c, n] : causes) unresolved += n;
  StageReport report;
  report.records = records.size();
  report.outputs.push_back(out);
  report.stats = Json{{"projects", projects.size()},
                      {"input_rejected", already_rejected},
                      {"resolved", records.size() - (options.keep_rejected ? unresolved : 0)},
                      {"unresolved", unresolved},
                      {"unresolved_causes", causes},
                      {"by_origin", origins},
                      {"with_alternates", alternates},
                      {"with_usages", with_usages},
                      {"without_implementation", without_imp},
                      {"stub_implementations", stubs},
                      {"analyzer_restarts", restarts}};
  return report;
}

StageReport graph_stage(const fs::path& envs_dir, const fs::path& out) {
  split::ImportGraph graph;
  auto projects = built_projects(envs_dir);
  for (const auto& name : projects) {
    auto pj = read_json(envs_dir / name / "project.json");
    graph.add_node(name);
    for (const auto& d : pj.value("direct_deps", std::vector<std::string>{})) graph.add_edge(name, d);
  }
  graph.set_candidates(projects);
  write_json(out, graph.to_json());
  StageReport report;
  report.records = graph.nodes().size();
  report.outputs.push_back(out);
  report.stats = Json{{"nodes", graph.nodes().size()}, {"candidates", projects.size()}};
  return report;
}

StageReport split_stage(const fs::path& graph_path, const split::SampleOptions& options, const fs::path& out) {
  auto graph = split::ImportGraph::load(graph_path);
  auto manifest = split::sample_split(graph, options);
  auto violations = split::check_isolation(manifest, graph);
  if (!violations.empty()) throw StageError("sampled split violates its isolation level");
  write_json(out, manifest.to_json());
  StageReport report;
  report.records = manifest.train.size() + manifest.valid.size() + manifest.test.size();
  report.outputs.push_back(out);
  report.stats = Json{{"train", manifest.train.size()},
                      {"valid", manifest.valid.size()},
                      {"test", manifest.test.size()},
                      {"level", manifest.level},
                      {"warnings", manifest.warnings}};
  return report;
}

StageReport assemble_stage(const fs::path& resolved_path, const std::optional<fs::path>& split_manifest,
                           const AssembleOptions& options, const fs::path& out) {
  auto tmpl = context::template_from_name(options.template_name);
  if (!tmpl) throw StageError("unknown template: " + options.template_name);
  auto mode = context::mode_from_name(options.mode);
  if (!mode) throw StageError("unknown mode: " + options.mode);
  auto order = context::usage_order_from_name(options.usage_order);
  if (!order) throw StageError("unknown usage order: " + options.usage_order);
  context::BudgetPlan plan;
  try {
    plan = context::make_plan(options.preset, *tmpl, *mode, options.total);
  } catch (const context::AssemblyError& e) {
    throw StageError(e.what());
  }
  std::optional<split::SplitManifest> manifest;
  if (split_manifest) manifest = split::SplitManifest::from_json(read_json(*split_manifest));

  std::vector<Json> records;
  std::map<std::string, std::size_t> per_split;
  std::size_t truncated_left = 0;
  for (const auto& j : read_jsonl(resolved_path)) {
    if (!verdict_from_json(j.value("verdict", Json())).kept) continue;
    auto r = analysis::resolved_from_json(j);
    context::ContextBundle bundle;
    bundle.instance_id = r.instance.id;
    bundle.left = r.instance.left_context;
    bundle.right = r.instance.right_context;
    if (r.implementation) bundle.implementation = r.implementation->tokens;
    bundle.usages = r.usages;
    context::AssembledInput input;
    try {
      input = context::assemble(bundle, plan, *tmpl, *mode, *order);
    } catch (const context::AssemblyError& e) {
      throw StageError(r.instance.id + ": " + e.what());
    }
    for (const auto& s : input.slots) {
      if (s.name == "left" && s.end - s.begin < bundle.left.size()) ++truncated_left;
    }
    std::string label = manifest ? manifest->label_of(r.instance.project) : std::string();
    ++per_split[label.empty() ? "unassigned" : label];
    Json usages = Json::array();
    for (const auto& u : bundle.usages) usages.push_back(context::to_json(u));
    records.push_back(Json{
        {"id", r.instance.id},
        {"project", r.instance.project},
        {"split", label},
        {"origin", env::origin_name(r.origin)},
        {"callee", r.instance.callee_expr},
        {"ground_truth", r.instance.ground_truth_args},
        {"template", context::template_name(*tmpl)},
        {"mode", context::mode_name(*mode)},
        {"preset", plan.name},
        {"signature", r.implementation && r.implementation->signature ? r.implementation->signature->to_json()
                                                                       : Json(nullptr)},
        {"input", input.to_json()},
        {"bundle",
         {{"left", bundle.left},
          {"right", bundle.right},
          {"implementation", bundle.implementation ? Json(*bundle.implementation) : Json(nullptr)},
          {"usages", usages}}},
    });
  }
  write_jsonl(out, records);
  StageReport report;
  report.records = records.size();
  report.outputs.push_back(out);
  report.stats = Json{{"plan", plan.to_json()}, {"per_split", per_split}, {"truncated_left", truncated_left}};
  return report;
}

namespace {

std::vector<eval::EvalItem> load_items(const fs::path& assembled) {
  std::vector<eval::EvalItem> items;
  for (const auto& j : read_jsonl(assembled)) items.push_back(eval::EvalItem::from_assembled(j));
  return items;
}

std::vector<eval::EvalItem> select(const std::vector<eval::EvalItem>& items, const std::string& split) {
  if (split == "all") return items;
  std::vector<eval::EvalItem> out;
  for (const auto& it : items)
    if (it.split == split) out.push_back(it);
  return out;
}

}  // namespace

StageReport eval_stage(const fs::path& assembled, const EvalOptions& options, const fs::path& out) {
  auto items = load_items(assembled);
  auto targets = select(items, options.split);
  auto valid = select(items, "valid");
  std::unique_ptr<eval::Predictor> predictor;
  try {
    predictor = eval::make_predictor(options.predictor, options.fallback, options.adapter_timeout,
                                     options.max_in_flight);
    predictor->tune(valid);
  } catch (const eval::PredictorError& e) {
    throw StageError(e.what());
  } catch (const IoError& e) {
    throw StageError(e.what());
  }
  auto predictions = predictor->predict(targets);
  auto report = eval::evaluate(targets, predictions, options.spm_require_all);
  report.coverage = eval::coverage_curve(targets, options.coverage_k);
  report.predictor = predictor->describe();
  Json j = report.to_json();
  j["split"] = options.split;
  std::vector<std::string> errors;
  if (auto* ext = dynamic_cast<eval::ExternalPredictor*>(predictor.get())) errors = ext->errors();
  if (!errors.empty()) j["adapter_errors"] = errors;
  write_json(out, j);

  StageReport sr;
  sr.records = targets.size();
  sr.outputs.push_back(out);
  if (options.predictions_out) {
    std::vector<Json> lines;
    for (const auto& p : predictions) lines.push_back(p.to_json());
    write_jsonl(*options.predictions_out, lines);
    sr.outputs.push_back(*options.predictions_out);
  }
  sr.stats = Json{{"split", options.split},
                  {"valid_items", valid.size()},
                  {"overall", report.overall.to_json()},
                  {"predictor", report.predictor}};
  if (!errors.empty()) sr.stats["adapter_errors"] = errors.size();
  return sr;
}

StageReport coverage_stage(const fs::path& assembled, std::size_t k_max, const std::string& split,
                           const fs::path& out) {
  auto items = select(load_items(assembled), split);
  auto curve = eval::coverage_curve(items, k_max);
  write_json(out, Json{{"split", split}, {"instances", items.size()}, {"curve", eval::coverage_to_json(curve)}});
  StageReport report;
  report.records = items.size();
  report.outputs.push_back(out);
  report.stats = Json{{"instances", items.size()}, {"top1", curve.size() > 1 ? curve[1] : 0.0}};
  return report;
}

}  // namespace callctx::pipeline
