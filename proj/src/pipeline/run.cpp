#include "callctx/pipeline/run.hpp"

#include <chrono>
#include <functional>

#include "callctx/context/assemble.hpp"
#include "callctx/env/universe.hpp"
#include "callctx/pipeline/stages.hpp"
#include "callctx/util/io.hpp"

namespace callctx::pipeline {

std::map<std::string, std::string> RunManifest::artifact_digests() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stages) out.insert(s.outputs.begin(), s.outputs.end());
  return out;
}

Json RunManifest::to_json() const {
  Json stages_json = Json::array();
  for (const auto& s : stages) {
    Json j{{"name", s.name},
           {"status", s.status},
           {"seconds", s.seconds},
           {"records", s.records},
           {"stats", s.stats},
           {"outputs", s.outputs}};
    if (!s.error.empty()) j["error"] = s.error;
    stages_json.push_back(std::move(j));
  }
  return Json{{"tool", "callctx"},
              {"tool_version", tool_version},
              {"config_hash", config_hash},
              {"ok", ok()},
              {"failed_stage", failed_stage ? Json(*failed_stage) : Json(nullptr)},
              {"knobs", knobs},
              {"config", config},
              {"stages", stages_json}};
}

Json decision_knobs(const RunConfig& c) {
  Json budget = nullptr;
  auto tmpl = context::template_from_name(c.template_name);
  auto mode = context::mode_from_name(c.mode);
  if (tmpl && mode) {
    try {
      budget = context::make_plan(c.preset, *tmpl, *mode, c.total).to_json();
    } catch (const context::AssemblyError&) {
    }
  }
  return Json{
      {"token_definition", "Python lexical tokens; comments and layout tokens dropped"},
      {"position_encoding", "byte offsets internally; analyzer columns converted per negotiated encoding"},
      {"extraction",
       {{"nested_functions", "innermost enclosing function"},
        {"lambda_bodies", "nearest enclosing named function"},
        {"decorator_calls", "extracted"},
        {"subscript_calls", "extracted"}}},
      {"filters",
       {{"order", "R1 R2 R3 R4 R5 R7 R8 then R6"},
        {"string_literal", "any string token anywhere in the arguments"},
        {"denylist", c.denylist}}},
      {"analyzer",
       {{"definition_multiplicity", "first range; alternates recorded"},
        {"references_include_declaration", false},
        {"timeout_ms", c.timeout_ms},
        {"restart_policy", "restart once, then mark unresolved"}}},
      {"usages",
       {{"scope", "kept calls to the same definition; same file before the target, other project-owned files"},
        {"context", "enclosing function of the usage; cut after the usage call when it also encloses the target"},
        {"similarity_window", "full enclosing-function left context"},
        {"ranking", "similarity desc, same-file first, nearer first, path order"},
        {"max_stored", c.max_stored_usages}}},
      {"budget",
       {{"preset", c.preset},
        {"template", c.template_name},
        {"mode", c.mode},
        {"usage_order", c.usage_order},
        {"separator_cost", 1},
        {"plan", budget}}},
      {"normalization",
       {{"rules", "strip enclosing parentheses, drop comments, canonical token spacing, drop trailing comma"},
        {"em_case_sensitive", true},
        {"em_strip_comments", true},
        {"edit_sim_basis", "normalized text, code points"}}},
      {"spm", {{"receiver_prebound", true}, {"require_all_parameters", c.spm_require_all}}},
      {"split",
       {{"level", c.level},
        {"ratio", c.ratio},
        {"seed", c.seed},
        {"attempts", c.attempts},
        {"closure", "one hop over declared dependencies"},
        {"train_admission", "isolated from test and valid"},
        {"valid_test_overlap", "reported, not enforced"}}},
      {"copy_threshold", {{"grid", "0..1 step 0.05"}, {"selection", "max validation EM, smallest on ties"}}},
  };
}

namespace {

namespace fs = std::filesystem;

std::string rel(const fs::path& p, const fs::path& base) {
  return fs::absolute(p).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal()).generic_string();
}

// Digest of every file under `dir`, by relative path.
std::string tree_digest(const fs::path& dir) {
  if (dir.empty() || !fs::exists(dir)) return "";
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += rel(f, dir) + " " + file_sha256(f) + "\n";
  return sha256_hex(acc);
}

class Runner {
 public:
  Runner(const RunConfig& config, std::ostream* log) : c_(config), log_(log), out_(config.out_dir) {
    manifest_.config_hash = config.hash();
    manifest_.config = config.to_json();
    manifest_.knobs = decision_knobs(config);
  }

  // Runs `body` unless the stamp for `name` matches `key` and its outputs are intact.
  bool stage(const std::string& name, const Json& settings, const std::vector<fs::path>& inputs,
             const std::function<StageReport()>& body) {
    std::string acc = name + "\n" + settings.dump() + "\n";
    for (const auto& in : inputs) acc += rel(in, out_) + " " + (fs::exists(in) ? file_sha256(in) : "-") + "\n";
    std::string key = sha256_hex(acc);
    fs::path stamp = out_ / ".stamps" / (name + ".json");

    StageRecord rec;
    rec.name = name;
    auto started = std::chrono::steady_clock::now();
    if (fresh(stamp, key)) {
      auto s = read_json(stamp);
      rec.status = "skipped";
      rec.records = s.value("records", std::size_t{0});
      rec.stats = s.value("stats", Json::object());
      rec.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      say(name + ": up to date");
    } else {
      say(name + ": running");
      try {
        auto report = body();
        rec.status = "ran";
        rec.records = report.records;
        rec.stats = report.stats;
        for (const auto& o : report.outputs) rec.outputs[rel(o, out_)] = file_sha256(o);
        write_json(stamp, Json{{"key", key}, {"records", rec.records}, {"stats", rec.stats}, {"outputs", rec.outputs}});
      } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
        manifest_.failed_stage = name;
        say(name + ": failed: " + e.what());
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest_.stages.push_back(std::move(rec));
    write_json(out_ / "manifest.json", manifest_.to_json());
    return manifest_.ok();
  }

  RunManifest finish() { return manifest_; }
  const fs::path& out() const { return out_; }

 private:
  bool fresh(const fs::path& stamp, const std::string& key) const {
    if (!fs::exists(stamp)) return false;
    try {
      auto s = read_json(stamp);
      if (s.value("key", std::string()) != key) return false;
      for (const auto& [path, digest] : s.at("outputs").items()) {
        fs::path p = out_ / path;
        if (!fs::exists(p) || file_sha256(p) != digest.get<std::string>()) return false;
      }
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  void say(const std::string& msg) const {
    if (log_) *log_ << msg << "\n";
  }

  const RunConfig& c_;
  std::ostream* log_;
  fs::path out_;
  RunManifest manifest_;
};

}  // namespace

RunManifest pipeline_run(const RunConfig& c, std::ostream* log) {
  fs::create_directories(c.out_dir / ".stamps");
  Runner run(c, log);
  const fs::path out = run.out();
  const fs::path envs = out / "envs";
  const fs::path instances = out / "instances.jsonl";
  const fs::path resolved = out / "resolved.jsonl";
  const fs::path graph = out / "graph.json";
  const fs::path split_path = out / "split.json";
  const fs::path assembled = out / "assembled.jsonl";
  const fs::path report = out / "report.json";
  const fs::path coverage = out / "coverage.json";
  const fs::path filter_stats = out / "filter_stats.json";

  fs::path stdlib = c.stdlib.empty() ? detect_stdlib(c.python) : c.stdlib;
  Json corpus = c.to_json().at("corpus");
  corpus.erase("jobs");
  corpus["stdlib"] = stdlib.string();
  corpus["registry_digest"] = c.installer == "local" ? tree_digest(c.registry) : "";
  bool ok = run.stage("envs", corpus, {}, [&] {
    EnvsOptions o;
    o.requirements = c.requirements;
    o.installer = c.installer;
    o.registry = c.registry;
    o.python = c.python;
    o.stdlib = stdlib;
    o.jobs = c.jobs;
    return build_envs(o, envs);
  });
  if (!ok) return run.finish();

  auto universes = [&] {
    std::vector<fs::path> paths;
    for (const auto& p : built_projects(envs)) paths.push_back(envs / p / "universe.json");
    return paths;
  };

  std::vector<fs::path> universe_inputs{envs / "outcomes.jsonl"};
  for (const auto& u : universes()) universe_inputs.push_back(u);
  std::string sources;
  for (const auto& u : universes()) {
    auto universe = env::SourceUniverse::load(u);
    for (const auto& f : universe.in_project_files()) sources += f + " " + file_sha256(universe.physical(f)) + "\n";
  }
  ok = run.stage("extract", Json{{"denylist", c.denylist}, {"sources", sha256_hex(sources)}}, universe_inputs, [&] {
    extract::FilterConfig fc;
    fc.denylist = {c.denylist.begin(), c.denylist.end()};
    return extract_stage(universes(), fc, false, c.jobs, instances);
  });
  if (!ok) return run.finish();

  Json resolve_settings{{"command", c.analyzer_command},
                        {"timeout_ms", c.timeout_ms},
                        {"max_stored_usages", c.max_stored_usages},
                        {"corpus", corpus}};
  std::vector<fs::path> resolve_inputs = universe_inputs;
  resolve_inputs.push_back(instances);
  ok = run.stage("resolve", resolve_settings, resolve_inputs, [&] {
    ResolveOptions o;
    o.command = c.analyzer_command;
    o.timeout = std::chrono::milliseconds(c.timeout_ms);
    o.max_stored_usages = c.max_stored_usages;
    o.jobs = c.jobs;
    auto r = resolve_stage(instances, envs, o, resolved);
    // One histogram for all eight rules.
    auto ex = read_json(out / ".stamps" / "extract.json").at("stats");
    Json filters = ex.at("filters");
    filters["rejected"]["R6"] = r.stats.at("unresolved");
    filters["kept"] = r.stats.at("resolved");
    write_json(filter_stats, Json{{"extracted", ex.at("extracted")}, {"filters", filters}});
    r.outputs.push_back(filter_stats);
    return r;
  });
  if (!ok) return run.finish();

  ok = run.stage("graph", Json::object(), {envs / "outcomes.jsonl"}, [&] { return graph_stage(envs, graph); });
  if (!ok) return run.finish();

  Json split_settings{{"level", c.level}, {"ratio", c.ratio}, {"seed", c.seed}, {"attempts", c.attempts}};
  ok = run.stage("split", split_settings, {graph}, [&] {
    split::SampleOptions o;
    o.level = c.level;
    o.ratio = split::Ratio::parse(c.ratio);
    o.seed = c.seed;
    o.attempts = c.attempts;
    return split_stage(graph, o, split_path);
  });
  if (!ok) return run.finish();

  Json assemble_settings = c.to_json().at("assemble");
  ok = run.stage("assemble", assemble_settings, {resolved, split_path}, [&] {
    AssembleOptions o;
    o.preset = c.preset;
    o.template_name = c.template_name;
    o.mode = c.mode;
    o.usage_order = c.usage_order;
    o.total = c.total;
    return assemble_stage(resolved, split_path, o, assembled);
  });
  if (!ok) return run.finish();

  Json eval_settings = c.to_json().at("eval");
  ok = run.stage("eval", eval_settings, {assembled}, [&] {
    EvalOptions o;
    o.predictor = c.predictor;
    o.fallback = c.fallback;
    o.split = c.eval_split;
    o.spm_require_all = c.spm_require_all;
    o.coverage_k = c.coverage_k;
    o.adapter_timeout = std::chrono::milliseconds(c.adapter_timeout_ms);
    o.max_in_flight = c.max_in_flight;
    return eval_stage(assembled, o, report);
  });
  if (!ok) return run.finish();

  run.stage("coverage", Json{{"k", c.coverage_k}, {"split", "all"}}, {assembled},
            [&] { return coverage_stage(assembled, c.coverage_k, "all", coverage); });
  return run.finish();
}

}  // namespace callctx::pipeline
