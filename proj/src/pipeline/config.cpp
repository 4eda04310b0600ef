#include "callctx/pipeline/config.hpp"

#include <set>

#include "callctx/util/io.hpp"
#include "callctx/util/subprocess.hpp"
#include "callctx/util/toml.hpp"

namespace callctx::pipeline {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"corpus", {"requirements", "registry_list", "registry", "installer", "python", "stdlib", "jobs"}},
      {"analyzer", {"command", "timeout_ms"}},
      {"extract", {"denylist", "denylist_file", "max_stored_usages"}},
      {"split", {"level", "ratio", "seed", "attempts"}},
      {"assemble", {"preset", "template", "mode", "usage_order", "total"}},
      {"eval",
       {"predictor", "fallback", "split", "spm_require_all", "coverage_k", "adapter_timeout_ms", "max_in_flight"}},
      {"output", {"dir"}},
  };
  return kSchema;
}

template <typename T>
T get(const Json& section, const std::string& where, const char* key, T fallback) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    auto e = line.find_last_not_of(" \t\r");
    if (b != std::string::npos) out.push_back(line.substr(b, e - b + 1));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a table");
  for (const auto& [section, value] : j.items()) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
    if (!value.is_object()) throw ConfigError("[" + section + "] must be a table");
    for (const auto& [key, v] : value.items()) {
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }
  }
  auto section = [&](const char* name) { return j.contains(name) ? j.at(name) : Json::object(); };
  RunConfig c;

  auto corpus = section("corpus");
  c.requirements = get(corpus, "corpus", "requirements", std::vector<std::string>{});
  if (corpus.contains("registry_list")) {
    auto more = read_lines(resolve(base_dir, get<std::string>(corpus, "corpus", "registry_list", "")));
    c.requirements.insert(c.requirements.end(), more.begin(), more.end());
  }
  c.registry = resolve(base_dir, get<std::string>(corpus, "corpus", "registry", ""));
  c.installer = get<std::string>(corpus, "corpus", "installer", c.installer);
  if (c.installer != "local" && c.installer != "pip") throw ConfigError("corpus.installer must be local or pip");
  if (c.installer == "local" && c.registry.empty() && !c.requirements.empty()) {
    throw ConfigError("corpus.registry is required for the local installer");
  }
  c.python = get<std::string>(corpus, "corpus", "python", c.python);
  c.stdlib = resolve(base_dir, get<std::string>(corpus, "corpus", "stdlib", ""));
  auto jobs = get<std::int64_t>(corpus, "corpus", "jobs", c.jobs);
  if (jobs < 1) throw ConfigError("corpus.jobs must be positive");
  c.jobs = static_cast<unsigned>(jobs);

  auto analyzer = section("analyzer");
  if (analyzer.contains("command")) {
    if (analyzer.at("command").is_string()) {
      c.analyzer_command = split_command_line(analyzer.at("command").get<std::string>());
    } else {
      c.analyzer_command = get(analyzer, "analyzer", "command", std::vector<std::string>{});
    }
    // A relative program path is taken from the config directory.
    if (!c.analyzer_command.empty() && c.analyzer_command[0].find('/') != std::string::npos) {
      c.analyzer_command[0] = resolve(base_dir, c.analyzer_command[0]).string();
    }
  }
  c.timeout_ms = get<std::int64_t>(analyzer, "analyzer", "timeout_ms", c.timeout_ms);
  if (c.timeout_ms <= 0) throw ConfigError("analyzer.timeout_ms must be positive");

  auto extract = section("extract");
  c.denylist = get(extract, "extract", "denylist", c.denylist);
  if (extract.contains("denylist_file")) {
    c.denylist = read_lines(resolve(base_dir, get<std::string>(extract, "extract", "denylist_file", "")));
  }
  c.max_stored_usages = get<std::size_t>(extract, "extract", "max_stored_usages", c.max_stored_usages);

  auto split = section("split");
  c.level = get<int>(split, "split", "level", c.level);
  if (c.level < 1 || c.level > 4) throw ConfigError("split.level must be 1..4");
  c.ratio = get<std::string>(split, "split", "ratio", c.ratio);
  c.seed = get<std::uint64_t>(split, "split", "seed", c.seed);
  c.attempts = get<std::size_t>(split, "split", "attempts", c.attempts);

  auto assemble = section("assemble");
  c.preset = get<std::string>(assemble, "assemble", "preset", c.preset);
  c.template_name = get<std::string>(assemble, "assemble", "template", c.template_name);
  c.mode = get<std::string>(assemble, "assemble", "mode", c.mode);
  c.usage_order = get<std::string>(assemble, "assemble", "usage_order", c.usage_order);
  if (assemble.contains("total")) c.total = get<std::size_t>(assemble, "assemble", "total", 0);

  auto eval = section("eval");
  c.predictor = get<std::string>(eval, "eval", "predictor", c.predictor);
  c.fallback = get<std::string>(eval, "eval", "fallback", c.fallback);
  c.eval_split = get<std::string>(eval, "eval", "split", c.eval_split);
  static const std::set<std::string> kSplits = {"train", "valid", "test", "all"};
  if (!kSplits.count(c.eval_split)) throw ConfigError("eval.split must be train, valid, test or all");
  c.spm_require_all = get<bool>(eval, "eval", "spm_require_all", c.spm_require_all);
  c.coverage_k = get<std::size_t>(eval, "eval", "coverage_k", c.coverage_k);
  c.adapter_timeout_ms = get<std::int64_t>(eval, "eval", "adapter_timeout_ms", c.adapter_timeout_ms);
  c.max_in_flight = get<std::size_t>(eval, "eval", "max_in_flight", c.max_in_flight);

  auto output = section("output");
  c.out_dir = resolve(base_dir, get<std::string>(output, "output", "dir", "out"));
  return c;
}

void apply_override(Json& config, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like section.key=value: " + assignment);
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("override key needs a section: " + path);
  Json parsed;
  try {
    parsed = parse_toml("v = " + value).at("v");
  } catch (const std::exception&) {
    parsed = value;
  }
  config[path.substr(0, dot)][path.substr(dot + 1)] = parsed;
}

RunConfig RunConfig::load(const fs::path& path, const std::vector<std::string>& overrides) {
  Json j;
  try {
    std::string text = read_file(path);
    j = path.extension() == ".json" ? Json::parse(text) : parse_toml(text);
  } catch (const TomlError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j, fs::absolute(path).parent_path());
}

Json RunConfig::to_json() const {
  return Json{
      {"corpus",
       {{"requirements", requirements},
        {"registry", registry.string()},
        {"installer", installer},
        {"python", python},
        {"stdlib", stdlib.string()},
        {"jobs", jobs}}},
      {"analyzer", {{"command", analyzer_command}, {"timeout_ms", timeout_ms}}},
      {"extract", {{"denylist", denylist}, {"max_stored_usages", max_stored_usages}}},
      {"split", {{"level", level}, {"ratio", ratio}, {"seed", seed}, {"attempts", attempts}}},
      {"assemble",
       {{"preset", preset},
        {"template", template_name},
        {"mode", mode},
        {"usage_order", usage_order},
        {"total", total ? Json(*total) : Json(nullptr)}}},
      {"eval",
       {{"predictor", predictor},
        {"fallback", fallback},
        {"split", eval_split},
        {"spm_require_all", spm_require_all},
        {"coverage_k", coverage_k},
        {"adapter_timeout_ms", adapter_timeout_ms},
        {"max_in_flight", max_in_flight}}},
      {"output", {{"dir", out_dir.string()}}},
  };
}

std::string RunConfig::hash() const {
  // Output dir and job count excluded.
  Json j = to_json();
  j.erase("output");
  j["corpus"].erase("jobs");
  return sha256_hex(j.dump());
}

fs::path detect_stdlib(const std::string& python) {
  auto r = run_command({python, "-c", "import sysconfig; print(sysconfig.get_paths()['stdlib'])"});
  if (r.exit_code != 0) return {};
  std::string out = r.output;
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

}  // namespace callctx::pipeline
