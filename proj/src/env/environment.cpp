#include "callctx/env/environment.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "callctx/util/io.hpp"
#include "callctx/util/subprocess.hpp"

namespace callctx::env {

namespace fs = std::filesystem;

Json to_json(const Project& p) {
  return Json{{"name", p.name},
              {"version", p.version},
              {"license", p.license},
              {"source_root", p.source_root.string()},
              {"direct_deps", p.direct_deps},
              {"env_root", p.env_root.string()}};
}

std::string_view status_name(EnvironmentOutcome::Status s) {
  switch (s) {
    case EnvironmentOutcome::Status::Built:
      return "built";
    case EnvironmentOutcome::Status::Rejected:
      return "rejected";
    case EnvironmentOutcome::Status::Failed:
      return "failed";
  }
  return "failed";
}

fs::path find_site_packages(const fs::path& env_root) {
  fs::path lib = env_root / "lib";
  if (fs::is_directory(lib / "site-packages")) return lib / "site-packages";
  if (fs::is_directory(lib)) {
    std::vector<fs::path> candidates;
    for (const auto& e : fs::directory_iterator(lib)) {
      if (e.is_directory() && e.path().filename().string().rfind("python", 0) == 0 &&
          fs::is_directory(e.path() / "site-packages")) {
        candidates.push_back(e.path() / "site-packages");
      }
    }
    std::sort(candidates.begin(), candidates.end());
    if (!candidates.empty()) return candidates.front();
  }
  return lib / "site-packages";
}

std::string requirement_name(const std::string& requirement) {
  std::size_t end = 0;
  while (end < requirement.size() && (std::isalnum(static_cast<unsigned char>(requirement[end])) ||
                                      requirement[end] == '-' || requirement[end] == '_' || requirement[end] == '.')) {
    ++end;
  }
  return normalize_name(requirement.substr(0, end));
}

namespace {

std::optional<fs::path> registry_entry(const fs::path& registry, const std::string& name) {
  if (!fs::is_directory(registry)) return std::nullopt;
  for (const auto& e : fs::directory_iterator(registry)) {
    if (e.is_directory() && normalize_name(e.path().filename().string()) == name &&
        fs::exists(e.path() / "METADATA")) {
      return e.path();
    }
  }
  return std::nullopt;
}

std::string dist_info_name(const PackageMetadata& meta) {
  std::string n = meta.name;
  std::replace(n.begin(), n.end(), '-', '_');
  return n + "-" + meta.version + ".dist-info";
}

}  // namespace

InstallResult LocalRegistryInstaller::install(const std::string& requirement, const fs::path& env_root) {
  InstallResult result;
  result.site_packages = env_root / "lib" / "site-packages";

  // Transitive closure first; a missing package installs nothing.
  std::map<std::string, fs::path> resolved;
  std::vector<std::string> queue{requirement_name(requirement)};
  while (!queue.empty()) {
    std::string name = queue.back();
    queue.pop_back();
    if (resolved.count(name)) continue;
    auto entry = registry_entry(registry_, name);
    if (!entry) {
      result.error = "resolution: no package named '" + name + "' in registry";
      return result;
    }
    resolved[name] = *entry;
    for (const auto& dep : parse_metadata(read_file(*entry / "METADATA")).dependencies()) queue.push_back(dep);
  }

  fs::create_directories(result.site_packages);
  for (const auto& [name, dir] : resolved) {
    auto meta = parse_metadata(read_file(dir / "METADATA"));
    std::vector<std::string> record;
    std::set<std::string> tops;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().filename() != "METADATA") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& src : files) {
      auto rel = src.lexically_relative(dir);
      auto dst = result.site_packages / rel;
      fs::create_directories(dst.parent_path());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      auto bytes = read_file(src);
      record.push_back(rel.generic_string() + ",sha256=" + sha256_hex(bytes) + "," + std::to_string(bytes.size()));
      tops.insert(std::distance(rel.begin(), rel.end()) == 1 ? rel.stem().string() : rel.begin()->string());
    }
    fs::path info = result.site_packages / dist_info_name(meta);
    fs::create_directories(info);
    fs::copy_file(dir / "METADATA", info / "METADATA", fs::copy_options::overwrite_existing);
    std::string info_rel = info.filename().string();
    for (const char* f : {"METADATA", "INSTALLER", "top_level.txt"}) record.push_back(info_rel + "/" + f + ",,");
    record.push_back(info_rel + "/RECORD,,");
    std::string record_text;
    for (const auto& r : record) record_text += r + "\n";
    write_file(info / "RECORD", record_text);
    write_file(info / "INSTALLER", "callctx-local\n");
    std::string top_text;
    for (const auto& t : tops) top_text += t + "\n";
    write_file(info / "top_level.txt", top_text);
  }
  result.ok = true;
  return result;
}

InstallResult PipInstaller::install(const std::string& requirement, const fs::path& env_root) {
  InstallResult result;
  auto venv = run_command({python_, "-m", "venv", env_root.string()});
  if (venv.exit_code != 0) {
    result.error = "venv: " + venv.output;
    return result;
  }
  auto pip = run_command({(env_root / "bin" / "python").string(), "-m", "pip", "install",
                          "--disable-pip-version-check", "--no-input", requirement});
  if (pip.exit_code != 0) {
    auto tail = pip.output.size() > 2000 ? pip.output.substr(pip.output.size() - 2000) : pip.output;
    result.error = "pip install: " + tail;
    return result;
  }
  result.site_packages = find_site_packages(env_root);
  result.ok = true;
  return result;
}

EnvironmentOutcome build_environment(const std::string& requirement, const fs::path& env_root,
                                     Installer& installer) {
  EnvironmentOutcome out;
  std::error_code ec;
  fs::remove_all(env_root, ec);
  InstallResult installed;
  try {
    installed = installer.install(requirement, env_root);
  } catch (const std::exception& e) {
    installed.ok = false;
    installed.error = e.what();
  }
  if (!installed.ok) {
    out.status = EnvironmentOutcome::Status::Failed;
    out.reason = installed.error;
    fs::remove_all(env_root, ec);
    return out;
  }

  auto scan = scan_site_packages(installed.site_packages);
  auto baseline = installer.baseline();
  std::string wanted = requirement_name(requirement);
  const InstalledDistribution* self = nullptr;
  Json packages = Json::array();
  std::vector<std::string> rejected;
  for (const auto& dist : scan.distributions) {
    std::string n = normalize_name(dist.metadata.name);
    if (std::find(baseline.begin(), baseline.end(), n) != baseline.end()) continue;
    auto verdict = screen_license(dist.metadata);
    packages.push_back(Json{{"name", n},
                            {"version", dist.metadata.version},
                            {"license", verdict.accepted ? verdict.normalized : dist.metadata.license},
                            {"requires", dist.metadata.dependencies()}});
    if (!verdict.accepted) rejected.push_back(n + " (" + verdict.reason + ")");
    if (n == wanted) self = &dist;
  }
  out.lock = Json{{"project", wanted}, {"installer", installer.name()}, {"packages", packages}};

  if (!self) {
    out.status = EnvironmentOutcome::Status::Failed;
    out.reason = "installed environment has no distribution named '" + wanted + "'";
    fs::remove_all(env_root, ec);
    return out;
  }
  if (!rejected.empty()) {
    out.status = EnvironmentOutcome::Status::Rejected;
    out.reason = "license: ";
    for (std::size_t i = 0; i < rejected.size(); ++i) out.reason += (i ? ", " : "") + rejected[i];
    fs::remove_all(env_root, ec);
    return out;
  }

  Project p;
  p.name = wanted;
  p.version = self->metadata.version;
  p.license = screen_license(self->metadata).normalized;
  p.direct_deps = self->metadata.dependencies();
  p.env_root = env_root;
  p.source_root = installed.site_packages / (self->top_level.empty() ? std::string() : self->top_level.front());
  out.lock["version"] = p.version;
  out.project = std::move(p);
  out.status = EnvironmentOutcome::Status::Built;
  return out;
}

}  // namespace callctx::env
