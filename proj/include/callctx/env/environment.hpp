#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "callctx/env/license.hpp"
#include "callctx/env/metadata.hpp"
#include "callctx/util/json.hpp"

namespace callctx::env {

struct Project {
  std::string name;
  std::string version;
  std::string license;
  std::filesystem::path source_root;  // the project's own top-level package directory
  std::vector<std::string> direct_deps;
  std::filesystem::path env_root;
};

Json to_json(const Project& p);

struct InstallResult {
  bool ok = false;
  std::string error;
  std::filesystem::path site_packages;
};

// Populates an isolated environment with a requirement and everything it
// depends on.
class Installer {
 public:
  virtual ~Installer() = default;
  virtual std::string name() const = 0;
  virtual InstallResult install(const std::string& requirement, const std::filesystem::path& env_root) = 0;
  // Distributions present before the requirement was installed (pip, setuptools).
  virtual std::vector<std::string> baseline() const { return {}; }
};

// Installs from a directory of unpacked packages: `<registry>/<name>/METADATA`
// plus the package's source tree. Writes pip-compatible dist-info records.
class LocalRegistryInstaller : public Installer {
 public:
  explicit LocalRegistryInstaller(std::filesystem::path registry) : registry_(std::move(registry)) {}
  std::string name() const override { return "local-registry"; }
  InstallResult install(const std::string& requirement, const std::filesystem::path& env_root) override;

 private:
  std::filesystem::path registry_;
};

// `python -m venv` followed by `pip install`.
class PipInstaller : public Installer {
 public:
  explicit PipInstaller(std::string python = "python3") : python_(std::move(python)) {}
  std::string name() const override { return "pip"; }
  InstallResult install(const std::string& requirement, const std::filesystem::path& env_root) override;
  std::vector<std::string> baseline() const override { return {"pip", "setuptools", "wheel"}; }

 private:
  std::string python_;
};

struct EnvironmentOutcome {
  enum class Status { Built, Rejected, Failed };
  Status status = Status::Failed;
  std::string reason;
  std::optional<Project> project;
  Json lock;  // resolved versions and licenses of every installed distribution
};

std::string_view status_name(EnvironmentOutcome::Status s);

// Installs `requirement` into `env_root` and screens the license of the
// project and of every installed dependency. Rejected environments are deleted.
EnvironmentOutcome build_environment(const std::string& requirement, const std::filesystem::path& env_root,
                                     Installer& installer);

// Normalized distribution name of a requirement string ("Foo_Bar>=1" -> "foo-bar").
std::string requirement_name(const std::string& requirement);

std::filesystem::path find_site_packages(const std::filesystem::path& env_root);

}  // namespace callctx::env
