#include <gtest/gtest.h>

#include <set>

#include "callctx/env/environment.hpp"
#include "callctx/env/license.hpp"
#include "callctx/env/metadata.hpp"
#include "callctx/env/universe.hpp"
#include "support.hpp"

using namespace callctx;
using namespace callctx::env;
using testsupport::fixtures;
using testsupport::TempDir;

TEST(License, AllowListExamples) {
  EXPECT_TRUE(screen_license_string("MIT License").accepted);
  EXPECT_EQ(screen_license_string("MIT License").normalized, "MIT");
  auto gpl = screen_license_string("GPL-3.0");
  EXPECT_FALSE(gpl.accepted);
  EXPECT_EQ(gpl.reason, "not-permissive:GPL");
  auto bsd = screen_license_string("BSD 3-Clause 'New'");
  EXPECT_TRUE(bsd.accepted);
  EXPECT_EQ(bsd.normalized, "BSD");
}

TEST(License, Normalization) {
  struct Case {
    std::string text;
    bool accepted;
    std::string family;
  };
  std::vector<Case> cases = {
      {"Apache License 2.0", true, "Apache"},   {"Apache-2.0", true, "Apache"},
      {"BSD-3-Clause", true, "BSD"},            {"new BSD license", true, "BSD"},
      {"CC0 1.0 Universal", true, "CC0"},       {"ZPL 2.1", true, "ZPL 2.1"},
      {"ISC", true, "ISCL"},                    {"ISCL", true, "ISCL"},
      {"PSF", true, "PSF"},                     {"Python Software Foundation License", true, "PSF"},
      {"HPND", true, "HPND"},                   {"The Unlicense", true, "Unlicense"},
      {"MIT OR Apache-2.0", true, "MIT"},       {"LGPLv3", false, "LGPL"},
      {"GNU Affero General Public License v3", false, "AGPL"},
      {"MPL 2.0", false, "MPL"},                {"ZPL 2.0", false, "ZPL"},
  };
  for (const auto& c : cases) {
    auto v = screen_license_string(c.text);
    EXPECT_EQ(v.accepted, c.accepted) << c.text;
    EXPECT_EQ(v.normalized, c.family) << c.text;
  }
}

TEST(License, MissingIsUnknown) {
  for (const char* s : {"", "UNKNOWN", "  ", "Other/Proprietary License", "blah"}) {
    auto v = screen_license_string(s);
    EXPECT_FALSE(v.accepted) << s;
  }
  EXPECT_EQ(screen_license_string("").reason, "unknown-license");
  EXPECT_EQ(screen_license_string("blah").reason, "unknown-license");
}

TEST(License, ClassifierFallback) {
  auto meta = parse_metadata(
      "Metadata-Version: 2.1\nName: x\nVersion: 1\nLicense: UNKNOWN\n"
      "Classifier: License :: OSI Approved :: MIT License\n");
  auto v = screen_license(meta);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.normalized, "MIT");
}

TEST(Metadata, ParseAndDependencies) {
  auto meta = parse_metadata(
      "Metadata-Version: 2.1\nName: Foo_Bar\nVersion: 2.0\nLicense: MIT\n"
      "Requires-Dist: Requests (>=2.0)\nRequires-Dist: pytest; extra == \"test\"\n"
      "Requires-Dist: six\nRequires-Dist: six>=1.0\n\nlong description\nName: ignored\n");
  EXPECT_EQ(meta.name, "Foo_Bar");
  EXPECT_EQ(meta.version, "2.0");
  EXPECT_EQ(meta.dependencies(), (std::vector<std::string>{"requests", "six"}));
  EXPECT_EQ(normalize_name("Foo_Bar.baz--Q"), "foo-bar-baz-q");
  EXPECT_EQ(requirement_name("Foo_Bar>=1"), "foo-bar");
}

TEST(Environment, PackageWithOneDependencyInstallsBoth) {
  TempDir tmp;
  LocalRegistryInstaller inst(fixtures() / "registry");
  auto out = build_environment("zeta", tmp / "zeta", inst);
  ASSERT_EQ(out.status, EnvironmentOutcome::Status::Built) << out.reason;
  auto scan = scan_site_packages(find_site_packages(tmp / "zeta"));
  std::set<std::string> names;
  for (const auto& d : scan.distributions) names.insert(normalize_name(d.metadata.name));
  EXPECT_EQ(names, (std::set<std::string>{"textfmt", "zeta"}));
  EXPECT_EQ(out.project->direct_deps, (std::vector<std::string>{"textfmt"}));
  ASSERT_EQ(out.lock["packages"].size(), 2u);
  EXPECT_EQ(out.lock["packages"][0]["version"], "1.2");
}

TEST(Environment, DependencyFreePackageInstallsAlone) {
  TempDir tmp;
  LocalRegistryInstaller inst(fixtures() / "registry");
  auto out = build_environment("alpha", tmp / "alpha", inst);
  ASSERT_EQ(out.status, EnvironmentOutcome::Status::Built);
  auto scan = scan_site_packages(find_site_packages(tmp / "alpha"));
  ASSERT_EQ(scan.distributions.size(), 1u);
  EXPECT_EQ(scan.distributions[0].metadata.name, "alpha");
  EXPECT_EQ(scan.distributions[0].top_level, (std::vector<std::string>{"alpha"}));
}

TEST(Environment, NonPermissiveDependencyRejectsProject) {
  TempDir tmp;
  LocalRegistryInstaller inst(fixtures() / "registry");
  auto out = build_environment("usesgpl", tmp / "usesgpl", inst);
  EXPECT_EQ(out.status, EnvironmentOutcome::Status::Rejected);
  EXPECT_NE(out.reason.find("copyleft"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(tmp / "usesgpl"));
}

TEST(Environment, ResolutionFailureIsRecorded) {
  TempDir tmp;
  LocalRegistryInstaller inst(fixtures() / "registry");
  auto out = build_environment("brokendep", tmp / "b", inst);
  EXPECT_EQ(out.status, EnvironmentOutcome::Status::Failed);
  EXPECT_NE(out.reason.find("nosuchpackage"), std::string::npos);
}

class UniverseTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir();
    LocalRegistryInstaller inst(fixtures() / "registry");
    auto out = build_environment("mathkit", *tmp_ / "mathkit", inst);
    ASSERT_EQ(out.status, EnvironmentOutcome::Status::Built);
    project_ = new Project(*out.project);
  }
  static void TearDownTestSuite() {
    delete project_;
    delete tmp_;
  }
  static TempDir* tmp_;
  static Project* project_;
};
TempDir* UniverseTest::tmp_ = nullptr;
Project* UniverseTest::project_ = nullptr;

TEST_F(UniverseTest, OriginsPartitionFiles) {
  auto u = enumerate_sources(*project_, fixtures() / "stdlib");
  std::set<std::string> seen;
  for (const auto& f : u.files) {
    EXPECT_TRUE(seen.insert(f.path).second) << f.path;
    auto o = u.origin_of(f.path);
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(*o, f.origin);
  }
  EXPECT_EQ(u.origin_of("lib/site-packages/mathkit/stats.py"), Origin::InProject);
  EXPECT_EQ(u.origin_of("lib/site-packages/vectorlib/ops.py"), Origin::ThirdParty);
  EXPECT_EQ(u.origin_of("@stdlib/os/path.py"), Origin::Stdlib);
  EXPECT_EQ(u.origin_of("@stdlib/pickle.py"), Origin::Stdlib);
  EXPECT_TRUE(is_stdlib_module("os", u));
  EXPECT_TRUE(is_stdlib_module("pickle", u));
  EXPECT_FALSE(is_stdlib_module("vectorlib", u));
  EXPECT_TRUE(std::is_sorted(u.files.begin(), u.files.end(),
                             [](const auto& a, const auto& b) { return a.path < b.path; }));
}

TEST_F(UniverseTest, EnumerationIsDeterministicAndRoundTrips) {
  auto a = enumerate_sources(*project_, fixtures() / "stdlib");
  auto b = enumerate_sources(*project_, fixtures() / "stdlib");
  EXPECT_EQ(a.to_json(tmp_->path()), b.to_json(tmp_->path()));
  auto back = SourceUniverse::from_json(a.to_json(tmp_->path()), tmp_->path());
  EXPECT_EQ(back.to_json(tmp_->path()), a.to_json(tmp_->path()));
  EXPECT_EQ(back.physical("lib/site-packages/mathkit/stats.py"),
            project_->env_root / "lib/site-packages/mathkit/stats.py");
  EXPECT_EQ(a.logical(fixtures() / "stdlib" / "os" / "path.py"), "@stdlib/os/path.py");
}

TEST_F(UniverseTest, BrokenMetadataOmitsFilesWithWarning) {
  TempDir tmp;
  std::filesystem::copy(project_->env_root, tmp / "env", std::filesystem::copy_options::recursive);
  auto site = find_site_packages(tmp / "env");
  write_file(site / "vectorlib-1.4.0.dist-info" / "RECORD", "");
  std::filesystem::remove(site / "vectorlib-1.4.0.dist-info" / "METADATA");
  Project p = *project_;
  p.env_root = tmp / "env";
  auto u = enumerate_sources(p, {});
  EXPECT_FALSE(u.warnings.empty());
  for (const auto& f : u.files) EXPECT_EQ(f.path.find("vectorlib/"), std::string::npos) << f.path;
}
