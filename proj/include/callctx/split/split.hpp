#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "callctx/util/json.hpp"

namespace callctx::split {

using ProjectSet = std::set<std::string>;

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Direct-import graph over projects. `candidates` are the projects a split
// may place; by default every non-stdlib node.
class ImportGraph {
 public:
  void add_node(const std::string& name);
  // Adds both endpoints. Self edges are ignored.
  void add_edge(const std::string& from, const std::string& to);
  void mark_stdlib(const std::string& name);
  void set_candidates(std::vector<std::string> names);

  const ProjectSet& nodes() const { return nodes_; }
  const ProjectSet& stdlib() const { return stdlib_; }
  const ProjectSet& successors(const std::string& node) const;
  bool contains(const std::string& node) const { return nodes_.count(node) > 0; }
  std::vector<std::string> candidates() const;

  // {"nodes": [...], "edges": [[from, to], ...], "stdlib": [...], "candidates": [...]}
  Json to_json() const;
  static ImportGraph from_json(const Json& j);
  static ImportGraph load(const std::filesystem::path& path);

 private:
  ProjectSet nodes_;
  std::map<std::string, ProjectSet> edges_;
  ProjectSet stdlib_;
  std::optional<std::vector<std::string>> candidates_;
};

// The set plus its direct imports (one hop). Throws SplitError on unknown nodes.
ProjectSet closure(const ImportGraph& graph, const ProjectSet& set);

struct Ratio {
  double train = 10, valid = 1, test = 1;
  static Ratio parse(const std::string& text);  // "10:1:1"
  std::string render() const;
};

struct SplitManifest {
  ProjectSet train, valid, test;
  int level = 4;
  std::uint64_t seed = 0;
  Ratio ratio;
  ProjectSet train_closure, test_closure;  // s_1 and t_1
  ProjectSet valid_test_overlap;           // shared closure members; reported, not enforced
  std::vector<std::string> warnings;

  Json to_json() const;
  static SplitManifest from_json(const Json& j);
  // "train" | "valid" | "test" | "" for unplaced projects.
  std::string label_of(const std::string& project) const;
};

struct Violation {
  std::string project;  // shared project
  std::string rule;     // e.g. "s1 ∩ t1"
  bool operator==(const Violation&) const = default;
};

// Isolation predicate of `level` (1..4) between train and test, with stdlib
// nodes exempt. Empty result means the manifest passes.
std::vector<Violation> check_isolation(const ProjectSet& train, const ProjectSet& test, int level,
                                       const ImportGraph& graph);
std::vector<Violation> check_isolation(const SplitManifest& manifest, const ImportGraph& graph);

struct SampleOptions {
  int level = 4;
  Ratio ratio;
  std::uint64_t seed = 0;
  std::size_t attempts = 16;  // seeds tried per test size
};

// Samples test and valid projects, then admits training projects in random
// order while the level predicate holds against test ∪ valid. Tries several
// seeds and test sizes and keeps the split closest to the ratio.
SplitManifest sample_split(const ImportGraph& graph, const SampleOptions& options);

}  // namespace callctx::split
