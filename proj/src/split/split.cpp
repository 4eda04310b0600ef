#include "callctx/split/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace callctx::split {

void ImportGraph::add_node(const std::string& name) { nodes_.insert(name); }

void ImportGraph::add_edge(const std::string& from, const std::string& to) {
  add_node(from);
  add_node(to);
  if (from != to) edges_[from].insert(to);
}

void ImportGraph::mark_stdlib(const std::string& name) {
  add_node(name);
  stdlib_.insert(name);
}

void ImportGraph::set_candidates(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (const auto& n : names) add_node(n);
  candidates_ = std::move(names);
}

const ProjectSet& ImportGraph::successors(const std::string& node) const {
  static const ProjectSet kEmpty;
  auto it = edges_.find(node);
  return it == edges_.end() ? kEmpty : it->second;
}

std::vector<std::string> ImportGraph::candidates() const {
  if (candidates_) return *candidates_;
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (!stdlib_.count(n)) out.push_back(n);
  return out;
}

Json ImportGraph::to_json() const {
  Json edges = Json::array();
  for (const auto& [from, tos] : edges_)
    for (const auto& to : tos) edges.push_back(Json::array({from, to}));
  Json j{{"nodes", nodes_}, {"edges", edges}, {"stdlib", stdlib_}};
  if (candidates_) j["candidates"] = *candidates_;
  return j;
}

ImportGraph ImportGraph::from_json(const Json& j) {
  ImportGraph g;
  for (const auto& n : j.value("nodes", Json::array())) g.add_node(n.get<std::string>());
  for (const auto& e : j.value("edges", Json::array())) {
    if (!e.is_array() || e.size() != 2) throw SplitError("edge must be a [from, to] pair");
    g.add_edge(e[0].get<std::string>(), e[1].get<std::string>());
  }
  for (const auto& s : j.value("stdlib", Json::array())) g.mark_stdlib(s.get<std::string>());
  if (j.contains("candidates")) g.set_candidates(j.at("candidates").get<std::vector<std::string>>());
  return g;
}

ImportGraph ImportGraph::load(const std::filesystem::path& path) { return from_json(read_json(path)); }

ProjectSet closure(const ImportGraph& graph, const ProjectSet& set) {
  ProjectSet out;
  for (const auto& n : set) {
    if (!graph.contains(n)) throw SplitError("unknown project: " + n);
    out.insert(n);
    const auto& succ = graph.successors(n);
    out.insert(succ.begin(), succ.end());
  }
  return out;
}

Ratio Ratio::parse(const std::string& text) {
  Ratio r;
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size() || v < 0) throw SplitError("");
      parts.push_back(v);
    } catch (const std::exception&) {
      throw SplitError("bad ratio: " + text);
    }
  }
  if (parts.size() != 3 || parts[0] + parts[1] + parts[2] <= 0 || parts[2] <= 0) {
    throw SplitError("bad ratio: " + text);
  }
  r.train = parts[0];
  r.valid = parts[1];
  r.test = parts[2];
  return r;
}

std::string Ratio::render() const {
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  return fmt(train) + ":" + fmt(valid) + ":" + fmt(test);
}

Json SplitManifest::to_json() const {
  return Json{{"level", level},
              {"seed", seed},
              {"ratio", ratio.render()},
              {"train", train},
              {"valid", valid},
              {"test", test},
              {"train_closure", train_closure},
              {"test_closure", test_closure},
              {"valid_test_overlap", valid_test_overlap},
              {"warnings", warnings}};
}

SplitManifest SplitManifest::from_json(const Json& j) {
  SplitManifest m;
  m.level = j.at("level").get<int>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.ratio = Ratio::parse(j.value("ratio", std::string("10:1:1")));
  m.train = j.at("train").get<ProjectSet>();
  m.valid = j.at("valid").get<ProjectSet>();
  m.test = j.at("test").get<ProjectSet>();
  m.train_closure = j.value("train_closure", ProjectSet{});
  m.test_closure = j.value("test_closure", ProjectSet{});
  m.valid_test_overlap = j.value("valid_test_overlap", ProjectSet{});
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

std::string SplitManifest::label_of(const std::string& project) const {
  if (train.count(project)) return "train";
  if (valid.count(project)) return "valid";
  if (test.count(project)) return "test";
  return "";
}

namespace {

ProjectSet without_stdlib(const ProjectSet& s, const ImportGraph& g) {
  ProjectSet out;
  for (const auto& n : s)
    if (!g.stdlib().count(n)) out.insert(n);
  return out;
}

void add_shared(const ProjectSet& a, const ProjectSet& b, const std::string& rule, std::vector<Violation>& out) {
  for (const auto& n : a)
    if (b.count(n)) out.push_back(Violation{n, rule});
}

}  // namespace

std::vector<Violation> check_isolation(const ProjectSet& train, const ProjectSet& test, int level,
                                       const ImportGraph& graph) {
  if (level < 1 || level > 4) throw SplitError("isolation level must be 1..4");
  auto s = without_stdlib(train, graph);
  auto t = without_stdlib(test, graph);
  auto s1 = without_stdlib(closure(graph, train), graph);
  auto t1 = without_stdlib(closure(graph, test), graph);
  std::vector<Violation> out;
  switch (level) {
    case 1:
      add_shared(s, t, "s ∩ t", out);
      break;
    case 2:
      add_shared(s1, t, "s1 ∩ t", out);
      break;
    case 3:
      add_shared(s1, t, "s1 ∩ t", out);
      add_shared(s, t1, "s ∩ t1", out);
      break;
    case 4:
      add_shared(s1, t1, "s1 ∩ t1", out);
      break;
  }
  return out;
}

std::vector<Violation> check_isolation(const SplitManifest& manifest, const ImportGraph& graph) {
  return check_isolation(manifest.train, manifest.test, manifest.level, graph);
}

namespace {

// Fisher-Yates over a fixed engine so results do not depend on the standard
// library's shuffle.
void shuffle(std::vector<std::string>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

struct Attempt {
  ProjectSet train, valid, test;
  double deviation = 0;
  std::size_t placed() const { return train.size() + valid.size() + test.size(); }
};

double deviation(const Attempt& a, const Ratio& r) {
  double total = static_cast<double>(a.placed());
  double sum = r.train + r.valid + r.test;
  if (total == 0) return 3.0;
  return std::abs(a.train.size() / total - r.train / sum) + std::abs(a.valid.size() / total - r.valid / sum) +
         std::abs(a.test.size() / total - r.test / sum);
}

bool intersects(const ProjectSet& a, const ProjectSet& b) {
  for (const auto& n : a)
    if (b.count(n)) return true;
  return false;
}

using Closures = std::map<std::string, std::pair<ProjectSet, ProjectSet>, std::less<>>;

Attempt attempt(const ImportGraph& g, const Closures& closures, std::vector<std::string> order, std::size_t n_test,
                std::size_t n_valid, int level, std::mt19937_64& rng) {
  shuffle(order, rng);
  Attempt a;
  std::size_t i = 0;
  for (; i < order.size() && a.test.size() < n_test; ++i) a.test.insert(order[i]);
  for (; i < order.size() && a.valid.size() < n_valid; ++i) a.valid.insert(order[i]);

  ProjectSet held = a.test;
  held.insert(a.valid.begin(), a.valid.end());
  held = without_stdlib(held, g);
  ProjectSet held1 = without_stdlib(closure(g, held), g);
  for (; i < order.size(); ++i) {
    const auto& p = order[i];
    const auto& [p0, p1] = closures.at(p);
    bool ok = true;
    switch (level) {
      case 1:
        ok = !intersects(p0, held);
        break;
      case 2:
        ok = !intersects(p1, held);
        break;
      case 3:
        ok = !intersects(p1, held) && !intersects(p0, held1);
        break;
      default:
        ok = !intersects(p1, held1);
        break;
    }
    if (ok) a.train.insert(p);
  }
  return a;
}

}  // namespace

SplitManifest sample_split(const ImportGraph& graph, const SampleOptions& options) {
  if (options.level < 1 || options.level > 4) throw SplitError("isolation level must be 1..4");
  SplitManifest m;
  m.level = options.level;
  m.seed = options.seed;
  m.ratio = options.ratio;
  auto pool = graph.candidates();
  for (const auto& p : pool)
    if (!graph.contains(p)) throw SplitError("unknown project: " + p);
  if (pool.empty()) {
    m.warnings.push_back("no candidate projects");
    return m;
  }

  const Ratio& r = options.ratio;
  double sum = r.train + r.valid + r.test;
  auto n = static_cast<double>(pool.size());
  std::size_t base_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(n * r.test / sum)));
  std::size_t max_test = std::min(pool.size(), 2 * base_test);

  Closures closures;
  for (const auto& p : pool) {
    closures.emplace(p, std::make_pair(without_stdlib({p}, graph), without_stdlib(closure(graph, {p}), graph)));
  }

  std::optional<Attempt> best;
  std::mt19937_64 rng(options.seed);
  for (std::size_t n_test = 1; n_test <= max_test; ++n_test) {
    auto n_valid = static_cast<std::size_t>(std::lround(static_cast<double>(n_test) * r.valid / r.test));
    n_valid = std::min(n_valid, pool.size() - n_test);
    for (std::size_t k = 0; k < std::max<std::size_t>(1, options.attempts); ++k) {
      Attempt a = attempt(graph, closures, pool, n_test, n_valid, options.level, rng);
      a.deviation = deviation(a, r);
      bool better = !best || a.deviation < best->deviation - 1e-12 ||
                    (std::abs(a.deviation - best->deviation) <= 1e-12 && a.placed() > best->placed());
      if (better) best = std::move(a);
    }
  }

  m.train = std::move(best->train);
  m.valid = std::move(best->valid);
  m.test = std::move(best->test);
  m.train_closure = closure(graph, m.train);
  m.test_closure = closure(graph, m.test);
  auto v1 = without_stdlib(closure(graph, m.valid), graph);
  for (const auto& p : without_stdlib(m.test_closure, graph))
    if (v1.count(p)) m.valid_test_overlap.insert(p);
  if (m.train.empty() && pool.size() > m.test.size() + m.valid.size()) {
    m.warnings.push_back("infeasible at level " + std::to_string(options.level) +
                         ": no training project can be isolated from the held-out projects");
  } else if (best->deviation > 0.05) {
    m.warnings.push_back("ratio " + r.render() + " not achievable at level " + std::to_string(options.level) +
                         "; closest split returned");
  }
  return m;
}

}  // namespace callctx::split
