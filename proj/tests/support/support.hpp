#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "callctx/pipeline/config.hpp"
#include "callctx/pipeline/run.hpp"
#include "callctx/split/split.hpp"
#include "callctx/util/io.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixtures() { return CALLCTX_FIXTURES_DIR; }
inline std::string mock_lsp() { return CALLCTX_MOCK_LSP; }
inline std::string adapter_stub() { return CALLCTX_ADAPTER_STUB; }
inline std::string cli() { return CALLCTX_CLI; }

class TempDir {
 public:
  TempDir() {
    static std::random_device rd;
    path_ = fs::temp_directory_path() / ("callctx-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Fixture corpus config with the mock analyzer and `out` filled in.
inline callctx::pipeline::RunConfig fixture_config(const fs::path& out, std::vector<std::string> overrides = {}) {
  overrides.push_back("analyzer.command=[\"" + mock_lsp() + "\", \"--index\"]");
  overrides.push_back("output.dir=" + out.string());
  return callctx::pipeline::RunConfig::load(fixtures() / "pipeline.toml", overrides);
}

// One pipeline run over the fixture corpus, shared by every test in the process.
inline const fs::path& fixture_run() {
  static TempDir dir;
  static bool done = [] {
    auto manifest = callctx::pipeline::pipeline_run(fixture_config(dir.path() / "out"));
    if (!manifest.ok()) throw std::runtime_error("fixture run failed at " + *manifest.failed_stage);
    return true;
  }();
  static const fs::path out = dir.path() / "out";
  (void)done;
  return out;
}

// Decodes UTF-8 into code points without going through the library.
inline std::vector<std::uint32_t> code_points(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    std::uint32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < n && i + k < s.size(); ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += n;
  }
  return out;
}

// Full-matrix Levenshtein, the textbook recurrence.
inline std::size_t dp_levenshtein(const std::string& a8, const std::string& b8) {
  auto a = code_points(a8);
  auto b = code_points(b8);
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

inline double dp_edit_similarity(const std::string& a, const std::string& b) {
  std::size_t m = std::max(code_points(a).size(), code_points(b).size());
  if (m == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(dp_levenshtein(a, b)) / static_cast<double>(m));
}

// Hand-rolled generators.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double real() { return std::uniform_real_distribution<double>(0, 1)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[size(0, v.size() - 1)];
  }

  // Mix of ASCII, two-, three- and four-byte characters.
  std::string text(std::size_t max_len) {
    static const std::vector<std::string> pool = {"a", "b", "c", "x", " ", "_", "(", ",", "\"", "\\", "\n", "\t",
                                                  "é", "ß", "日", "本", "€", "😀", "\x01", "/", "{", "}"};
    std::string s;
    std::size_t n = size(0, max_len);
    for (std::size_t i = 0; i < n; ++i) s += pick(pool);
    return s;
  }

  std::string ident() {
    static const std::vector<std::string> pool = {"a", "b", "c", "d", "x", "y", "self", "value", "items", "n",
                                                  "key", "data", "f", "g", "ctx", "args", "kw", "i", "j", "out"};
    return pick(pool);
  }

  std::vector<std::string> tokens(std::size_t max_len) {
    std::vector<std::string> out;
    std::size_t n = size(0, max_len);
    for (std::size_t i = 0; i < n; ++i) out.push_back(ident());
    return out;
  }

  // Random direct-import graph; some nodes are marked stdlib.
  callctx::split::ImportGraph graph(std::size_t max_nodes) {
    callctx::split::ImportGraph g;
    std::size_t n = size(1, max_nodes);
    double density = real() * 3.0 / static_cast<double>(n);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back("p" + std::to_string(i));
      g.add_node(names.back());
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && real() < density) g.add_edge(names[i], names[j]);
      }
    }
    std::size_t libs = size(0, std::min<std::size_t>(3, n - 1));
    for (std::size_t k = 0; k < libs; ++k) g.mark_stdlib(pick(names));
    return g;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testsupport
