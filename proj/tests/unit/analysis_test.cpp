#include <gtest/gtest.h>

#include <map>
#include <set>

#include "callctx/analysis/implementation.hpp"
#include "callctx/analysis/resolver.hpp"
#include "callctx/analysis/signature.hpp"
#include "callctx/extract/extractor.hpp"
#include "callctx/python/source_file.hpp"
#include "support.hpp"

using namespace callctx;
using namespace callctx::analysis;
using callctx::python::SourceFile;
using testsupport::fixture_run;
using testsupport::fixtures;
using testsupport::TempDir;
using K = Parameter::Kind;

namespace {

std::optional<ImplementationContext> impl_of(const std::string& src, const std::string& name, bool stub = false,
                                             const std::string& receiver = "") {
  auto f = SourceFile::parse(src);
  auto pos = src.find("def " + name);
  if (pos == std::string::npos) pos = src.find("class " + name) + 2;
  return extract_implementation(f, static_cast<std::uint32_t>(pos + 4), stub, receiver);
}

std::vector<Json> load(const std::string& name) { return read_jsonl(fixture_run() / name); }

}  // namespace

TEST(Signature, ParsesEveryKind) {
  auto s = parse_parameters("a, /, b=1, *args, c, d=2, **kw");
  ASSERT_EQ(s.params.size(), 6u);
  EXPECT_EQ(s.params[0], (Parameter{"a", K::PositionalOnly, false}));
  EXPECT_EQ(s.params[1], (Parameter{"b", K::PositionalOrKeyword, true}));
  EXPECT_EQ(s.params[2], (Parameter{"args", K::VarPositional, false}));
  EXPECT_EQ(s.params[3], (Parameter{"c", K::KeywordOnly, false}));
  EXPECT_EQ(s.params[4], (Parameter{"d", K::KeywordOnly, true}));
  EXPECT_EQ(s.params[5], (Parameter{"kw", K::VarKeyword, false}));
  EXPECT_EQ(s.positional_capacity(), 2u);
  EXPECT_TRUE(s.has_var_positional());
  EXPECT_TRUE(s.has_var_keyword());
  EXPECT_EQ(s.render(), "(a, /, b=..., *args, c, d=..., **kw)");
  EXPECT_EQ(Signature::from_json(s.to_json()), s);
}

TEST(Signature, AnnotationsAndBareStar) {
  auto s = parse_parameters("self, x: Dict[str, int] = {}, *, y: int, z=(1, 2)");
  ASSERT_EQ(s.params.size(), 4u);
  EXPECT_EQ(s.params[1], (Parameter{"x", K::PositionalOrKeyword, true}));
  EXPECT_EQ(s.params[2], (Parameter{"y", K::KeywordOnly, false}));
  EXPECT_EQ(s.bound().params.front().name, "x");
  EXPECT_EQ(s.bound().positional_capacity(), 1u);
}

TEST(Implementation, TableFullMap) {
  std::string src = read_file(fixtures() / "registry/robotlite/robotlite/running/arguments/spec.py");
  auto impl = impl_of(src, "map", false, "self.arguments");
  ASSERT_TRUE(impl);
  EXPECT_EQ(impl->kind, "function");
  EXPECT_EQ(impl->text,
            "def map(self, positional, named, replace_defaults=True):\n"
            "        mapper = ArgumentMapper(self)\n"
            "        return mapper.map(positional, named, replace_defaults)");
  EXPECT_FALSE(impl->stub);
  EXPECT_TRUE(impl->bound_receiver);
  ASSERT_TRUE(impl->signature);
  EXPECT_EQ(impl->signature->render(), "(positional, named, replace_defaults=...)");
  EXPECT_EQ(impl->tokens.front(), "def");
  EXPECT_EQ(impl->tokens.back(), ")");
}

TEST(Implementation, SingleLineAndUnboundCalls) {
  auto one = impl_of("def f(a, b): return a + b\n", "f");
  ASSERT_TRUE(one);
  EXPECT_EQ(one->text, "def f(a, b): return a + b");
  EXPECT_EQ(one->signature->params.size(), 2u);

  std::string cls = "class K:\n    def m(self, x):\n        return x\n    @staticmethod\n    def s(x):\n        return x\n";
  EXPECT_TRUE(impl_of(cls, "m", false, "obj")->bound_receiver);
  EXPECT_FALSE(impl_of(cls, "m", false, "K")->bound_receiver);
  EXPECT_EQ(impl_of(cls, "m", false, "K")->signature->params.size(), 2u);
  EXPECT_FALSE(impl_of(cls, "s", false, "obj")->bound_receiver);
}

TEST(Implementation, OverloadStubsAreHeaderOnly) {
  std::string src = read_file(fixtures() / "registry/stubby/stubby/core.pyi");
  auto impl = impl_of(src, "convert", true);
  ASSERT_TRUE(impl);
  EXPECT_TRUE(impl->stub);
  EXPECT_EQ(impl->text, "def convert(value: int, kind: None = ...) -> int:");
  auto plain = impl_of(src, "identity", true);
  EXPECT_TRUE(plain->stub);
  EXPECT_TRUE(is_stub(SourceFile::parse("def f(x):\n    \"\"\"doc\"\"\"\n    ...\n"), 1));
  EXPECT_FALSE(is_stub(SourceFile::parse("def f(x):\n    return ...\n"), 1));
}

TEST(Implementation, ClassUsesInit) {
  std::string src = "class P:\n    x = 1\n\n    def __init__(self, a, b=2):\n        self.a = a\n\n    def other(self):\n        pass\n";
  auto impl = impl_of(src, "P");
  ASSERT_TRUE(impl);
  EXPECT_EQ(impl->kind, "class");
  EXPECT_EQ(impl->signature->render(), "(a, b=...)");
  EXPECT_NE(impl->text.find("def __init__"), std::string::npos);
  EXPECT_EQ(impl->text.find("def other"), std::string::npos);
}

TEST(Resolver, ZerosDefinitionRange) {
  TempDir tmp;
  std::string src = read_file(fixtures() / "lsp" / "torch_zeros.py");
  write_file(tmp / "file.py", src);
  std::string pyi;
  for (int i = 0; i < 1547; ++i) pyi += "# line " + std::to_string(i) + "\n";
  pyi += "def zeros(*size: int, out: Tensor | None = None) -> Tensor: ...\n";
  write_file(tmp / "lib/torch/_C/_VariableFunctions.pyi", pyi);
  Json entry{{"method", "textDocument/definition"},
             {"params",
              {{"textDocument", {{"uri", path_to_uri(tmp / "file.py")}}},
               {"position", {{"line", 1}, {"character", 10}}}}},
             {"result",
              {{{"uri", path_to_uri(tmp / "lib/torch/_C/_VariableFunctions.pyi")},
                {"range", {{"start", {{"line", 1547}, {"character", 4}}}, {"end", {{"line", 1547}, {"character", 9}}}}}}}}};
  write_jsonl(tmp / "script.jsonl", {entry});

  env::SourceUniverse u;
  u.project = "demo";
  u.env_root = tmp.path();
  u.files = {{"file.py", env::Origin::InProject}};
  u.index();
  auto file = SourceFile::parse(src);
  auto calls = extract::extract_calls(file, "demo", "file.py", {true});
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].callee.start, (lsp::SourcePosition{1, 10}));

  lsp::SessionOptions o;
  o.command = {testsupport::mock_lsp(), "--transcript", (tmp / "script.jsonl").string()};
  o.workspace_root = tmp.path();
  lsp::AnalyzerClient client(o);
  SourceCache cache;
  auto res = resolve_call(client, u, cache, calls[0]);
  ASSERT_TRUE(res.call) << res.cause;
  EXPECT_EQ(res.call->def.file, "lib/torch/_C/_VariableFunctions.pyi");
  EXPECT_EQ(res.call->def.range.start, (lsp::SourcePosition{1547, 4}));
  EXPECT_EQ(res.call->def.range.end, (lsp::SourcePosition{1547, 9}));
  EXPECT_EQ(res.call->origin, env::Origin::ThirdParty);
  ASSERT_TRUE(res.call->implementation);
  EXPECT_TRUE(res.call->implementation->stub);
}

TEST(Resolver, TableFullScenarioOnFixtureCorpus) {
  auto resolved = load("resolved.jsonl");
  const Json* target = nullptr;
  for (const auto& r : resolved) {
    if (r["enclosing_fn_name"] == "_set_arguments" && r["callee_name"] == "map") target = &r;
  }
  ASSERT_NE(target, nullptr);
  EXPECT_EQ((*target)["ground_truth_args"], "positional, named");
  EXPECT_EQ((*target)["origin"], "in-project");
  EXPECT_EQ((*target)["def_range"]["file"], "lib/site-packages/robotlite/running/arguments/spec.py");
  EXPECT_EQ((*target)["implementation"]["text"],
            "def map(self, positional, named, replace_defaults=True):\n"
            "        mapper = ArgumentMapper(self)\n"
            "        return mapper.map(positional, named, replace_defaults)");
  const auto& usages = (*target)["usages"];
  ASSERT_EQ(usages.size(), 1u);
  EXPECT_EQ(usages[0]["args_text"], "positional, named");
  EXPECT_EQ(usages[0]["file"], "lib/site-packages/robotlite/running/library.py");
  auto tokens = usages[0]["tokens"].get<std::vector<std::string>>();
  EXPECT_EQ(tokens[0], "def");
  EXPECT_EQ(tokens[1], "resolve_arguments");
}

TEST(Resolver, OriginsOnFixtureCorpus) {
  std::map<std::string, std::string> by_callee;
  for (const auto& r : load("resolved.jsonl")) {
    by_callee[r["project"].get<std::string>() + ":" + r["callee_expr"].get<std::string>()] = r["origin"];
  }
  EXPECT_EQ(by_callee["robotlite:os.path.join"], "stdlib");
  EXPECT_EQ(by_callee["mathkit:pickle.dump"], "stdlib");
  EXPECT_EQ(by_callee["mathkit:dot"], "third-party");
  EXPECT_EQ(by_callee["mathkit:total"], "in-project");
  EXPECT_EQ(by_callee["robotlite:shorten"], "third-party");
  EXPECT_EQ(by_callee["mathkit:convert"], "third-party");
}

TEST(Resolver, UsageInvariantsOnFixtureCorpus) {
  auto resolved = load("resolved.jsonl");
  std::map<std::string, const Json*> by_id;
  std::map<std::string, std::set<std::string>> group_ranges;
  for (const auto& r : resolved) {
    by_id[r["id"]] = &r;
    group_ranges[r["def_group_id"]].insert(r["def_range"].dump());
  }
  for (const auto& [group, ranges] : group_ranges) EXPECT_EQ(ranges.size(), 1u) << group;
  std::size_t checked = 0;
  for (const auto& r : resolved) {
    for (const auto& u : r["usages"]) {
      ASSERT_NE(u["instance_id"], r["id"]);
      ASSERT_TRUE(by_id.count(u["instance_id"]));
      const Json& other = *by_id[u["instance_id"]];
      EXPECT_EQ(other["def_group_id"], r["def_group_id"]);
      EXPECT_EQ(other["project"], r["project"]);
      if (u["same_file"].get<bool>()) {
        EXPECT_LE(u["source"]["end_byte"].get<int>(), r["arg_span"]["start_byte"].get<int>());
      } else {
        EXPECT_NE(u["file"], r["file"]);
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 10u);
}

TEST(Resolver, StubDefinitionsAreFlagged) {
  for (const auto& r : load("resolved.jsonl")) {
    if (r["callee_expr"] == "convert") {
      EXPECT_EQ(r["def_range"]["file"], "lib/site-packages/stubby/core.pyi");
      EXPECT_TRUE(r["implementation"]["stub"].get<bool>());
      return;
    }
  }
  FAIL() << "no convert call";
}

TEST(Resolver, SameFileUsageAfterTargetIsExcluded) {
  std::string src =
      "def helper(a, b):\n    return a\n\n"
      "def one(x):\n    return helper(x, 1)\n\n"
      "def two(y):\n    return helper(y, 2)\n";
  auto f = SourceFile::parse(src);
  auto calls = extract::extract_calls(f, "p", "m.py");
  ASSERT_EQ(calls.size(), 2u);
  std::vector<ResolvedCall> rc(2);
  for (int i = 0; i < 2; ++i) {
    rc[i].instance = calls[i];
    rc[i].def = DefinitionSite{"m.py", extract::make_span(f, 4, 10)};
    rc[i].def_group_id = group_id(rc[i].def);
  }
  TempDir tmp;
  write_file(tmp / "m.py", src);
  env::SourceUniverse u;
  u.project = "p";
  u.env_root = tmp.path();
  u.files = {{"m.py", env::Origin::InProject}};
  u.index();
  SourceCache cache;
  attach_usages(rc, u, cache, 32);
  EXPECT_TRUE(rc[0].usages.empty());
  ASSERT_EQ(rc[1].usages.size(), 1u);
  EXPECT_EQ(rc[1].usages[0].args_text, "x, 1");
  EXPECT_TRUE(rc[1].usages[0].same_file);
}
