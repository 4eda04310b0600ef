#include <gtest/gtest.h>

#include "callctx/extract/extractor.hpp"
#include "callctx/extract/filters.hpp"
#include "callctx/python/lexer.hpp"
#include "callctx/python/source_file.hpp"
#include "support.hpp"

using namespace callctx;
using namespace callctx::extract;
using callctx::python::SourceFile;

namespace {

std::vector<CallInstance> calls(const std::string& src, bool top_level = false) {
  auto f = SourceFile::parse(src);
  return extract_calls(f, "p", "m.py", ExtractOptions{top_level});
}

CallInstance only(const std::string& src) {
  auto c = calls(src, true);
  EXPECT_EQ(c.size(), 1u) << src;
  return c.empty() ? CallInstance{} : c.front();
}

FilterVerdict verdict(const std::string& body, Resolution r = Resolution::Resolved) {
  return apply_filters(only("def f():\n    " + body + "\n"), r, FilterConfig{});
}

}  // namespace

TEST(Lexer, TokensAndLayout) {
  auto toks = python::tokenize("def f(a):\n    return a  # c\n");
  std::vector<python::TokenKind> kinds;
  for (const auto& t : toks) kinds.push_back(t.kind);
  using K = python::TokenKind;
  EXPECT_EQ(kinds, (std::vector<K>{K::Name, K::Name, K::Op, K::Name, K::Op, K::Op, K::Newline, K::Indent, K::Name,
                                   K::Name, K::Comment, K::Newline, K::Dedent, K::EndMarker}));
  EXPECT_EQ(python::fragment_tokens("x, f'a{b}' ** 2 # c"),
            (std::vector<std::string>{"x", ",", "f'a{b}'", "**", "2"}));
  EXPECT_THROW(python::tokenize_fragment("'open"), python::SyntaxError);
  EXPECT_THROW(python::tokenize("def f(:\n"), python::SyntaxError);
}

TEST(Extract, TableFullUsageLine) {
  std::string src =
      "def resolve_arguments(self, arguments, variables=None):\n"
      "    args, kwargs = self.arguments.map(positional, named)\n";
  auto c = only(src);
  EXPECT_EQ(c.callee_name, "map");
  EXPECT_EQ(c.callee_expr, "self.arguments.map");
  EXPECT_EQ(c.ground_truth_args, "positional, named");
  EXPECT_EQ(src.substr(c.args.begin_byte, c.args.end_byte - c.args.begin_byte), c.ground_truth_args);
  EXPECT_EQ(c.left_context.back(), "(");
  EXPECT_EQ(c.right_context.front(), ")");
  EXPECT_EQ(c.enclosing_fn_name, "resolve_arguments");
  EXPECT_EQ(c.id, "p:m.py:" + std::to_string(src.find("(positional")));
}

TEST(Extract, NestedCallsYieldOneEachInDocumentOrder) {
  auto c = calls("def h():\n    return f(g(x))\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].callee_name, "f");
  EXPECT_EQ(c[0].ground_truth_args, "g(x)");
  EXPECT_EQ(c[1].callee_name, "g");
  EXPECT_EQ(c[1].ground_truth_args, "x");
  EXPECT_TRUE(c[0].call.contains(c[1].call));
}

TEST(Extract, TopLevelCallsAreSkipped) {
  std::string src = "x = compute(1)\n\ndef f():\n    return compute(2)\n";
  auto c = calls(src);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].ground_truth_args, "2");
  auto all = calls(src, true);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_FALSE(all[0].in_function());
  EXPECT_EQ(apply_filters(all[0], Resolution::Resolved, {}), FilterVerdict::reject(Rule::OutsideFunction));
}

TEST(Extract, SpansNestAndMultiLineArgs) {
  std::string src = "class K:\n    def m(self):\n        a = self.x.map(\n            p, n)\n        return a\n";
  auto c = only(src);
  EXPECT_EQ(c.ground_truth_args, "p, n");
  EXPECT_EQ(c.args.start, (lsp::SourcePosition{3, 12}));
  ASSERT_TRUE(c.enclosing_fn);
  EXPECT_TRUE(c.enclosing_fn->contains(c.call));
  EXPECT_TRUE(c.call.contains(c.args));
}

TEST(Extract, InnermostFunctionOwnsTheCall) {
  auto c = only("def outer(a):\n    def inner(b):\n        return g(b)\n    return inner\n");
  EXPECT_EQ(c.enclosing_fn_name, "inner");
  EXPECT_EQ(c.left_context.front(), "def");
  EXPECT_EQ(c.left_context[1], "inner");
}

TEST(Extract, LambdaBodyUsesEnclosingFunction) {
  auto c = calls("def f(xs):\n    return sorted(xs, key=lambda v: weight(v))\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1].callee_name, "weight");
  EXPECT_EQ(c[1].enclosing_fn_name, "f");
}

TEST(Extract, DecoratorsSubscriptsAndCallResults) {
  auto c = calls("def f(t):\n    @wraps(t)\n    def g(): pass\n    return t[0](1) + make()(2)\n");
  ASSERT_EQ(c.size(), 4u);
  EXPECT_TRUE(c[0].decorator);
  EXPECT_EQ(c[1].callee_expr, "t[0]");
  EXPECT_EQ(c[1].callee_name, "t");
  EXPECT_EQ(c[2].callee_expr, "make");
  EXPECT_EQ(c[3].callee_expr, "make()");
  EXPECT_EQ(c[3].callee_name, "make");
}

TEST(Extract, DefinitionsAreNotCalls) {
  EXPECT_TRUE(calls("def f(a, b):\n    pass\nclass C(Base):\n    pass\n").empty());
  EXPECT_TRUE(calls("def f():\n    return (a + b)\n").empty());
}

TEST(Extract, DeterministicAndMultiByteColumns) {
  std::string src = "def f():\n    s = 'é'; return g(s, '日本', x)\n";
  auto a = calls(src);
  auto b = calls(src);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(to_json(a[0]), to_json(b[0]));
  // `é` is two bytes but one UTF-16 unit.
  EXPECT_EQ(src.substr(a[0].args.begin_byte, 1), "s");
  EXPECT_EQ(a[0].args.begin_byte - src.find('\n') - 1, 23u);
  EXPECT_EQ(a[0].args.start.character, 22u);
  EXPECT_EQ(a[0].args.end.character, 32u);
  EXPECT_EQ(instance_from_json(to_json(a[0])).ground_truth_args, a[0].ground_truth_args);
}

TEST(Filters, RuleExamples) {
  EXPECT_EQ(verdict("print(\"done\")"), FilterVerdict::reject(Rule::ErrorOrLogging));
  EXPECT_EQ(verdict("compute()"), FilterVerdict::reject(Rule::NoArguments));
  EXPECT_EQ(verdict("path.join(a, \"b\")"), FilterVerdict::reject(Rule::StringLiteral));
  EXPECT_EQ(verdict("args, kwargs = self.arguments.map(positional, named)"), FilterVerdict::keep());
}

TEST(Filters, EachRule) {
  EXPECT_EQ(verdict("raise ValueError(x)"), FilterVerdict::reject(Rule::ErrorOrLogging));
  EXPECT_EQ(verdict("raise make_error(x)"), FilterVerdict::reject(Rule::ErrorOrLogging));
  EXPECT_EQ(verdict("logger.info(x)"), FilterVerdict::reject(Rule::ErrorOrLogging));
  EXPECT_EQ(verdict("stats.info(x)"), FilterVerdict::keep());
  EXPECT_EQ(verdict("return int(x)"), FilterVerdict::reject(Rule::TypeConversion));
  EXPECT_EQ(verdict("return dict(a=1)"), FilterVerdict::reject(Rule::TypeConversion));
  EXPECT_EQ(verdict("return np.float64(x)"), FilterVerdict::keep());
  EXPECT_EQ(verdict("self.assertEqual(a, b)"), FilterVerdict::reject(Rule::TestAssertion));
  EXPECT_EQ(verdict("assert_allclose(a, b)"), FilterVerdict::reject(Rule::TestAssertion));
  EXPECT_EQ(verdict("g(x)", Resolution::Unresolved), FilterVerdict::reject(Rule::Unresolved));
  EXPECT_EQ(verdict("g(x)", Resolution::Pending), FilterVerdict::keep());
  auto nested = calls("def f():\n    g(h(x, 'k'))\n");
  EXPECT_EQ(apply_filters(nested[0], Resolution::Resolved, {}), FilterVerdict::reject(Rule::StringLiteral));
  EXPECT_EQ(verdict("time.sleep(1)"), FilterVerdict::reject(Rule::Denylisted));
  EXPECT_EQ(verdict("parser.add_argument(x)"), FilterVerdict::reject(Rule::Denylisted));
}

TEST(Filters, RuleOrderAndR6Last) {
  // Zero arguments wins over an unresolved definition.
  EXPECT_EQ(verdict("compute()", Resolution::Unresolved), FilterVerdict::reject(Rule::NoArguments));
  // R1 before R7.
  EXPECT_EQ(verdict("print('x')"), FilterVerdict::reject(Rule::ErrorOrLogging));
}

TEST(Filters, DenylistFileAndHistogram) {
  testsupport::TempDir tmp;
  write_file(tmp / "deny.txt", "# names\nfetch\n  retry  # trailing\n");
  auto cfg = FilterConfig::from_file(tmp / "deny.txt");
  EXPECT_EQ(cfg.denylist, (std::set<std::string>{"fetch", "retry"}));
  auto inst = only("def f():\n    fetch(u)\n");
  EXPECT_EQ(apply_filters(inst, Resolution::Resolved, cfg), FilterVerdict::reject(Rule::Denylisted));

  RuleHistogram h;
  h.add(FilterVerdict::keep());
  h.add(FilterVerdict::reject(Rule::NoArguments));
  h.add(FilterVerdict::reject(Rule::NoArguments));
  EXPECT_EQ(h.kept(), 1u);
  EXPECT_EQ(h.rejected(Rule::NoArguments), 2u);
  EXPECT_EQ(h.to_json()["rejected"]["R5"], 2);
  EXPECT_EQ(rule_tag(Rule::Denylisted), "R8");
  EXPECT_EQ(rule_from_tag("R6"), Rule::Unresolved);
  EXPECT_FALSE(rule_from_tag("R9").has_value());
}
