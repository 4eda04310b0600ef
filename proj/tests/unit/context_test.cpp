#include <gtest/gtest.h>

#include "callctx/context/assemble.hpp"
#include "callctx/context/similarity.hpp"

using namespace callctx::context;

namespace {

std::vector<std::string> seq(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

UsageContext usage(const std::string& id, double sim, bool same_file = false, std::uint32_t distance = 0,
                   const std::string& file = "a.py") {
  UsageContext u;
  u.instance_id = id;
  u.similarity = sim;
  u.same_file = same_file;
  u.distance = distance;
  u.file = file;
  u.tokens = {id};
  return u;
}

std::vector<std::string> slot_names(const AssembledInput& in) {
  std::vector<std::string> out;
  for (const auto& s : in.slots) out.push_back(s.name);
  return out;
}

}  // namespace

TEST(Similarity, HalfOverlap) {
  auto s = usage_similarity(TokenSet{"a", "b", "c", "d"}, TokenSet{"b", "d", "e"});
  EXPECT_DOUBLE_EQ(s.value, 0.5);
  EXPECT_FALSE(s.empty_target);
}

TEST(Similarity, IdentityDisjointAndEmpty) {
  TokenSet a{"x", "y", "("};
  EXPECT_DOUBLE_EQ(usage_similarity(a, a).value, 1.0);
  EXPECT_DOUBLE_EQ(usage_similarity(a, TokenSet{"q"}).value, 0.0);
  auto e = usage_similarity(TokenSet{}, a);
  EXPECT_DOUBLE_EQ(e.value, 0.0);
  EXPECT_TRUE(e.empty_target);
  EXPECT_DOUBLE_EQ(usage_similarity(TokenSet{"x", "y", "z", "w"}, TokenSet{"x", "y", "z", "w", "extra"}).value, 1.0);
}

TEST(Similarity, TokenSetIgnoresRepeats) {
  auto s = token_set({"a", "a", "b"});
  EXPECT_EQ(s.size(), 2u);
}

TEST(Ranking, TopTwoBySimilarity) {
  auto r = rank_usages({usage("u1", 0.9), usage("u2", 0.4), usage("u3", 0.7)}, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].instance_id, "u1");
  EXPECT_EQ(r[1].instance_id, "u3");
}

TEST(Ranking, TiesPreferSameFileThenNearerThenPath) {
  auto r = rank_usages({usage("other", 0.5, false, 0, "a.py"), usage("far", 0.5, true, 900),
                        usage("near", 0.5, true, 10), usage("z", 0.5, false, 0, "z.py")},
                       10);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].instance_id, "near");
  EXPECT_EQ(r[1].instance_id, "far");
  EXPECT_EQ(r[2].instance_id, "other");
  EXPECT_EQ(r[3].instance_id, "z");
}

TEST(Ranking, FewerThanK) {
  EXPECT_EQ(rank_usages({usage("u1", 0.2)}, 3).size(), 1u);
  EXPECT_TRUE(rank_usages({}, 3).empty());
}

TEST(Truncation, LeftKeepsSuffixRightKeepsPrefix) {
  auto left = seq("l", 600);
  auto kept = truncate(left, 384, Direction::DropFromLeft);
  ASSERT_EQ(kept.size(), 384u);
  EXPECT_EQ(kept.front(), "l216");
  EXPECT_EQ(kept.back(), "l599");

  auto right = seq("r", 200);
  auto kr = truncate(right, 128, Direction::DropFromRight);
  ASSERT_EQ(kr.size(), 128u);
  EXPECT_EQ(kr.front(), "r0");
  EXPECT_EQ(kr.back(), "r127");

  EXPECT_EQ(truncate(seq("s", 5), 10, Direction::DropFromLeft).size(), 5u);
  EXPECT_TRUE(truncate(seq("s", 5), 0, Direction::DropFromRight).empty());
}

TEST(Budget, PresetShapes) {
  auto p = make_plan("1024x3x128", Template::EncoderDecoder, Mode::Unidirectional);
  EXPECT_EQ(p.total, 1024u);
  EXPECT_EQ(p.max_usages, 3u);
  EXPECT_EQ(p.per_usage, 128u);
  auto q = make_plan("1024x8x64", Template::EncoderDecoder, Mode::Infilling);
  EXPECT_EQ(q.max_usages, 8u);
  EXPECT_EQ(q.per_usage, 64u);
  EXPECT_GT(q.right_ctx, 0u);
  auto s = make_plan("512x3x64", Template::DecoderOnly, Mode::Unidirectional);
  EXPECT_EQ(s.total, 512u);
  EXPECT_EQ(s.right_ctx, 0u);
  for (const auto& name : preset_names()) {
    for (auto t : {Template::DecoderOnly, Template::EncoderDecoder}) {
      auto plan = make_plan(name, t, Mode::Unidirectional);
      EXPECT_TRUE(plan.feasible(t)) << name;
      EXPECT_EQ(plan.left_ctx + plan.implementation + plan.max_usages * plan.per_usage +
                    BudgetPlan::separator_overhead(t, plan.max_usages),
                plan.total)
          << name;
    }
  }
}

TEST(Budget, Rejections) {
  EXPECT_THROW(make_plan("cdi", Template::DecoderOnly, Mode::Infilling), AssemblyError);
  EXPECT_THROW(make_plan("nonsense", Template::EncoderDecoder, Mode::Unidirectional), AssemblyError);
  EXPECT_THROW(make_plan("128x8x64", Template::EncoderDecoder, Mode::Unidirectional), AssemblyError);
}

TEST(Assembly, BareLeftContextHasNoMarkers) {
  ContextBundle b;
  b.left = seq("l", 10);
  auto plan = make_plan("cdi", Template::DecoderOnly, Mode::Unidirectional);
  auto in = assemble(b, plan, Template::DecoderOnly, Mode::Unidirectional);
  EXPECT_EQ(in.tokens, b.left);
  EXPECT_EQ(slot_names(in), (std::vector<std::string>{"left"}));
}

TEST(Assembly, DecoderPutsBestUsageNextToLeft) {
  ContextBundle b;
  b.left = {"x", "="};
  b.usages = {usage("best", 0.9), usage("second", 0.3)};
  auto plan = make_plan("cdi", Template::DecoderOnly, Mode::Unidirectional);
  auto in = assemble(b, plan, Template::DecoderOnly, Mode::Unidirectional);
  EXPECT_EQ(in.tokens, (std::vector<std::string>{"<s>", "second", "</s>", "best", "</s>", "x", "="}));
  EXPECT_EQ(slot_names(in), (std::vector<std::string>{"usage_2", "usage_1", "left"}));
  auto flipped = assemble(b, plan, Template::DecoderOnly, Mode::Unidirectional, UsageOrder::MostSimilarFirst);
  EXPECT_EQ(slot_names(flipped), (std::vector<std::string>{"usage_1", "usage_2", "left"}));
}

TEST(Assembly, EncoderDecoderSlotOrder) {
  ContextBundle b;
  b.left = {"f", "("};
  b.right = {")", "\n"};
  b.implementation = std::vector<std::string>{"def", "f", "(", "a", ")", ":"};
  b.usages = {usage("u1", 0.8), usage("u2", 0.1)};
  auto plan = make_plan("finetune", Template::EncoderDecoder, Mode::Infilling);
  auto in = assemble(b, plan, Template::EncoderDecoder, Mode::Infilling);
  EXPECT_EQ(slot_names(in), (std::vector<std::string>{"left", "right", "implementation", "usage_1", "usage_2"}));
  EXPECT_EQ(in.text(), "<s> f ( <PREDICT> ) \n </s> def f ( a ) : </s> u1 </s> u2 </s>");
}

TEST(Assembly, UnidirectionalDropsRightContext) {
  ContextBundle b;
  b.left = {"f", "("};
  b.right = {")", "\n"};
  auto plan = make_plan("cdi", Template::EncoderDecoder, Mode::Unidirectional);
  auto in = assemble(b, plan, Template::EncoderDecoder, Mode::Unidirectional);
  EXPECT_EQ(in.text(), "f ( <PREDICT>");
}

TEST(Assembly, LongComponentsRespectTotal) {
  ContextBundle b;
  b.left = seq("l", 2000);
  b.right = seq("r", 2000);
  b.implementation = seq("i", 500);
  for (int i = 0; i < 5; ++i) {
    auto u = usage("u" + std::to_string(i), 1.0 - i * 0.1);
    u.tokens = seq("u" + std::to_string(i) + "_", 300);
    b.usages.push_back(u);
  }
  auto plan = make_plan("1024x3x128", Template::EncoderDecoder, Mode::Infilling);
  auto in = assemble(b, plan, Template::EncoderDecoder, Mode::Infilling);
  EXPECT_EQ(in.length(), 1024u);
  EXPECT_EQ(in.tokens[1], "l" + std::to_string(2000 - plan.left_ctx));
  const auto& left = in.slots[0];
  EXPECT_EQ(in.tokens[left.end - 1], "l1999");
  for (const auto& s : in.slots) {
    if (s.name == "implementation") EXPECT_EQ(in.tokens[s.begin], "i0");
    if (s.name == "usage_1") EXPECT_EQ(in.tokens[s.end - 1], "u0_299");
    if (s.name == "right") EXPECT_EQ(in.tokens[s.begin], "r0");
  }
}

TEST(Assembly, SpareBudgetGoesToLeft) {
  ContextBundle b;
  b.left = seq("l", 2000);
  b.implementation = std::vector<std::string>{"def", "f"};
  auto plan = make_plan("cdi", Template::DecoderOnly, Mode::Unidirectional);
  auto in = assemble(b, plan, Template::DecoderOnly, Mode::Unidirectional);
  EXPECT_EQ(in.length(), plan.total);
  EXPECT_EQ(in.slots.back().end - in.slots.back().begin, plan.total - 4);
}
