#include <gtest/gtest.h>

#include <numeric>

#include "callctx/context/assemble.hpp"
#include "callctx/context/similarity.hpp"
#include "callctx/eval/metrics.hpp"
#include "callctx/eval/report.hpp"
#include "callctx/lsp/json_rpc.hpp"
#include "callctx/split/split.hpp"
#include "support.hpp"

using namespace callctx;
using testsupport::Gen;

namespace {

Json random_json(Gen& g, int depth) {
  switch (g.size(0, depth > 0 ? 6 : 4)) {
    case 0:
      return nullptr;
    case 1:
      return g.coin();
    case 2:
      return static_cast<std::int64_t>(g.size(0, 1u << 30)) - (1 << 29);
    case 3:
      return g.real() * 1e6 - 5e5;
    case 4:
      return g.text(24);
    case 5: {
      Json a = Json::array();
      for (std::size_t i = 0, n = g.size(0, 4); i < n; ++i) a.push_back(random_json(g, depth - 1));
      return a;
    }
    default: {
      Json o = Json::object();
      for (std::size_t i = 0, n = g.size(0, 4); i < n; ++i) o[g.text(8)] = random_json(g, depth - 1);
      return o;
    }
  }
}

lsp::RpcMessage random_message(Gen& g) {
  lsp::RequestId id = g.coin() ? lsp::RequestId(static_cast<std::int64_t>(g.size(0, 1u << 20)))
                               : lsp::RequestId(g.text(6));
  Json params = g.coin(0.2) ? Json(nullptr) : random_json(g, 3);
  switch (g.size(0, 3)) {
    case 0:
      return lsp::RpcMessage::request(id, g.text(12), params);
    case 1:
      return lsp::RpcMessage::notification(g.text(12), params);
    case 2:
      return lsp::RpcMessage::response(id, random_json(g, 3));
    default:
      return lsp::RpcMessage::error_response(id, static_cast<int>(g.size(0, 70000)) - 35000, g.text(20));
  }
}

// Independent restatement of the isolation levels.
bool isolated(const split::ProjectSet& s, const split::ProjectSet& t, int level, const split::ImportGraph& g) {
  auto hop = [&](const split::ProjectSet& x) {
    split::ProjectSet out = x;
    for (const auto& n : x)
      for (const auto& m : g.successors(n)) out.insert(m);
    return out;
  };
  auto meets = [&](const split::ProjectSet& a, const split::ProjectSet& b) {
    for (const auto& n : a)
      if (b.count(n) && !g.stdlib().count(n)) return true;
    return false;
  };
  switch (level) {
    case 1:
      return !meets(s, t);
    case 2:
      return !meets(hop(s), t);
    case 3:
      return !meets(hop(s), t) && !meets(s, hop(t));
    default:
      return !meets(hop(s), hop(t));
  }
}

}  // namespace

TEST(Properties, WireRoundTrip) {
  Gen g(1);
  std::string stream;
  std::vector<lsp::RpcMessage> sent;
  for (int i = 0; i < 10000; ++i) {
    auto msg = random_message(g);
    std::string frame = lsp::frame_message(msg);
    lsp::StringSource one(frame);
    lsp::MessageReader reader(one);
    auto back = reader.next();
    ASSERT_TRUE(back) << i;
    ASSERT_EQ(*back, msg) << frame;
    ASSERT_FALSE(reader.next());
    if (i % 10 == 0) {
      stream += frame;
      sent.push_back(msg);
    }
  }
  lsp::StringSource all(stream);
  lsp::MessageReader reader(all);
  for (const auto& msg : sent) {
    auto back = reader.next();
    ASSERT_TRUE(back);
    ASSERT_EQ(*back, msg);
  }
  EXPECT_FALSE(reader.next());
}

TEST(Properties, SimilarityRangeIdentityMonotonicity) {
  Gen g(2);
  for (int i = 0; i < 10000; ++i) {
    auto target = context::token_set(g.tokens(12));
    auto usage = context::token_set(g.tokens(12));
    double s = context::usage_similarity(target, usage).value;
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    std::size_t shared = 0;
    for (const auto& t : target) shared += usage.count(t);
    double expected = target.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(target.size());
    ASSERT_DOUBLE_EQ(s, expected);
    if (!target.empty()) ASSERT_DOUBLE_EQ(context::usage_similarity(target, target).value, 1.0);
    auto bigger = usage;
    for (const auto& t : g.tokens(4)) bigger.insert(t);
    ASSERT_GE(context::usage_similarity(target, bigger).value, s);
  }
}

TEST(Properties, AssemblyRespectsBudgetAndKeepsPredictionNeighbours) {
  Gen g(3);
  using context::Mode;
  using context::Template;
  for (int i = 0; i < 1000; ++i) {
    const auto& preset = g.pick(context::preset_names());
    Template tmpl = g.coin() ? Template::DecoderOnly : Template::EncoderDecoder;
    Mode mode = tmpl == Template::DecoderOnly || g.coin() ? Mode::Unidirectional : Mode::Infilling;
    auto plan = context::make_plan(preset, tmpl, mode);

    context::ContextBundle b;
    for (std::size_t k = 0, n = g.size(1, 2000); k < n; ++k) b.left.push_back("L" + std::to_string(k));
    for (std::size_t k = 0, n = g.size(0, 800); k < n; ++k) b.right.push_back("R" + std::to_string(k));
    if (g.coin(0.7)) {
      b.implementation.emplace();
      for (std::size_t k = 0, n = g.size(0, 600); k < n; ++k) b.implementation->push_back("I" + std::to_string(k));
    }
    for (std::size_t u = 0, n = g.size(0, 10); u < n; ++u) {
      context::UsageContext uc;
      for (std::size_t k = 0, m = g.size(0, 400); k < m; ++k) uc.tokens.push_back("U" + std::to_string(k));
      b.usages.push_back(uc);
    }

    auto in = context::assemble(b, plan, tmpl, mode);
    ASSERT_LE(in.length(), plan.total) << preset;
    std::vector<std::string> names;
    for (const auto& s : in.slots) names.push_back(s.name);
    if (tmpl == Template::DecoderOnly) {
      ASSERT_EQ(in.tokens.back(), b.left.back());
      ASSERT_EQ(names.back(), "left");
      for (std::size_t k = 0; k + 1 < names.size(); ++k) {
        if (names[k].starts_with("usage_") && names[k + 1].starts_with("usage_")) {
          ASSERT_GT(std::stoi(names[k].substr(6)), std::stoi(names[k + 1].substr(6)));
        }
      }
    } else {
      auto p = std::find(in.tokens.begin(), in.tokens.end(), context::kPredict);
      ASSERT_NE(p, in.tokens.end());
      ASSERT_EQ(*(p - 1), b.left.back());
      if (mode == Mode::Infilling && !b.right.empty()) ASSERT_EQ(*(p + 1), b.right.front());
      ASSERT_EQ(names[0], "left");
      ASSERT_EQ(names[1], "right");
      for (std::size_t k = 2; k + 1 < names.size(); ++k) {
        if (names[k].starts_with("usage_")) ASSERT_LT(std::stoi(names[k].substr(6)), std::stoi(names[k + 1].substr(6)));
      }
    }
    ASSERT_EQ(std::count(names.begin(), names.end(), "implementation"),
              b.implementation && !b.implementation->empty() ? 1 : 0);
  }
}

TEST(Properties, SplitsPassTheirLevelAndLowerOnes) {
  Gen g(4);
  for (int i = 0; i < 1000; ++i) {
    auto graph = g.graph(200);
    split::SampleOptions o;
    o.level = static_cast<int>(g.size(1, 4));
    o.seed = g.size(0, 1u << 30);
    o.attempts = 2;
    o.ratio = split::Ratio{static_cast<double>(g.size(1, 10)), 1, 1};
    auto m = split::sample_split(graph, o);
    ASSERT_TRUE(split::check_isolation(m, graph).empty()) << i;
    for (int level = 1; level <= 4; ++level) {
      bool expected = isolated(m.train, m.test, level, graph);
      ASSERT_EQ(split::check_isolation(m.train, m.test, level, graph).empty(), expected) << i << " L" << level;
      if (level <= o.level) ASSERT_TRUE(expected) << i << " L" << level;
    }
    std::size_t placed = 0;
    for (const auto* part : {&m.train, &m.valid, &m.test}) {
      placed += part->size();
      for (const auto& p : *part) ASSERT_FALSE(graph.stdlib().count(p));
    }
    split::ProjectSet all;
    for (const auto* part : {&m.train, &m.valid, &m.test}) all.insert(part->begin(), part->end());
    ASSERT_EQ(all.size(), placed);
  }
}

TEST(Properties, EditSimilarityMatchesOracleAndIsSymmetric) {
  Gen g(5);
  for (int i = 0; i < 1000; ++i) {
    auto a = g.text(30);
    auto b = g.coin(0.3) ? a + g.text(3) : g.text(30);
    ASSERT_EQ(eval::levenshtein(a, b), testsupport::dp_levenshtein(a, b));
    ASSERT_EQ(eval::edit_similarity(a, b), testsupport::dp_edit_similarity(a, b));
    ASSERT_EQ(eval::edit_similarity(a, b), eval::edit_similarity(b, a));
    double s = eval::edit_similarity(a, b);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 100.0);
  }
}

TEST(Properties, AggregatesIgnoreOrder) {
  Gen g(6);
  for (int round = 0; round < 50; ++round) {
    std::vector<eval::EvalItem> items;
    std::vector<eval::Prediction> preds;
    for (std::size_t i = 0, n = g.size(1, 60); i < n; ++i) {
      eval::EvalItem it;
      it.id = std::to_string(i);
      it.truth = g.coin() ? "x, y" : g.ident();
      it.origin = g.pick<std::string>({"stdlib", "third-party", "in-project"});
      if (g.coin()) it.signature = analysis::parse_parameters("x, y=1");
      items.push_back(it);
      preds.push_back({it.id, g.coin() ? it.truth : g.ident(), "t", {}});
    }
    auto before = eval::evaluate(items, preds);
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), g.engine());
    std::vector<eval::EvalItem> items2;
    std::vector<eval::Prediction> preds2;
    for (auto k : order) {
      items2.push_back(items[k]);
      preds2.push_back(preds[k]);
    }
    auto after = eval::evaluate(items2, preds2);
    EXPECT_NEAR(before.overall.em, after.overall.em, 1e-9);
    EXPECT_NEAR(before.overall.edit_sim, after.overall.edit_sim, 1e-9);
    EXPECT_NEAR(before.overall.spm, after.overall.spm, 1e-9);
    for (const auto& [origin, agg] : before.by_origin) EXPECT_NEAR(agg.em, after.by_origin.at(origin).em, 1e-9);
  }
}
