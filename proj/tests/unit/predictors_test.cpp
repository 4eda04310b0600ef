#include <gtest/gtest.h>

#include "callctx/eval/metrics.hpp"
#include "callctx/eval/predictors.hpp"
#include "callctx/eval/report.hpp"
#include "support.hpp"

using namespace callctx::eval;
using testsupport::TempDir;

namespace {

EvalItem item(const std::string& id, const std::string& truth, std::vector<std::pair<std::string, double>> usages) {
  EvalItem it;
  it.id = id;
  it.truth = truth;
  it.text = "input " + id;
  for (const auto& [args, sim] : usages) {
    callctx::context::UsageContext u;
    u.args_text = args;
    u.similarity = sim;
    it.usages.push_back(u);
  }
  return it;
}

// 4 planted items whose top usage is exact (sim 0.9) and 6 decoys whose top
// usage is wrong (sim 0.3) but which the fallback model gets right.
struct Planted {
  std::vector<EvalItem> items;
  TempDir dir;
  std::filesystem::path fallback;
  Planted() {
    std::vector<callctx::Json> model;
    for (int i = 0; i < 4; ++i) items.push_back(item("p" + std::to_string(i), "a, b", {{"a, b", 0.9}}));
    for (int i = 0; i < 6; ++i) {
      std::string id = "d" + std::to_string(i);
      items.push_back(item(id, "x" + std::to_string(i), {{"wrong", 0.3}}));
      model.push_back({{"id", id}, {"prediction", "x" + std::to_string(i)}});
    }
    fallback = dir / "model.jsonl";
    callctx::write_jsonl(fallback, model);
  }
};

double em(const std::vector<EvalItem>& items, const std::vector<Prediction>& preds) {
  return evaluate(items, preds).overall.em;
}

std::vector<EvalItem> fixture_items() {
  std::vector<EvalItem> out;
  for (const auto& r : callctx::read_jsonl(testsupport::fixture_run() / "assembled.jsonl")) {
    out.push_back(EvalItem::from_assembled(r));
  }
  return out;
}

std::unique_ptr<Predictor> adapter(const std::string& args, int timeout_ms = 5000, std::size_t in_flight = 8) {
  return make_predictor("external:cmd=" + testsupport::adapter_stub() + " " + args, "empty",
                        std::chrono::milliseconds(timeout_ms), in_flight);
}

std::string assembled_arg() { return "--assembled " + (testsupport::fixture_run() / "assembled.jsonl").string(); }

}  // namespace

TEST(ThresholdCopy, CopiesAboveThreshold) {
  ThresholdCopyPredictor p(0.8, nullptr);
  auto preds = p.predict({item("a", "x", {{"x", 1.0}}), item("b", "y", {{"z", 0.3}}), item("c", "w", {})});
  EXPECT_EQ(preds[0].text, "x");
  EXPECT_EQ(preds[1].text, "");
  EXPECT_EQ(preds[2].flags, (std::vector<std::string>{"no-usage"}));
  EXPECT_THROW(ThresholdCopyPredictor(1.5, nullptr), PredictorError);
  ThresholdCopyPredictor untuned(std::nullopt, nullptr);
  EXPECT_THROW(untuned.predict({}), PredictorError);
}

TEST(ThresholdCopy, SweepBeatsBothExtremes) {
  Planted s;
  ThresholdCopyPredictor p(std::nullopt, std::make_unique<FilePredictor>(s.fallback));
  p.tune(s.items);
  ASSERT_EQ(p.sweep().size(), 21u);
  ASSERT_TRUE(p.theta());
  // EM is 100 for every theta in (0.3, 0.9]; the smallest grid point wins.
  EXPECT_DOUBLE_EQ(*p.theta(), 0.35);
  double best = em(s.items, p.predict(s.items));
  ThresholdCopyPredictor always(0.0, std::make_unique<FilePredictor>(s.fallback));
  ThresholdCopyPredictor never(1.0, std::make_unique<FilePredictor>(s.fallback));
  double at0 = em(s.items, always.predict(s.items));
  double at1 = em(s.items, never.predict(s.items));
  EXPECT_DOUBLE_EQ(best, 100.0);
  EXPECT_DOUBLE_EQ(at0, 40.0);
  EXPECT_DOUBLE_EQ(at1, 60.0);
  EXPECT_GT(best, at0);
  EXPECT_GT(best, at1);
  for (const auto& pt : p.sweep()) EXPECT_LE(pt.em, best);
}

TEST(ThresholdCopy, SweepMatchesExhaustiveOracle) {
  testsupport::Gen gen(5);
  for (int round = 0; round < 50; ++round) {
    std::vector<EvalItem> items;
    for (std::size_t i = 0; i < gen.size(1, 30); ++i) {
      std::string truth = gen.pick<std::string>({"a", "b", "c"});
      if (gen.coin(0.2)) {
        items.push_back(item(std::to_string(i), truth, {}));
      } else {
        items.push_back(item(std::to_string(i), truth, {{gen.pick<std::string>({"a", "b", "c"}), gen.size(0, 20) / 20.0}}));
      }
    }
    ThresholdCopyPredictor p(std::nullopt, nullptr);
    p.tune(items);
    double best_em = -1, best_theta = -1;
    for (int g = 0; g <= 20; ++g) {
      double theta = g / 20.0;
      int hits = 0;
      for (const auto& it : items) {
        std::string pred = !it.usages.empty() && it.usages[0].similarity >= theta ? it.usages[0].args_text : "";
        hits += pred == it.truth;
      }
      double e = 100.0 * hits / static_cast<double>(items.size());
      if (e > best_em) best_em = e, best_theta = theta;
    }
    EXPECT_DOUBLE_EQ(*p.theta(), best_theta);
  }
}

TEST(CopyTop, ExactTopUsageGivesFullEm) {
  std::vector<EvalItem> items{item("a", "x, y", {{"x,y", 0.2}, {"q", 0.1}}), item("b", "z=1", {{"z=1", 0.0}})};
  CopyTopPredictor p;
  EXPECT_DOUBLE_EQ(em(items, p.predict(items)), 100.0);
  ThresholdCopyPredictor t(0.0, nullptr);
  EXPECT_DOUBLE_EQ(em(items, t.predict(items)), 100.0);
}

TEST(Adapter, LookupScoresPerfectly) {
  auto items = fixture_items();
  auto p = adapter("--mode lookup " + assembled_arg());
  auto preds = p->predict(items);
  ASSERT_EQ(preds.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(preds[i].instance_id, items[i].id);
  EXPECT_DOUBLE_EQ(em(items, preds), 100.0);
}

TEST(Adapter, EmptyScoresZero) {
  auto items = fixture_items();
  auto preds = adapter("--mode empty")->predict(items);
  auto r = evaluate(items, preds);
  EXPECT_DOUBLE_EQ(r.overall.em, 0.0);
  EXPECT_DOUBLE_EQ(r.overall.edit_sim, 0.0);
}

TEST(Adapter, OutOfOrderRepliesAreMatchedById) {
  auto items = fixture_items();
  // the stub only answers full batches
  items.resize(items.size() - items.size() % 15);
  auto preds = adapter("--mode lookup --batch 5 " + assembled_arg(), 5000, 5)->predict(items);
  EXPECT_DOUBLE_EQ(em(items, preds), 100.0);
  auto echo = adapter("--mode echo --batch 3", 5000, 3)->predict(items);
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(echo[i].text, items[i].text);
}

TEST(Adapter, HangingRequestTimesOut) {
  std::vector<EvalItem> items{item("a", "1", {}), item("b", "2", {}), item("c", "3", {})};
  auto preds = adapter("--mode echo --hang-id 1", 300)->predict(items);
  EXPECT_EQ(preds[0].text, "input a");
  EXPECT_TRUE(preds[0].flags.empty());
  EXPECT_EQ(preds[1].text, "");
  EXPECT_EQ(preds[1].flags, (std::vector<std::string>{"timeout"}));
  EXPECT_EQ(preds[2].text, "input c");
}

TEST(Adapter, CrashKeepsPartialResults) {
  std::vector<EvalItem> items;
  for (int i = 0; i < 6; ++i) items.push_back(item(std::to_string(i), "t", {}));
  auto p = make_predictor("external:cmd=" + testsupport::adapter_stub() + " --mode echo --exit-after 3", "empty",
                          std::chrono::milliseconds(5000), 1);
  auto preds = p->predict(items);
  ASSERT_EQ(preds.size(), 6u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(preds[i].text, "input " + std::to_string(i));
  for (int i = 3; i < 6; ++i) EXPECT_EQ(preds[i].flags, (std::vector<std::string>{"adapter-crash"})) << i;
  EXPECT_FALSE(dynamic_cast<ExternalPredictor&>(*p).errors().empty());
}

TEST(Adapter, CopyTopThroughProtocolMatchesInProcess) {
  auto items = fixture_items();
  auto remote = adapter("--mode copy-top " + assembled_arg())->predict(items);
  auto local = CopyTopPredictor().predict(items);
  ASSERT_EQ(remote.size(), local.size());
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(remote[i].text, local[i].text) << items[i].id;
}

TEST(Predictors, SpecParsing) {
  EXPECT_EQ(make_predictor("copy-threshold:0.25")->name(), "copy-threshold");
  EXPECT_THROW(make_predictor("copy-threshold:abc"), PredictorError);
  EXPECT_THROW(make_predictor("copy-threshold", "copy-threshold"), PredictorError);
  EXPECT_THROW(make_predictor("telepathy"), PredictorError);
  EXPECT_THROW(make_predictor("external:cmd="), PredictorError);
  auto items = std::vector<EvalItem>{item("a", "x", {})};
  EXPECT_EQ(make_predictor("oracle")->predict(items)[0].text, "x");
}

TEST(Coverage, MatchesBruteForceOnFixture) {
  auto items = fixture_items();
  auto curve = coverage_curve(items, 10);
  ASSERT_EQ(curve.size(), 11u);
  EXPECT_DOUBLE_EQ(curve[0], 0.0);
  for (std::size_t k = 1; k <= 10; ++k) {
    std::size_t hit = 0;
    for (const auto& it : items) {
      bool any = false;
      for (std::size_t r = 0; r < std::min(k, it.usages.size()); ++r) any |= exact_match(it.usages[r].args_text, it.truth);
      hit += any;
    }
    EXPECT_DOUBLE_EQ(curve[k], 100.0 * hit / items.size()) << k;
    EXPECT_GE(curve[k], curve[k - 1]);
  }
  EXPECT_GT(curve[10], 0.0);
}

TEST(Coverage, ThreeOfTenWithDiminishingIncrements) {
  std::vector<EvalItem> items;
  items.push_back(item("0", "a", {{"a", 0.9}}));
  items.push_back(item("1", "a", {{"a", 0.8}, {"b", 0.1}}));
  items.push_back(item("2", "a", {{"b", 0.9}, {"a", 0.5}}));
  for (int i = 3; i < 10; ++i) items.push_back(item(std::to_string(i), "a", {{"b", 0.5}, {"c", 0.4}, {"d", 0.1}}));
  auto curve = coverage_curve(items, 5);
  EXPECT_EQ(curve, (std::vector<double>{0, 20, 30, 30, 30, 30}));
  for (std::size_t k = 2; k < curve.size(); ++k) EXPECT_LE(curve[k] - curve[k - 1], curve[k - 1] - curve[k - 2]);
}
