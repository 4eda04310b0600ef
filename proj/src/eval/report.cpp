#include "callctx/eval/report.hpp"

#include "callctx/eval/metrics.hpp"

namespace callctx::eval {

Json Aggregate::to_json() const {
  return Json{{"count", count}, {"em", em}, {"edit_sim", edit_sim}, {"spm", spm}, {"spm_count", spm_count}};
}

Aggregate aggregate(const std::vector<InstanceScore>& scores) {
  Aggregate a;
  a.count = scores.size();
  if (scores.empty()) return a;
  double em = 0, es = 0, spm_sum = 0;
  for (const auto& s : scores) {
    em += s.em;
    es += s.edit_sim;
    if (s.spm) {
      spm_sum += *s.spm;
      ++a.spm_count;
    }
  }
  auto n = static_cast<double>(scores.size());
  a.em = 100.0 * em / n;
  a.edit_sim = es / n;
  a.spm = a.spm_count ? 100.0 * spm_sum / static_cast<double>(a.spm_count) : 0.0;
  return a;
}

InstanceScore score(const EvalItem& item, const Prediction& prediction, bool spm_require_all) {
  InstanceScore s;
  s.id = item.id;
  s.origin = item.origin;
  s.split = item.split;
  s.prediction = prediction.text;
  s.truth = item.truth;
  s.flags = prediction.flags;
  auto p = normalize_args(prediction.text);
  auto t = normalize_args(item.truth);
  s.em = p.tokens == t.tokens ? 1 : 0;
  s.edit_sim = edit_similarity(p.text, t.text);
  if (item.signature) {
    auto r = spm(prediction.text, *item.signature, spm_require_all);
    s.spm = r.match ? 1 : 0;
    s.spm_parse_failure = r.parse_failure;
  }
  return s;
}

EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<Prediction>& predictions,
                    bool spm_require_all) {
  if (items.size() != predictions.size()) throw PredictorError("prediction count does not match instance count");
  EvalReport r;
  std::map<std::string, std::vector<InstanceScore>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (predictions[i].instance_id != items[i].id) throw PredictorError("prediction order does not match instances");
    r.instances.push_back(score(items[i], predictions[i], spm_require_all));
    groups[items[i].origin].push_back(r.instances.back());
  }
  r.overall = aggregate(r.instances);
  for (const auto& [origin, scores] : groups) r.by_origin[origin] = aggregate(scores);
  return r;
}

Json EvalReport::to_json() const {
  Json origins = Json::object();
  for (const auto& [k, v] : by_origin) origins[k] = v.to_json();
  Json rows = Json::array();
  for (const auto& s : instances) {
    Json row{{"id", s.id},
             {"origin", s.origin},
             {"split", s.split},
             {"prediction", s.prediction},
             {"truth", s.truth},
             {"em", s.em},
             {"edit_sim", s.edit_sim},
             {"spm", s.spm ? Json(*s.spm) : Json(nullptr)}};
    if (s.spm_parse_failure) row["spm_parse_failure"] = true;
    if (!s.flags.empty()) row["flags"] = s.flags;
    rows.push_back(std::move(row));
  }
  Json j{{"predictor", predictor}, {"overall", overall.to_json()}, {"by_origin", origins}};
  if (!coverage.empty()) j["coverage"] = coverage_to_json(coverage);
  j["instances"] = rows;
  return j;
}

std::vector<double> coverage_curve(const std::vector<EvalItem>& items, std::size_t k_max) {
  std::vector<std::size_t> first_hit(items.size(), SIZE_MAX);
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto truth = normalize_args(items[i].truth).tokens;
    for (std::size_t r = 0; r < items[i].usages.size(); ++r) {
      if (normalize_args(items[i].usages[r].args_text).tokens == truth) {
        first_hit[i] = r + 1;
        break;
      }
    }
  }
  std::vector<double> curve(k_max + 1, 0.0);
  if (items.empty()) return curve;
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t covered = 0;
    for (auto h : first_hit)
      if (h <= k) ++covered;
    curve[k] = 100.0 * static_cast<double>(covered) / static_cast<double>(items.size());
  }
  return curve;
}

Json coverage_to_json(const std::vector<double>& curve) {
  Json j = Json::array();
  for (std::size_t k = 0; k < curve.size(); ++k) j.push_back(Json{{"k", k}, {"percent", curve[k]}});
  return j;
}

}  // namespace callctx::eval
