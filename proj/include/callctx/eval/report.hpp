#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "callctx/eval/predictors.hpp"
#include "callctx/util/json.hpp"

namespace callctx::eval {

struct InstanceScore {
  std::string id;
  std::string origin;
  std::string split;
  std::string prediction;
  std::string truth;
  int em = 0;
  double edit_sim = 0;
  std::optional<int> spm;  // absent when the callee's signature is unknown
  bool spm_parse_failure = false;
  std::vector<std::string> flags;
};

struct Aggregate {
  std::size_t count = 0;
  double em = 0;        // percent
  double edit_sim = 0;  // mean, 0-100
  double spm = 0;       // percent over instances with a known signature
  std::size_t spm_count = 0;

  Json to_json() const;
};

Aggregate aggregate(const std::vector<InstanceScore>& scores);

struct EvalReport {
  std::vector<InstanceScore> instances;
  Aggregate overall;
  std::map<std::string, Aggregate> by_origin;
  std::vector<double> coverage;  // index k -> percent; empty when not requested
  Json predictor;

  Json to_json() const;
};

InstanceScore score(const EvalItem& item, const Prediction& prediction, bool spm_require_all = true);

EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<Prediction>& predictions,
                    bool spm_require_all = true);

// Percent of items where one of the top-k usages carries the ground-truth
// arguments, for k = 0..k_max.
std::vector<double> coverage_curve(const std::vector<EvalItem>& items, std::size_t k_max);

Json coverage_to_json(const std::vector<double>& curve);

}  // namespace callctx::eval
