#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "callctx/analysis/signature.hpp"
#include "callctx/context/usage.hpp"
#include "callctx/util/json.hpp"

namespace callctx::eval {

// One assembled instance as the evaluator sees it.
struct EvalItem {
  std::string id;
  std::string project;
  std::string split;
  std::string origin;
  std::string template_name;
  std::string text;   // assembled model input
  std::string truth;  // ground-truth argument text
  std::vector<context::UsageContext> usages;  // ranked
  std::optional<analysis::Signature> signature;

  double top_similarity() const { return usages.empty() ? 0.0 : usages.front().similarity; }
  static EvalItem from_assembled(const Json& record);
};

struct Prediction {
  std::string instance_id;
  std::string text;
  std::string source;
  std::vector<std::string> flags;  // "no-usage", "timeout", "adapter-crash", "missing"

  Json to_json() const;
};

class PredictorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  // One prediction per item, in item order.
  virtual std::vector<Prediction> predict(const std::vector<EvalItem>& items) = 0;
  // Called with the validation items before predict(); most predictors ignore it.
  virtual void tune(const std::vector<EvalItem>& /*valid*/) {}
  virtual Json describe() const { return Json{{"name", name()}}; }
};

class EmptyPredictor : public Predictor {
 public:
  std::string name() const override { return "empty"; }
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;
};

// Returns the ground truth; an upper bound for sanity checks.
class OraclePredictor : public Predictor {
 public:
  std::string name() const override { return "oracle"; }
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;
};

class CopyTopPredictor : public Predictor {
 public:
  std::string name() const override { return "copy-top"; }
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;
};

// Predictions read from a JSONL file of {"id", "prediction"} records.
class FilePredictor : public Predictor {
 public:
  explicit FilePredictor(const std::filesystem::path& path);
  std::string name() const override { return "file"; }
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;

 private:
  std::filesystem::path path_;
  std::map<std::string, std::string, std::less<>> by_id_;
};

struct ThresholdPoint {
  double theta = 0;
  double em = 0;  // percent
};

// Threshold grid {0, 0.05, ..., 1}.
std::vector<double> threshold_grid();

// Copies the top usage when its similarity is at least theta, otherwise
// defers to the fallback. Without a fixed theta, tune() picks the grid value
// with the highest validation EM (smallest on ties).
class ThresholdCopyPredictor : public Predictor {
 public:
  ThresholdCopyPredictor(std::optional<double> theta, std::unique_ptr<Predictor> fallback);
  std::string name() const override { return "copy-threshold"; }
  void tune(const std::vector<EvalItem>& valid) override;
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;
  Json describe() const override;

  std::optional<double> theta() const { return theta_; }
  const std::vector<ThresholdPoint>& sweep() const { return sweep_; }

  // EM (percent) of threshold copying at `theta` given the fallback's outputs.
  static double em_at(const std::vector<EvalItem>& items, const std::vector<Prediction>& fallback, double theta);

 private:
  std::optional<double> theta_;
  bool fixed_;
  std::unique_ptr<Predictor> fallback_;
  std::vector<ThresholdPoint> sweep_;
};

struct AdapterConfig {
  std::vector<std::string> command;
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds timeout{30000};
};

// Talks to a child process: one JSON request per line on its stdin, one
// response per line on its stdout, matched by id in any order.
class ExternalPredictor : public Predictor {
 public:
  explicit ExternalPredictor(AdapterConfig config) : config_(std::move(config)) {}
  std::string name() const override { return "external"; }
  std::vector<Prediction> predict(const std::vector<EvalItem>& items) override;
  Json describe() const override;

  // Set after predict(): adapter crash or protocol problems.
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  AdapterConfig config_;
  std::vector<std::string> errors_;
};

// "empty", "oracle", "copy-top", "copy-threshold[:theta]", "file:<path>",
// "external:cmd=<command line>". `fallback` applies to copy-threshold.
std::unique_ptr<Predictor> make_predictor(const std::string& spec, const std::string& fallback = "empty",
                                          std::chrono::milliseconds adapter_timeout = std::chrono::milliseconds(30000),
                                          std::size_t max_in_flight = 8);

}  // namespace callctx::eval
