#include "callctx/eval/predictors.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <deque>
#include <thread>

#include "callctx/eval/metrics.hpp"
#include "callctx/util/subprocess.hpp"

namespace callctx::eval {

EvalItem EvalItem::from_assembled(const Json& r) {
  EvalItem item;
  item.id = r.at("id").get<std::string>();
  item.project = r.value("project", std::string());
  item.split = r.value("split", std::string());
  item.origin = r.value("origin", std::string());
  item.template_name = r.value("template", std::string());
  item.text = r.contains("input") ? r.at("input").value("text", std::string()) : std::string();
  item.truth = r.at("ground_truth").get<std::string>();
  if (r.contains("bundle")) {
    for (const auto& u : r.at("bundle").value("usages", Json::array())) item.usages.push_back(context::usage_from_json(u));
  }
  if (r.contains("signature") && !r.at("signature").is_null()) {
    item.signature = analysis::Signature::from_json(r.at("signature"));
  }
  return item;
}

Json Prediction::to_json() const {
  Json j{{"id", instance_id}, {"prediction", text}, {"source", source}};
  if (!flags.empty()) j["flags"] = flags;
  return j;
}

namespace {

Prediction make(const EvalItem& item, std::string text, const std::string& source) {
  return Prediction{item.id, std::move(text), source, {}};
}

}  // namespace

std::vector<Prediction> EmptyPredictor::predict(const std::vector<EvalItem>& items) {
  std::vector<Prediction> out;
  for (const auto& it : items) out.push_back(make(it, "", name()));
  return out;
}

std::vector<Prediction> OraclePredictor::predict(const std::vector<EvalItem>& items) {
  std::vector<Prediction> out;
  for (const auto& it : items) out.push_back(make(it, it.truth, name()));
  return out;
}

std::vector<Prediction> CopyTopPredictor::predict(const std::vector<EvalItem>& items) {
  std::vector<Prediction> out;
  for (const auto& it : items) {
    if (it.usages.empty()) {
      auto p = make(it, "", name());
      p.flags.push_back("no-usage");
      out.push_back(std::move(p));
    } else {
      out.push_back(make(it, it.usages.front().args_text, name()));
    }
  }
  return out;
}

FilePredictor::FilePredictor(const std::filesystem::path& path) : path_(path) {
  for (const auto& j : read_jsonl(path)) {
    by_id_[j.at("id").get<std::string>()] = j.at("prediction").get<std::string>();
  }
}

std::vector<Prediction> FilePredictor::predict(const std::vector<EvalItem>& items) {
  std::vector<Prediction> out;
  for (const auto& it : items) {
    auto f = by_id_.find(it.id);
    auto p = make(it, f == by_id_.end() ? "" : f->second, name());
    if (f == by_id_.end()) p.flags.push_back("missing");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
  return g;
}

ThresholdCopyPredictor::ThresholdCopyPredictor(std::optional<double> theta, std::unique_ptr<Predictor> fallback)
    : theta_(theta), fixed_(theta.has_value()), fallback_(std::move(fallback)) {
  if (!fallback_) fallback_ = std::make_unique<EmptyPredictor>();
  if (theta_ && (*theta_ < 0 || *theta_ > 1)) throw PredictorError("threshold must lie in [0, 1]");
}

double ThresholdCopyPredictor::em_at(const std::vector<EvalItem>& items, const std::vector<Prediction>& fallback,
                                     double theta) {
  if (items.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    bool copy = !it.usages.empty() && it.top_similarity() >= theta;
    const std::string& pred = copy ? it.usages.front().args_text : fallback[i].text;
    if (exact_match(pred, it.truth)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(items.size());
}

void ThresholdCopyPredictor::tune(const std::vector<EvalItem>& valid) {
  fallback_->tune(valid);
  if (fixed_) return;
  sweep_.clear();
  auto fallback = fallback_->predict(valid);
  std::optional<ThresholdPoint> best;
  for (double theta : threshold_grid()) {
    ThresholdPoint p{theta, em_at(valid, fallback, theta)};
    sweep_.push_back(p);
    if (!best || p.em > best->em) best = p;
  }
  theta_ = best->theta;
}

std::vector<Prediction> ThresholdCopyPredictor::predict(const std::vector<EvalItem>& items) {
  if (!theta_) throw PredictorError("copy-threshold needs a validation split or an explicit threshold");
  auto fallback = fallback_->predict(items);
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (!it.usages.empty() && it.top_similarity() >= *theta_) {
      out.push_back(make(it, it.usages.front().args_text, name()));
    } else {
      auto p = fallback[i];
      if (it.usages.empty()) p.flags.push_back("no-usage");
      out.push_back(std::move(p));
    }
  }
  return out;
}

Json ThresholdCopyPredictor::describe() const {
  Json sweep = Json::array();
  for (const auto& p : sweep_) sweep.push_back(Json{{"theta", p.theta}, {"em", p.em}});
  return Json{{"name", name()},
              {"theta", theta_ ? Json(*theta_) : Json(nullptr)},
              {"tuned", !fixed_},
              {"sweep", sweep},
              {"fallback", fallback_->describe()}};
}

Json ExternalPredictor::describe() const {
  std::string cmd;
  for (const auto& a : config_.command) cmd += (cmd.empty() ? "" : " ") + a;
  return Json{{"name", name()},
              {"command", cmd},
              {"max_in_flight", config_.max_in_flight},
              {"timeout_ms", config_.timeout.count()}};
}

std::vector<Prediction> ExternalPredictor::predict(const std::vector<EvalItem>& items) {
  using Clock = std::chrono::steady_clock;
  errors_.clear();
  std::vector<Prediction> out;
  for (const auto& it : items) out.push_back(make(it, "", name()));
  if (items.empty()) return out;
  if (config_.command.empty()) throw PredictorError("external predictor needs a command");

  ChildProcess child(config_.command);
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool eof = false;

  std::thread reader([&, fd = child.stdout_fd()] {
    std::string buffer;
    char chunk[4096];
    for (;;) {
      ssize_t n = ::read(fd, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        std::lock_guard lock(mutex);
        inbox.push_back(buffer.substr(0, nl));
        buffer.erase(0, nl + 1);
        cv.notify_all();
      }
    }
    std::lock_guard lock(mutex);
    eof = true;
    cv.notify_all();
  });

  std::map<std::size_t, Clock::time_point> in_flight;
  std::vector<bool> settled(items.size(), false);
  std::size_t next = 0;
  std::size_t done = 0;
  bool broken = false;

  auto settle = [&](std::size_t i, const char* flag) {
    if (settled[i]) return;
    settled[i] = true;
    if (flag) out[i].flags.push_back(flag);
    ++done;
  };

  while (done < items.size()) {
    while (!broken && next < items.size() && in_flight.size() < std::max<std::size_t>(1, config_.max_in_flight)) {
      Json req{{"id", next}, {"template", items[next].template_name}, {"text", items[next].text}};
      if (!child.write_all(req.dump() + "\n")) {
        broken = true;
        break;
      }
      in_flight[next] = Clock::now();
      ++next;
    }

    std::deque<std::string> lines;
    bool closed = false;
    {
      std::unique_lock lock(mutex);
      auto deadline = Clock::now() + config_.timeout;
      for (const auto& [id, sent] : in_flight) deadline = std::min(deadline, sent + config_.timeout);
      cv.wait_until(lock, deadline, [&] { return !inbox.empty() || eof; });
      lines.swap(inbox);
      closed = eof;
    }
    for (const auto& line : lines) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Json resp = Json::parse(line, nullptr, false);
      if (resp.is_discarded() || !resp.is_object() || !resp.contains("id")) {
        errors_.push_back("malformed adapter response: " + line.substr(0, 200));
        continue;
      }
      std::size_t id = resp.at("id").is_number_unsigned() ? resp.at("id").get<std::size_t>() : items.size();
      auto f = in_flight.find(id);
      if (f == in_flight.end()) {
        errors_.push_back("response for unknown or expired id: " + resp.at("id").dump());
        continue;
      }
      in_flight.erase(f);
      const auto& pred = resp.value("prediction", Json(nullptr));
      out[id].text = pred.is_string() ? pred.get<std::string>() : std::string();
      settle(id, pred.is_string() ? nullptr : "malformed");
    }
    auto now = Clock::now();
    for (auto it = in_flight.begin(); it != in_flight.end();) {
      if (now - it->second >= config_.timeout) {
        settle(it->first, "timeout");
        it = in_flight.erase(it);
      } else {
        ++it;
      }
    }
    if (closed || broken) {
      if (!in_flight.empty() || next < items.size()) {
        errors_.push_back("adapter exited with " + std::to_string(in_flight.size() + items.size() - next) +
                          " requests unanswered");
      }
      for (const auto& [id, sent] : in_flight) settle(id, "adapter-crash");
      in_flight.clear();
      for (; next < items.size(); ++next) settle(next, "adapter-crash");
    }
  }
  child.close_stdin();
  child.terminate(std::chrono::milliseconds(200));
  reader.join();
  return out;
}

namespace {

std::optional<double> parse_theta(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::unique_ptr<Predictor> make_predictor(const std::string& spec, const std::string& fallback,
                                          std::chrono::milliseconds adapter_timeout, std::size_t max_in_flight) {
  if (spec == "empty") return std::make_unique<EmptyPredictor>();
  if (spec == "oracle") return std::make_unique<OraclePredictor>();
  if (spec == "copy-top") return std::make_unique<CopyTopPredictor>();
  if (spec == "copy-threshold" || spec.starts_with("copy-threshold:")) {
    std::optional<double> theta;
    if (spec != "copy-threshold") {
      theta = parse_theta(spec.substr(15));
      if (!theta) throw PredictorError("bad threshold in predictor spec: " + spec);
    }
    if (fallback.starts_with("copy-threshold")) throw PredictorError("copy-threshold cannot fall back to itself");
    return std::make_unique<ThresholdCopyPredictor>(theta, make_predictor(fallback, "empty", adapter_timeout,
                                                                          max_in_flight));
  }
  if (spec.starts_with("file:")) return std::make_unique<FilePredictor>(spec.substr(5));
  if (spec.starts_with("external:")) {
    std::string rest = spec.substr(9);
    if (rest.starts_with("cmd=")) rest = rest.substr(4);
    if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') rest = rest.substr(1, rest.size() - 2);
    AdapterConfig cfg;
    cfg.command = split_command_line(rest);
    cfg.timeout = adapter_timeout;
    cfg.max_in_flight = max_in_flight;
    if (cfg.command.empty()) throw PredictorError("external predictor needs cmd=<command>");
    return std::make_unique<ExternalPredictor>(std::move(cfg));
  }
  throw PredictorError("unknown predictor: " + spec);
}

}  // namespace callctx::eval
