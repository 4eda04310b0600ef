// Line-JSON prediction adapter used by the tests.
// Reads {"id","template","text"} per line and answers {"id","prediction"}.

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "callctx/util/json.hpp"

using callctx::Json;

int main(int argc, char** argv) {
  std::string mode = "empty";
  std::string assembled;
  std::size_t batch = 1;
  std::set<std::size_t> hang_ids;
  std::size_t exit_after = 0;

  CLI::App app{"Test adapter for the external predictor"};
  app.add_option("--mode", mode, "empty | echo | lookup | copy-top")
      ->check(CLI::IsMember({"empty", "echo", "lookup", "copy-top"}));
  app.add_option("--assembled", assembled, "assembled.jsonl used by lookup and copy-top")->check(CLI::ExistingFile);
  app.add_option("--batch", batch, "Collect this many requests and answer them in reverse order");
  app.add_option("--hang-id", hang_ids, "Never answer these request ids");
  app.add_option("--exit-after", exit_after, "Exit after reading this many requests");
  CLI11_PARSE(app, argc, argv);

  // lookup: the ground truth of the record whose input text matches.
  // copy-top: that record's best usage arguments.
  std::map<std::string, std::string> answers;
  if (mode == "lookup" || mode == "copy-top") {
    for (const auto& r : callctx::read_jsonl(assembled)) {
      std::string answer;
      if (mode == "lookup") {
        answer = r.at("ground_truth").get<std::string>();
      } else if (r.contains("bundle") && !r["bundle"].value("usages", Json::array()).empty()) {
        answer = r["bundle"]["usages"][0].at("args_text").get<std::string>();
      }
      answers[r.at("input").at("text").get<std::string>()] = answer;
    }
  }

  std::vector<Json> pending;
  auto flush = [&] {
    std::reverse(pending.begin(), pending.end());
    for (const auto& p : pending) std::cout << p.dump() << "\n";
    std::cout.flush();
    pending.clear();
  };

  std::size_t seen = 0;
  for (std::string line; std::getline(std::cin, line);) {
    if (line.empty()) continue;
    Json req = Json::parse(line, nullptr, false);
    if (req.is_discarded()) continue;
    if (exit_after && seen++ >= exit_after) return 1;
    auto id = req.at("id").get<std::size_t>();
    if (hang_ids.count(id)) continue;
    std::string text = req.value("text", std::string());
    std::string prediction;
    if (mode == "echo") prediction = text;
    if (mode == "lookup" || mode == "copy-top") prediction = answers.count(text) ? answers[text] : std::string();
    pending.push_back(Json{{"id", id}, {"prediction", prediction}});
    if (pending.size() >= std::max<std::size_t>(1, batch)) flush();
  }
  flush();
  return 0;
}
