#include "callctx/context/usage.hpp"

namespace callctx::context {

TokenSet token_set(const std::vector<std::string>& tokens) { return TokenSet(tokens.begin(), tokens.end()); }

Json to_json(const UsageContext& u, bool with_left_tokens) {
  Json j{{"instance_id", u.instance_id},
         {"file", u.file},
         {"source", extract::to_json(u.source)},
         {"similarity", u.similarity},
         {"args_text", u.args_text},
         {"same_file", u.same_file},
         {"distance", u.distance},
         {"tokens", u.tokens}};
  if (with_left_tokens) j["left_tokens"] = u.left_tokens;
  return j;
}

UsageContext usage_from_json(const Json& j) {
  UsageContext u;
  u.instance_id = j.at("instance_id").get<std::string>();
  u.file = j.at("file").get<std::string>();
  u.source = extract::span_from_json(j.at("source"));
  u.similarity = j.at("similarity").get<double>();
  u.args_text = j.at("args_text").get<std::string>();
  u.same_file = j.value("same_file", false);
  u.distance = j.value("distance", 0u);
  u.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (j.contains("left_tokens")) u.left_tokens = j.at("left_tokens").get<std::vector<std::string>>();
  return u;
}

}  // namespace callctx::context
