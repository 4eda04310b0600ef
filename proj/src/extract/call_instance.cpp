#include "callctx/extract/call_instance.hpp"

#include "callctx/python/lexer.hpp"

namespace callctx::extract {

std::vector<std::string> CallInstance::argument_tokens() const {
  return python::fragment_tokens(ground_truth_args);
}

Json to_json(const Span& span) {
  return Json{{"start", lsp::to_json(span.start)},
              {"end", lsp::to_json(span.end)},
              {"start_byte", span.begin_byte},
              {"end_byte", span.end_byte}};
}

Span span_from_json(const Json& j) {
  Span s;
  s.start = lsp::position_from_json(j.at("start"));
  s.end = lsp::position_from_json(j.at("end"));
  s.begin_byte = j.at("start_byte").get<std::uint32_t>();
  s.end_byte = j.at("end_byte").get<std::uint32_t>();
  return s;
}

Json to_json(const CallInstance& inst) {
  Json j;
  j["id"] = inst.id;
  j["project"] = inst.project;
  j["file"] = inst.file;
  j["callee_name"] = inst.callee_name;
  j["callee_expr"] = inst.callee_expr;
  j["callee_span"] = to_json(inst.callee);
  j["call_span"] = to_json(inst.call);
  j["arg_span"] = to_json(inst.args);
  j["enclosing_fn_span"] = inst.enclosing_fn ? to_json(*inst.enclosing_fn) : Json(nullptr);
  j["enclosing_fn_name"] = inst.enclosing_fn_name;
  j["ground_truth_args"] = inst.ground_truth_args;
  j["left_context"] = inst.left_context;
  j["right_context"] = inst.right_context;
  j["raised"] = inst.raised;
  j["decorator"] = inst.decorator;
  return j;
}

CallInstance instance_from_json(const Json& j) {
  CallInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.project = j.at("project").get<std::string>();
  inst.file = j.at("file").get<std::string>();
  inst.callee_name = j.at("callee_name").get<std::string>();
  inst.callee_expr = j.value("callee_expr", inst.callee_name);
  inst.callee = span_from_json(j.at("callee_span"));
  inst.call = span_from_json(j.at("call_span"));
  inst.args = span_from_json(j.at("arg_span"));
  if (j.contains("enclosing_fn_span") && !j.at("enclosing_fn_span").is_null()) {
    inst.enclosing_fn = span_from_json(j.at("enclosing_fn_span"));
  }
  inst.enclosing_fn_name = j.value("enclosing_fn_name", std::string());
  inst.ground_truth_args = j.at("ground_truth_args").get<std::string>();
  inst.left_context = j.at("left_context").get<std::vector<std::string>>();
  inst.right_context = j.at("right_context").get<std::vector<std::string>>();
  inst.raised = j.value("raised", false);
  inst.decorator = j.value("decorator", false);
  return inst;
}

}  // namespace callctx::extract
