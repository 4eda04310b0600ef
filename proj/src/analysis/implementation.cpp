#include "callctx/analysis/implementation.hpp"

#include <algorithm>

namespace callctx::analysis {

using python::Scope;
using python::SourceFile;
using python::TokenKind;

Json ImplementationContext::to_json() const {
  return Json{{"kind", kind},
              {"text", text},
              {"tokens", tokens},
              {"signature", signature ? signature->to_json() : Json(nullptr)},
              {"stub", stub},
              {"bound_receiver", bound_receiver}};
}

ImplementationContext ImplementationContext::from_json(const Json& j) {
  ImplementationContext c;
  c.kind = j.value("kind", std::string("function"));
  c.text = j.value("text", std::string());
  c.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (j.contains("signature") && !j.at("signature").is_null()) c.signature = Signature::from_json(j.at("signature"));
  c.stub = j.value("stub", false);
  c.bound_receiver = j.value("bound_receiver", false);
  return c;
}

namespace {

bool has_decorator(const Scope& s, std::string_view name) {
  return std::any_of(s.decorators.begin(), s.decorators.end(), [&](const std::string& d) {
    return d == name || (d.size() > name.size() && d.ends_with(name) && d[d.size() - name.size() - 1] == '.');
  });
}

std::string slice(const SourceFile& f, std::uint32_t begin, std::uint32_t end) {
  return std::string(f.text().substr(begin, end - begin));
}

std::uint32_t header_end(const SourceFile& f, const Scope& s) { return f.tokens()[s.colon_token].end; }

}  // namespace

bool is_stub(const SourceFile& file, int scope_index) {
  const auto& s = file.scopes().at(static_cast<std::size_t>(scope_index));
  if (has_decorator(s, "overload")) return true;
  std::vector<std::size_t> body;
  for (std::size_t i = s.colon_token + 1; i <= s.last_token && i < file.tokens().size(); ++i) {
    if (file.tokens()[i].significant()) body.push_back(i);
  }
  std::size_t at = 0;
  if (at < body.size() && file.tokens()[body[at]].kind == TokenKind::String) ++at;
  return body.size() == at + 1 && file.token_text(body[at]) == "...";
}

std::optional<ImplementationContext> extract_implementation(const SourceFile& file, std::uint32_t name_byte,
                                                            bool stub_file, const std::string& receiver) {
  auto idx = file.scope_named_at(name_byte);
  if (!idx) return std::nullopt;
  const auto& scopes = file.scopes();
  const Scope& s = scopes[static_cast<std::size_t>(*idx)];

  ImplementationContext ctx;
  if (s.kind == Scope::Kind::Function) {
    ctx.kind = "function";
    ctx.stub = stub_file || is_stub(file, *idx);
    std::uint32_t end = ctx.stub ? header_end(file, s) : s.end_byte;
    ctx.text = slice(file, s.begin_byte, end);
    ctx.tokens = file.tokens_between(s.begin_byte, end);
    ctx.signature = signature_of(file, *idx);

    bool in_class = s.parent >= 0 && scopes[static_cast<std::size_t>(s.parent)].kind == Scope::Kind::Class;
    if (in_class && !has_decorator(s, "staticmethod") && !receiver.empty()) {
      // `Klass.method(obj, ...)` passes the receiver explicitly.
      const auto& owner = scopes[static_cast<std::size_t>(s.parent)].name;
      bool via_class = receiver == owner && !has_decorator(s, "classmethod");
      ctx.bound_receiver = !via_class;
    }
    if (ctx.signature && ctx.bound_receiver) ctx.signature = ctx.signature->bound();
    return ctx;
  }
  if (s.kind == Scope::Kind::Class) {
    ctx.kind = "class";
    ctx.bound_receiver = true;
    ctx.text = slice(file, s.begin_byte, header_end(file, s));
    ctx.tokens = file.tokens_between(s.begin_byte, header_end(file, s));
    for (int child : s.children) {
      const Scope& c = scopes[static_cast<std::size_t>(child)];
      if (c.kind != Scope::Kind::Function || c.name != "__init__") continue;
      bool stub = stub_file || is_stub(file, child);
      std::uint32_t end = stub ? header_end(file, c) : c.end_byte;
      ctx.stub = stub;
      ctx.text += "\n" + slice(file, c.begin_byte, end);
      auto more = file.tokens_between(c.begin_byte, end);
      ctx.tokens.insert(ctx.tokens.end(), more.begin(), more.end());
      if (auto sig = signature_of(file, child)) ctx.signature = sig->bound();
      break;
    }
    return ctx;
  }
  return std::nullopt;
}

}  // namespace callctx::analysis
