#include "callctx/util/toml.hpp"

#include <toml.hpp>

namespace callctx {

namespace {

Json convert(const toml::node& node) {
  if (auto t = node.as_table()) {
    Json j = Json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = convert(v);
    return j;
  }
  if (auto a = node.as_array()) {
    Json j = Json::array();
    for (const auto& v : *a) j.push_back(convert(v));
    return j;
  }
  if (auto s = node.as_string()) return s->get();
  if (auto i = node.as_integer()) return i->get();
  if (auto f = node.as_floating_point()) return f->get();
  if (auto b = node.as_boolean()) return b->get();
  throw TomlError("dates and times are not supported", node.source().begin.line);
}

}  // namespace

Json parse_toml(std::string_view text) {
  try {
    return convert(toml::parse(text));
  } catch (const toml::parse_error& e) {
    throw TomlError(std::string(e.description()), e.source().begin.line);
  }
}

}  // namespace callctx
