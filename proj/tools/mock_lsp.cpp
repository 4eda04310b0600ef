// A stand-in language server for tests.
//
// Transcript mode (--transcript FILE) answers requests from a JSONL script of
// {"method", "params", "result" | "error"} entries, matched on method and
// params. Index mode (--index) resolves definitions and references by name
// over the workspace described in initializationOptions.

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "callctx/lsp/json_rpc.hpp"
#include "callctx/lsp/position.hpp"
#include "callctx/python/source_file.hpp"
#include "callctx/util/io.hpp"

namespace fs = std::filesystem;
using callctx::Json;
using callctx::lsp::OffsetEncoding;
using callctx::lsp::RpcMessage;
using callctx::python::Scope;
using callctx::python::SourceFile;
using callctx::python::TokenKind;

namespace {

struct Options {
  std::string transcript;
  bool index = false;
  std::string encoding = "utf-16";
  std::vector<std::string> hang_methods;
  std::string hang_until_restart;  // marker file
  std::size_t batch = 0;           // answer in reverse order in batches of this size
  std::size_t exit_after = 0;      // exit without replying after this many requests
  std::string log;
};

void send(const RpcMessage& msg) {
  std::string frame = callctx::lsp::frame_message(msg);
  std::size_t off = 0;
  while (off < frame.size()) {
    ssize_t n = ::write(STDOUT_FILENO, frame.data() + off, frame.size() - off);
    if (n <= 0) std::exit(0);
    off += static_cast<std::size_t>(n);
  }
}

// ---- index mode ------------------------------------------------------------

struct Def {
  fs::path file;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  bool operator==(const Def&) const = default;
};

struct Imports {
  std::map<std::string, std::string> modules;  // alias -> dotted module
  struct From {
    std::string module;
    std::string name;
    int level = 0;
  };
  std::map<std::string, From> names;  // local name -> origin
};

class Index {
 public:
  void configure(const Json& init, const fs::path& root) {
    root_ = root;
    const Json ws = init.is_object() ? init.value("workspace", Json::object()) : Json::object();
    for (const auto& p : ws.value("extraPaths", Json::array())) roots_.push_back(p.get<std::string>());
    std::string stdlib = ws.value("stdlibPath", std::string());
    if (!stdlib.empty()) stdlib_ = stdlib;
    if (roots_.empty() && !root_.empty()) roots_.push_back(root_);
  }

  void open(const fs::path& file, std::string text) {
    files_[file] = std::make_shared<SourceFile>(SourceFile::parse(std::move(text)));
  }

  const SourceFile* load(const fs::path& file) {
    auto it = files_.find(file);
    if (it != files_.end()) return it->second.get();
    std::shared_ptr<SourceFile> parsed;
    try {
      parsed = std::make_shared<SourceFile>(SourceFile::parse(callctx::read_file(file)));
    } catch (const std::exception&) {
    }
    return files_.emplace(file, parsed).first->second.get();
  }

  // Token index of the name at `byte`.
  static std::optional<std::size_t> token_at(const SourceFile& f, std::size_t byte) {
    const auto& toks = f.tokens();
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind == TokenKind::Name && toks[i].begin <= byte && byte < toks[i].end) return i;
      if (toks[i].begin > byte) break;
    }
    return std::nullopt;
  }

  std::optional<Def> resolve(const fs::path& file, std::size_t tok) {
    const SourceFile* f = load(file);
    if (!f) return std::nullopt;
    std::string name(f->token_text(tok));
    if (callctx::python::is_keyword(name)) return std::nullopt;
    // A def/class name resolves to itself.
    if (auto s = f->scope_named_at(f->tokens()[tok].begin)) {
      const auto& sc = f->scopes()[static_cast<std::size_t>(*s)];
      return Def{file, f->tokens()[sc.name_token].begin, f->tokens()[sc.name_token].end};
    }
    auto prev = f->prev_significant(tok);
    if (prev && f->token_text(*prev) == ".") return resolve_attribute(file, *f, tok, *prev);
    return resolve_name(file, *f, name, f->tokens()[tok].begin, 0);
  }

  std::vector<Def> references(const Def& target, const std::string& name, bool include_declaration) {
    std::vector<Def> out;
    for (const auto& path : all_files()) {
      const SourceFile* f = load(path);
      if (!f) continue;
      for (std::size_t i = 0; i < f->tokens().size(); ++i) {
        const auto& t = f->tokens()[i];
        if (t.kind != TokenKind::Name || f->token_text(i) != name) continue;
        Def here{path, t.begin, t.end};
        if (here == target) {
          if (include_declaration) out.push_back(here);
          continue;
        }
        auto d = resolve(path, i);
        if (d && *d == target) out.push_back(here);
      }
    }
    return out;
  }

  Json location(const Def& d, OffsetEncoding enc) {
    const SourceFile* f = load(d.file);
    return Json{{"uri", callctx::path_to_uri(d.file)},
                {"range",
                 {{"start", callctx::lsp::to_json(f->lines().position_of(d.begin, enc))},
                  {"end", callctx::lsp::to_json(f->lines().position_of(d.end, enc))}}}};
  }

 private:
  static Imports imports_of(const SourceFile& f) {
    Imports imp;
    const auto& toks = f.tokens();
    auto text = [&](std::size_t i) { return std::string(f.token_text(i)); };
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::Name) continue;
      auto p = f.prev_significant(i);
      bool stmt_start = i == 0 || (i > 0 && (toks[i - 1].kind == TokenKind::Newline ||
                                             toks[i - 1].kind == TokenKind::Indent ||
                                             toks[i - 1].kind == TokenKind::Dedent)) ||
                        (p && f.token_text(*p) == ":");
      if (!stmt_start) continue;
      std::string kw = text(i);
      if (kw == "import") {
        std::size_t j = i + 1;
        while (j < toks.size() && toks[j].kind != TokenKind::Newline) {
          std::string dotted;
          while (j < toks.size() && (toks[j].kind == TokenKind::Name || text(j) == ".") && text(j) != "as") {
            dotted += text(j);
            ++j;
          }
          std::string alias = dotted.substr(0, dotted.find('.'));
          std::string module = alias;
          if (j < toks.size() && text(j) == "as") {
            alias = text(j + 1);
            module = dotted;
            j += 2;
          }
          if (!alias.empty()) imp.modules[alias] = module;
          if (j < toks.size() && text(j) == ",") ++j;
          else break;
        }
      } else if (kw == "from") {
        std::size_t j = i + 1;
        int level = 0;
        std::string module;
        while (j < toks.size() && text(j) != "import") {
          if (module.empty() && text(j) == ".") ++level;
          else if (module.empty() && text(j) == "...") level += 3;
          else module += text(j);
          ++j;
        }
        ++j;
        while (j < toks.size() && toks[j].kind != TokenKind::Newline) {
          std::string t = text(j);
          if (t == "(" || t == ")" || t == ",") {
            ++j;
            continue;
          }
          if (toks[j].kind != TokenKind::Name) {
            ++j;
            continue;
          }
          std::string name = t;
          std::string alias = t;
          if (j + 2 < toks.size() && text(j + 1) == "as") {
            alias = text(j + 2);
            j += 2;
          }
          imp.names[alias] = Imports::From{module, name, level};
          ++j;
        }
      }
    }
    return imp;
  }

  std::vector<fs::path> search_roots() const {
    auto roots = roots_;
    if (!stdlib_.empty()) roots.push_back(stdlib_);
    return roots;
  }

  std::optional<fs::path> module_file(const std::string& dotted, const fs::path& from, int level) {
    std::vector<fs::path> bases;
    if (level > 0) {
      fs::path base = from.parent_path();
      for (int l = 1; l < level; ++l) base = base.parent_path();
      bases.push_back(base);
    } else {
      bases = search_roots();
    }
    fs::path rel;
    std::string part;
    for (char c : dotted + ".") {
      if (c == '.') {
        if (!part.empty()) rel /= part;
        part.clear();
      } else {
        part.push_back(c);
      }
    }
    for (const auto& b : bases) {
      fs::path p = b / rel;
      if (rel.empty()) {
        for (const char* init : {"__init__.pyi", "__init__.py"})
          if (fs::exists(b / init)) return b / init;
        continue;
      }
      for (const auto& cand : {fs::path(p.string() + ".pyi"), fs::path(p.string() + ".py"), p / "__init__.pyi",
                               p / "__init__.py"}) {
        if (fs::is_regular_file(cand)) return cand;
      }
    }
    return std::nullopt;
  }

  static std::optional<Def> child_named(const SourceFile& f, const fs::path& file, int parent, const std::string& name) {
    for (const auto& s : f.scopes()) {
      if (s.parent == parent && s.name == name && s.kind != Scope::Kind::Module) {
        return Def{file, f.tokens()[s.name_token].begin, f.tokens()[s.name_token].end};
      }
    }
    return std::nullopt;
  }

  std::optional<Def> find_in_module(const fs::path& file, const std::string& name, int depth) {
    if (depth > 8) return std::nullopt;
    const SourceFile* f = load(file);
    if (!f) return std::nullopt;
    if (auto d = child_named(*f, file, 0, name)) return d;
    auto imp = imports_of(*f);
    if (auto it = imp.names.find(name); it != imp.names.end()) {
      if (auto target = module_file(it->second.module, file, it->second.level)) {
        if (auto d = find_in_module(*target, it->second.name, depth + 1)) return d;
      }
      std::string sub = it->second.module.empty() ? it->second.name : it->second.module + "." + it->second.name;
      if (auto m = module_file(sub, file, it->second.level)) return Def{*m, 0, 0};
    }
    if (file.filename().string().starts_with("__init__")) {
      if (auto m = module_file(name, file, 1)) return Def{*m, 0, 0};
    }
    return std::nullopt;
  }

  std::optional<Def> resolve_name(const fs::path& file, const SourceFile& f, const std::string& name,
                                  std::uint32_t at, int depth) {
    // Enclosing scopes, innermost first.
    std::vector<int> chain;
    for (int i = static_cast<int>(f.scopes().size()) - 1; i >= 1; --i) {
      const auto& s = f.scopes()[static_cast<std::size_t>(i)];
      if (s.kind == Scope::Kind::Function && s.body_begin_byte <= at && at <= s.end_byte) chain.push_back(i);
    }
    std::sort(chain.begin(), chain.end(), [&](int a, int b) {
      return f.scopes()[static_cast<std::size_t>(a)].begin_byte > f.scopes()[static_cast<std::size_t>(b)].begin_byte;
    });
    chain.push_back(0);
    for (int scope : chain) {
      if (auto d = child_named(f, file, scope, name)) return d;
    }
    auto imp = imports_of(f);
    if (auto it = imp.names.find(name); it != imp.names.end()) {
      if (auto target = module_file(it->second.module, file, it->second.level)) {
        if (auto d = find_in_module(*target, it->second.name, depth + 1)) return d;
      }
      std::string sub = it->second.module.empty() ? it->second.name : it->second.module + "." + it->second.name;
      if (auto m = module_file(sub, file, it->second.level)) return Def{*m, 0, 0};
      return std::nullopt;
    }
    if (auto it = imp.modules.find(name); it != imp.modules.end()) {
      if (auto m = module_file(it->second, file, 0)) return Def{*m, 0, 0};
    }
    if (!stdlib_.empty() && fs::exists(stdlib_ / "builtins.pyi")) {
      return find_in_module(stdlib_ / "builtins.pyi", name, depth + 1);
    }
    return std::nullopt;
  }

  // Members of a class definition.
  std::optional<Def> member(const Def& cls, const std::string& name) {
    const SourceFile* f = load(cls.file);
    if (!f) return std::nullopt;
    auto idx = f->scope_named_at(cls.begin);
    if (!idx) return std::nullopt;
    return child_named(*f, cls.file, *idx, name);
  }

  std::optional<Def> resolve_attribute(const fs::path& file, const SourceFile& f, std::size_t tok, std::size_t dot) {
    std::string name(f.token_text(tok));
    // Receiver chain `a.b.c` before the dot.
    std::vector<std::string> chain;
    std::size_t q = dot;
    bool plain = true;
    for (;;) {
      auto r = f.prev_significant(q);
      if (!r) break;
      if (f.tokens()[*r].kind != TokenKind::Name) {
        plain = false;
        break;
      }
      chain.insert(chain.begin(), std::string(f.token_text(*r)));
      auto d = f.prev_significant(*r);
      if (!d || f.token_text(*d) != ".") break;
      q = *d;
    }
    if (plain && !chain.empty()) {
      auto imp = imports_of(f);
      const std::string& base = chain.front();
      if (auto it = imp.modules.find(base); it != imp.modules.end()) {
        std::string module = it->second;
        for (std::size_t k = chain.size(); k >= 1; --k) {
          std::string dotted = module;
          for (std::size_t i = 1; i < k; ++i) dotted += "." + chain[i];
          auto m = module_file(dotted, file, 0);
          if (!m) continue;
          auto cur = k == chain.size() ? find_in_module(*m, name, 0) : find_in_module(*m, chain[k], 0);
          for (std::size_t i = k + 1; cur && i <= chain.size(); ++i) {
            cur = i == chain.size() ? member(*cur, name) : member(*cur, chain[i]);
          }
          if (cur) return cur;
          break;
        }
      }
      if (chain.size() == 1 && (base == "self" || base == "cls")) {
        auto at = f.tokens()[tok].begin;
        for (int i = static_cast<int>(f.scopes().size()) - 1; i >= 1; --i) {
          const auto& s = f.scopes()[static_cast<std::size_t>(i)];
          if (s.kind == Scope::Kind::Class && s.body_begin_byte <= at && at <= s.end_byte) {
            if (auto d = child_named(f, file, i, name)) return d;
            break;
          }
        }
      }
      if (chain.size() == 1 && base != "self" && base != "cls") {
        auto at = f.tokens()[tok].begin;
        if (auto local = constructed_class(f, base, at)) {
          if (auto cls = resolve_name(file, f, *local, at, 0)) return member(*cls, name);
        }
        if (auto cls = resolve_name(file, f, base, at, 0)) {
          if (auto d = member(*cls, name)) return d;
        }
      }
    }
    return any_method(file, name);
  }

  // `base = Name(...)` earlier in the enclosing function.
  static std::optional<std::string> constructed_class(const SourceFile& f, const std::string& base, std::uint32_t at) {
    auto fn = f.innermost_function(at, at);
    if (!fn) return std::nullopt;
    const auto& s = f.scopes()[static_cast<std::size_t>(*fn)];
    std::optional<std::string> found;
    for (std::size_t i = s.colon_token; i + 3 < f.tokens().size() && f.tokens()[i].begin < at; ++i) {
      if (f.tokens()[i].kind == TokenKind::Name && f.token_text(i) == base && f.token_text(i + 1) == "=" &&
          f.tokens()[i + 2].kind == TokenKind::Name && f.token_text(i + 3) == "(") {
        found = std::string(f.token_text(i + 2));
      }
    }
    return found;
  }

  std::vector<fs::path> all_files() {
    if (all_files_) return *all_files_;
    std::vector<fs::path> out;
    for (const auto& r : roots_) {
      if (!fs::is_directory(r)) continue;
      for (const auto& e : fs::recursive_directory_iterator(r)) {
        auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".py" || ext == ".pyi")) out.push_back(e.path());
      }
    }
    std::sort(out.begin(), out.end());
    all_files_ = out;
    return out;
  }

  // First method of that name, looking in the caller's own top-level package first.
  std::optional<Def> any_method(const fs::path& file, const std::string& name) {
    auto files = all_files();
    fs::path own;
    for (const auto& r : roots_) {
      if (auto rel = callctx::relative_under(file, r); rel && !rel->empty()) own = r / *rel->begin();
    }
    std::stable_partition(files.begin(), files.end(), [&](const fs::path& p) {
      return !own.empty() && callctx::relative_under(p, own).has_value();
    });
    for (const auto& p : files) {
      const SourceFile* f = load(p);
      if (!f) continue;
      for (const auto& s : f->scopes()) {
        if (s.kind != Scope::Kind::Function || s.name != name || s.parent < 0) continue;
        if (f->scopes()[static_cast<std::size_t>(s.parent)].kind != Scope::Kind::Class) continue;
        return Def{p, f->tokens()[s.name_token].begin, f->tokens()[s.name_token].end};
      }
    }
    return std::nullopt;
  }

  fs::path root_;
  std::vector<fs::path> roots_;
  fs::path stdlib_;
  std::map<fs::path, std::shared_ptr<SourceFile>> files_;
  std::optional<std::vector<fs::path>> all_files_;
};

// ---- server ----------------------------------------------------------------

struct Entry {
  std::string method;
  Json params;
  Json result;
  Json error;
};

class Server {
 public:
  explicit Server(Options o) : o_(std::move(o)) {
    if (!o_.transcript.empty()) {
      for (const auto& j : callctx::read_jsonl(o_.transcript)) {
        script_.push_back(Entry{j.at("method").get<std::string>(), j.value("params", Json(nullptr)),
                                j.value("result", Json(nullptr)), j.value("error", Json(nullptr))});
      }
    }
    encoding_ = o_.encoding == "utf-8" ? OffsetEncoding::Utf8 : OffsetEncoding::Utf16;
  }

  int run() {
    callctx::lsp::FdSource in(STDIN_FILENO);
    callctx::lsp::MessageReader reader(in);
    for (;;) {
      std::optional<RpcMessage> msg;
      try {
        msg = reader.next();
      } catch (const callctx::lsp::ProtocolError& e) {
        std::cerr << "mock_lsp: " << e.what() << "\n";
        return 1;
      }
      if (!msg) return 0;
      log(reader.last_content());
      if (msg->kind() == callctx::lsp::MessageKind::Notification) {
        if (*msg->method() == "exit") return shutdown_ ? 0 : 1;
        if (*msg->method() == "textDocument/didOpen" && o_.index) {
          const auto& doc = msg->payload().at("textDocument");
          try {
            index_.open(callctx::uri_to_path(doc.at("uri").get<std::string>()), doc.at("text").get<std::string>());
          } catch (const std::exception&) {
          }
        }
        continue;
      }
      if (msg->kind() != callctx::lsp::MessageKind::Request) continue;
      ++requests_;
      if (o_.exit_after && requests_ > o_.exit_after) return 3;
      handle(*msg);
    }
  }

 private:
  void log(const std::string& content) {
    if (o_.log.empty()) return;
    std::string existing;
    if (fs::exists(o_.log)) existing = callctx::read_file(o_.log);
    callctx::write_file(o_.log, existing + content + "\n");
  }

  void reply(RpcMessage msg) {
    if (o_.batch <= 1) {
      send(msg);
      return;
    }
    queued_.push_back(std::move(msg));
    if (queued_.size() >= o_.batch) flush();
  }

  void flush() {
    for (auto it = queued_.rbegin(); it != queued_.rend(); ++it) send(*it);
    queued_.clear();
  }

  bool hang(const std::string& method) {
    if (std::find(o_.hang_methods.begin(), o_.hang_methods.end(), method) != o_.hang_methods.end()) return true;
    if (!o_.hang_until_restart.empty() && method == "textDocument/definition") {
      if (!fs::exists(o_.hang_until_restart)) {
        callctx::write_file(o_.hang_until_restart, "hung\n");
        return true;
      }
    }
    return false;
  }

  void handle(const RpcMessage& msg) {
    const auto& id = *msg.id();
    const std::string& method = *msg.method();
    if (method == "shutdown") {
      shutdown_ = true;
      flush();
      send(RpcMessage::response(id, nullptr));
      return;
    }
    if (hang(method)) return;
    if (auto e = scripted(method, msg.payload())) {
      if (!e->error.is_null()) {
        reply(RpcMessage::error_response(id, e->error.value("code", -32603), e->error.value("message", "")));
      } else {
        reply(RpcMessage::response(id, e->result));
      }
      return;
    }
    if (method == "initialize") {
      const auto& params = msg.payload();
      std::vector<std::string> offered;
      if (params.contains("capabilities")) {
        offered = params["capabilities"].value("general", Json::object()).value("positionEncodings",
                                                                                 std::vector<std::string>{});
      }
      if (std::find(offered.begin(), offered.end(), o_.encoding) == offered.end()) encoding_ = OffsetEncoding::Utf16;
      std::string root_uri = params.value("rootUri", std::string());
      index_.configure(params.value("initializationOptions", Json(nullptr)),
                       root_uri.empty() ? fs::path() : callctx::uri_to_path(root_uri));
      send(RpcMessage::response(
          id, Json{{"capabilities",
                    {{"positionEncoding", callctx::lsp::encoding_name(encoding_)},
                     {"textDocumentSync", 1},
                     {"definitionProvider", true},
                     {"referencesProvider", true}}},
                   {"serverInfo", {{"name", "mock_lsp"}}}}));
      return;
    }
    if (o_.index && (method == "textDocument/definition" || method == "textDocument/references")) {
      reply(RpcMessage::response(id, query(method, msg.payload())));
      return;
    }
    reply(RpcMessage::error_response(id, -32601, "no scripted response for " + method));
  }

  std::optional<Entry> scripted(const std::string& method, const Json& params) {
    for (const auto& e : script_) {
      if (e.method == method && (e.params.is_null() || e.params == params)) return e;
    }
    return std::nullopt;
  }

  Json query(const std::string& method, const Json& params) {
    fs::path file = callctx::uri_to_path(params.at("textDocument").at("uri").get<std::string>());
    const SourceFile* f = index_.load(file);
    if (!f) return nullptr;
    auto pos = callctx::lsp::position_from_json(params.at("position"));
    auto byte = f->lines().offset_of(pos, encoding_);
    auto tok = Index::token_at(*f, byte);
    if (!tok) return Json::array();
    auto def = index_.resolve(file, *tok);
    if (method == "textDocument/definition") {
      if (!def) return Json::array();
      return Json::array({index_.location(*def, encoding_)});
    }
    Json out = Json::array();
    if (!def) return out;
    bool include = params.value("context", Json::object()).value("includeDeclaration", false);
    for (const auto& d : index_.references(*def, std::string(f->token_text(*tok)), include)) {
      out.push_back(index_.location(d, encoding_));
    }
    return out;
  }

  Options o_;
  std::vector<Entry> script_;
  std::vector<RpcMessage> queued_;
  Index index_;
  OffsetEncoding encoding_;
  std::size_t requests_ = 0;
  bool shutdown_ = false;
};

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Scripted language server for tests"};
  app.add_option("--transcript", o.transcript, "JSONL script of method/params/result entries")->check(CLI::ExistingFile);
  app.add_flag("--index", o.index, "Resolve definitions and references by name over the workspace");
  app.add_option("--encoding", o.encoding, "Position encoding to negotiate")->check(CLI::IsMember({"utf-8", "utf-16"}));
  app.add_option("--hang", o.hang_methods, "Never answer these methods");
  app.add_option("--hang-until-restart", o.hang_until_restart,
                 "Hang on the first definition request and create this file; later processes answer normally");
  app.add_option("--batch", o.batch, "Hold replies and send each batch of this size in reverse order");
  app.add_option("--exit-after", o.exit_after, "Exit without replying once this many requests were answered");
  app.add_option("--log", o.log, "Append every received message to this file");
  CLI11_PARSE(app, argc, argv);
  return Server(std::move(o)).run();
}
