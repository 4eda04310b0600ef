#include "callctx/lsp/session.hpp"

#include "callctx/util/io.hpp"

namespace callctx::lsp {

LspSession::LspSession(SessionOptions options) : options_(std::move(options)) {
  process_ = std::make_unique<ChildProcess>(options_.command, options_.quiet_stderr);
  reader_ = std::thread([this] { read_loop(); });

  Json params = {
      {"processId", nullptr},
      {"rootUri", path_to_uri(options_.workspace_root)},
      {"capabilities",
       {{"general", {{"positionEncodings", Json::array({"utf-8", "utf-16"})}}},
        {"textDocument",
         {{"definition", {{"linkSupport", false}}}, {"references", Json::object()}}}}},
      {"workspaceFolders",
       Json::array({{{"uri", path_to_uri(options_.workspace_root)},
                     {"name", options_.workspace_root.filename().string()}}})},
  };
  if (!options_.initialization_options.is_null()) {
    params["initializationOptions"] = options_.initialization_options;
  }
  try {
    Json result = request("initialize", std::move(params));
    capabilities_ = result.value("capabilities", Json::object());
    if (capabilities_.contains("positionEncoding")) {
      auto enc = parse_encoding(capabilities_.at("positionEncoding").get<std::string>());
      if (enc) encoding_ = *enc;
    }
    notify("initialized", Json::object());
  } catch (...) {
    process_->terminate(std::chrono::milliseconds(0));
    if (reader_.joinable()) reader_.join();
    throw;
  }
}

LspSession::~LspSession() {
  if (!dead_ && !timed_out_) {
    try {
      auto saved = options_.timeout;
      options_.timeout = std::chrono::milliseconds(2000);
      request("shutdown", nullptr);
      options_.timeout = saved;
      notify("exit", nullptr);
    } catch (const std::exception&) {
    }
  }
  process_->terminate(std::chrono::milliseconds(500));
  if (reader_.joinable()) reader_.join();
}

void LspSession::send(const RpcMessage& msg) {
  std::string frame = frame_message(msg);
  std::lock_guard lock(write_mutex_);
  if (dead_ || !process_->write_all(frame)) {
    throw ServerDied("language server is not accepting input" +
                     (death_reason_.empty() ? std::string() : ": " + death_reason_));
  }
}

Json LspSession::request(const std::string& method, Json params) {
  std::int64_t id = next_id_++;
  std::future<RpcMessage> reply;
  {
    std::lock_guard lock(pending_mutex_);
    if (dead_) throw ServerDied("language server exited: " + death_reason_);
    reply = pending_[id].get_future();
  }
  try {
    send(RpcMessage::request(id, method, std::move(params)));
  } catch (...) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(id);
    throw;
  }
  if (reply.wait_for(options_.timeout) != std::future_status::ready) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(id);
    timed_out_ = true;
    throw RequestTimeout(method + " timed out after " + std::to_string(options_.timeout.count()) + " ms");
  }
  RpcMessage msg = reply.get();  // rethrows ServerDied set by the reader
  if (msg.is_error()) {
    throw ServerError(msg.payload().value("code", 0), msg.payload().value("message", std::string()));
  }
  return msg.payload();
}

void LspSession::notify(const std::string& method, Json params) {
  send(RpcMessage::notification(method, std::move(params)));
}

void LspSession::open_document(const std::string& uri, const std::string& text,
                               const std::string& language_id) {
  {
    std::lock_guard lock(opened_mutex_);
    if (!opened_.insert(uri).second) return;
  }
  notify("textDocument/didOpen",
         {{"textDocument", {{"uri", uri}, {"languageId", language_id}, {"version", 1}, {"text", text}}}});
}

void LspSession::read_loop() {
  FdSource source(process_->stdout_fd());
  MessageReader reader(source);
  std::string reason = "end of stream";
  try {
    while (auto msg = reader.next()) {
      switch (msg->kind()) {
        case MessageKind::Response: {
          const auto* id = std::get_if<std::int64_t>(&*msg->id());
          std::lock_guard lock(pending_mutex_);
          auto it = id ? pending_.find(*id) : pending_.end();
          if (it == pending_.end()) {
            ++orphans_;
          } else {
            it->second.set_value(std::move(*msg));
            pending_.erase(it);
          }
          break;
        }
        case MessageKind::Request:
          handle_server_request(*msg);
          break;
        case MessageKind::Notification:
          break;
      }
    }
  } catch (const std::exception& e) {
    reason = e.what();
  }
  fail_pending(reason);
}

void LspSession::handle_server_request(const RpcMessage& msg) {
  Json result = nullptr;
  if (msg.method() == "workspace/configuration") {
    std::size_t n = msg.payload().contains("items") ? msg.payload().at("items").size() : 0;
    result = Json::array();
    for (std::size_t i = 0; i < n; ++i) result.push_back(nullptr);
  }
  try {
    send(RpcMessage::response(*msg.id(), std::move(result)));
  } catch (const SessionError&) {
  }
}

void LspSession::fail_pending(const std::string& why) {
  std::lock_guard lock(pending_mutex_);
  death_reason_ = why;
  dead_ = true;
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(ServerDied("language server exited: " + why)));
  }
  pending_.clear();
}

std::vector<SourceRange> parse_locations(const Json& result) {
  std::vector<SourceRange> out;
  if (result.is_null()) return out;
  if (result.is_object()) {
    out.push_back(location_from_json(result));
    return out;
  }
  for (const auto& loc : result) out.push_back(location_from_json(loc));
  return out;
}

std::vector<SourceRange> request_definition(LspSession& session, const std::string& uri,
                                            SourcePosition pos) {
  Json params = {{"textDocument", {{"uri", uri}}}, {"position", to_json(pos)}};
  return parse_locations(session.request("textDocument/definition", std::move(params)));
}

std::vector<SourceRange> request_references(LspSession& session, const std::string& uri,
                                            SourcePosition pos, bool include_declaration) {
  Json params = {{"textDocument", {{"uri", uri}}},
                 {"position", to_json(pos)},
                 {"context", {{"includeDeclaration", include_declaration}}}};
  return parse_locations(session.request("textDocument/references", std::move(params)));
}

LspSession& AnalyzerClient::session() {
  if (!session_ || !session_->alive()) session_ = std::make_unique<LspSession>(options_);
  return *session_;
}

OffsetEncoding AnalyzerClient::encoding() { return session().encoding(); }

template <typename Query>
AnalyzerClient::Outcome AnalyzerClient::run(const std::filesystem::path& file, const std::string& text,
                                            std::size_t byte_offset, Query query) {
  Outcome outcome;
  std::string uri = path_to_uri(file);
  LineIndex lines(text);
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      LspSession& s = session();
      s.open_document(uri, text);
      outcome.ranges = query(s, uri, lines.position_of(byte_offset, s.encoding()));
      outcome.status = Status::Ok;
      outcome.cause.clear();
      return outcome;
    } catch (const ServerError& e) {
      outcome.cause = e.what();
      return outcome;
    } catch (const SessionError& e) {
      outcome.cause = e.what();
    } catch (const ProcessError& e) {
      outcome.cause = e.what();
      spawn_failure_ = e.what();
      return outcome;
    }
    if (attempt == 0) {
      session_.reset();
      ++restarts_;
    }
  }
  return outcome;
}

AnalyzerClient::Outcome AnalyzerClient::definition(const std::filesystem::path& file, const std::string& text,
                                                   std::size_t byte_offset) {
  return run(file, text, byte_offset, [](LspSession& s, const std::string& uri, SourcePosition pos) {
    return request_definition(s, uri, pos);
  });
}

AnalyzerClient::Outcome AnalyzerClient::references(const std::filesystem::path& file, const std::string& text,
                                                   std::size_t byte_offset, bool include_declaration) {
  return run(file, text, byte_offset,
             [include_declaration](LspSession& s, const std::string& uri, SourcePosition pos) {
               return request_references(s, uri, pos, include_declaration);
             });
}

}  // namespace callctx::lsp
