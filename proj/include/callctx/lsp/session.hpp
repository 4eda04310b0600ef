#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "callctx/lsp/json_rpc.hpp"
#include "callctx/lsp/position.hpp"
#include "callctx/util/subprocess.hpp"

namespace callctx::lsp {

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RequestTimeout : public SessionError {
 public:
  using SessionError::SessionError;
};

class ServerDied : public SessionError {
 public:
  using SessionError::SessionError;
};

// The server answered with an error object.
class ServerError : public SessionError {
 public:
  ServerError(int code, const std::string& message)
      : SessionError("server error " + std::to_string(code) + ": " + message), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

struct SessionOptions {
  std::vector<std::string> command;
  std::filesystem::path workspace_root;
  Json initialization_options = nullptr;
  std::chrono::milliseconds timeout{30000};
  bool quiet_stderr = true;
};

// One language-server child process bound to one workspace. Callers may
// share a session across threads; writes are serialized and responses are
// routed back to the caller that owns the id.
class LspSession {
 public:
  explicit LspSession(SessionOptions options);
  ~LspSession();

  LspSession(const LspSession&) = delete;
  LspSession& operator=(const LspSession&) = delete;

  // Returns the result payload. Throws RequestTimeout, ServerError or ServerDied.
  Json request(const std::string& method, Json params);
  void notify(const std::string& method, Json params);

  // Sends didOpen once per uri.
  void open_document(const std::string& uri, const std::string& text,
                     const std::string& language_id = "python");

  OffsetEncoding encoding() const { return encoding_; }
  const Json& server_capabilities() const { return capabilities_; }
  bool alive() const { return !dead_; }

  // Responses that arrived for ids nobody was waiting on (timed out, unknown).
  std::size_t orphan_responses() const { return orphans_; }

 private:
  void send(const RpcMessage& msg);
  void read_loop();
  void handle_server_request(const RpcMessage& msg);
  void fail_pending(const std::string& why);

  SessionOptions options_;
  std::unique_ptr<ChildProcess> process_;
  std::thread reader_;
  std::mutex write_mutex_;
  std::mutex pending_mutex_;
  std::map<std::int64_t, std::promise<RpcMessage>> pending_;
  std::atomic<std::int64_t> next_id_{1};
  std::atomic<bool> dead_{false};
  std::atomic<bool> timed_out_{false};
  std::atomic<std::size_t> orphans_{0};
  std::string death_reason_;
  std::set<std::string> opened_;
  std::mutex opened_mutex_;
  OffsetEncoding encoding_ = OffsetEncoding::Utf16;
  Json capabilities_;
};

std::vector<SourceRange> parse_locations(const Json& result);

std::vector<SourceRange> request_definition(LspSession& session, const std::string& uri,
                                            SourcePosition pos);
std::vector<SourceRange> request_references(LspSession& session, const std::string& uri,
                                            SourcePosition pos, bool include_declaration = false);

// Wraps a session with the restart-once policy: a timed-out or dead session
// is restarted and the query retried one time before being reported failed.
class AnalyzerClient {
 public:
  explicit AnalyzerClient(SessionOptions options) : options_(std::move(options)) {}

  enum class Status { Ok, Failed };
  struct Outcome {
    Status status = Status::Failed;
    std::vector<SourceRange> ranges;
    std::string cause;
  };

  // `byte_offset` is converted to the negotiated position encoding here.
  Outcome definition(const std::filesystem::path& file, const std::string& text, std::size_t byte_offset);
  Outcome references(const std::filesystem::path& file, const std::string& text, std::size_t byte_offset,
                     bool include_declaration = false);

  OffsetEncoding encoding();
  std::size_t restarts() const { return restarts_; }
  // Set when the analyzer process could not be started.
  const std::optional<std::string>& spawn_failure() const { return spawn_failure_; }

 private:
  template <typename Query>
  Outcome run(const std::filesystem::path& file, const std::string& text, std::size_t byte_offset,
              Query query);
  LspSession& session();

  SessionOptions options_;
  std::unique_ptr<LspSession> session_;
  std::size_t restarts_ = 0;
  std::optional<std::string> spawn_failure_;
};

}  // namespace callctx::lsp
