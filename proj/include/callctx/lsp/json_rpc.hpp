#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "callctx/util/json.hpp"

namespace callctx::lsp {

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, PrematureEnd, InvalidJson, InvalidMessage, Serialization };

  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Servers are free to use string ids for their own requests.
using RequestId = std::variant<std::int64_t, std::string>;

std::string to_string(const RequestId& id);

enum class MessageKind { Request, Response, Notification };

class RpcMessage {
 public:
  static RpcMessage request(RequestId id, std::string method, Json params = nullptr);
  static RpcMessage notification(std::string method, Json params = nullptr);
  static RpcMessage response(RequestId id, Json result);
  static RpcMessage error_response(RequestId id, int code, std::string message);

  // Throws ProtocolError(InvalidMessage) when `j` is not a request, response or notification.
  static RpcMessage from_json(const Json& j);
  Json to_json() const;

  MessageKind kind() const { return kind_; }
  const std::optional<RequestId>& id() const { return id_; }
  const std::optional<std::string>& method() const { return method_; }
  // params for requests/notifications (null when absent), result or error object for responses.
  const Json& payload() const { return payload_; }
  bool is_error() const { return is_error_; }

  bool operator==(const RpcMessage& other) const;

 private:
  MessageKind kind_ = MessageKind::Notification;
  std::optional<RequestId> id_;
  std::optional<std::string> method_;
  Json payload_;
  bool is_error_ = false;
};

// `Content-Length: <bytes>\r\n\r\n<UTF-8 JSON>`
std::string frame_message(const RpcMessage& msg);

class ByteSource {
 public:
  virtual ~ByteSource() = default;
  // Reads up to `n` bytes; 0 means end of stream.
  virtual std::size_t read_some(char* buf, std::size_t n) = 0;
};

class StringSource : public ByteSource {
 public:
  explicit StringSource(std::string data) : data_(std::move(data)) {}
  std::size_t read_some(char* buf, std::size_t n) override;

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

class FdSource : public ByteSource {
 public:
  explicit FdSource(int fd) : fd_(fd) {}
  std::size_t read_some(char* buf, std::size_t n) override;

 private:
  int fd_;
};

// Pulls consecutive framed messages off a byte stream.
class MessageReader {
 public:
  explicit MessageReader(ByteSource& source) : source_(source) {}

  // std::nullopt on a clean end of stream at a message boundary.
  std::optional<RpcMessage> next();
  // Content bytes of the message most recently returned.
  const std::string& last_content() const { return last_content_; }

 private:
  bool fill();
  std::optional<std::string> read_line();

  ByteSource& source_;
  std::string buffer_;
  std::size_t pos_ = 0;
  std::string last_content_;
};

// Reads exactly one message; end of stream is a PrematureEnd error.
RpcMessage parse_message(ByteSource& source);

}  // namespace callctx::lsp
