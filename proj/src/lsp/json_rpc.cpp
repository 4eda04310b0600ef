#include "callctx/lsp/json_rpc.hpp"

#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstring>

namespace callctx::lsp {

std::string to_string(const RequestId& id) {
  if (const auto* n = std::get_if<std::int64_t>(&id)) return std::to_string(*n);
  return std::get<std::string>(id);
}

namespace {

Json id_to_json(const RequestId& id) {
  if (const auto* n = std::get_if<std::int64_t>(&id)) return *n;
  return std::get<std::string>(id);
}

RequestId id_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw ProtocolError(ProtocolError::Kind::InvalidMessage, "id must be an integer or string");
}

}  // namespace

RpcMessage RpcMessage::request(RequestId id, std::string method, Json params) {
  RpcMessage m;
  m.kind_ = MessageKind::Request;
  m.id_ = std::move(id);
  m.method_ = std::move(method);
  m.payload_ = std::move(params);
  return m;
}

RpcMessage RpcMessage::notification(std::string method, Json params) {
  RpcMessage m;
  m.kind_ = MessageKind::Notification;
  m.method_ = std::move(method);
  m.payload_ = std::move(params);
  return m;
}

RpcMessage RpcMessage::response(RequestId id, Json result) {
  RpcMessage m;
  m.kind_ = MessageKind::Response;
  m.id_ = std::move(id);
  m.payload_ = std::move(result);
  return m;
}

RpcMessage RpcMessage::error_response(RequestId id, int code, std::string message) {
  RpcMessage m;
  m.kind_ = MessageKind::Response;
  m.id_ = std::move(id);
  m.payload_ = Json{{"code", code}, {"message", std::move(message)}};
  m.is_error_ = true;
  return m;
}

RpcMessage RpcMessage::from_json(const Json& j) {
  using Kind = ProtocolError::Kind;
  if (!j.is_object()) throw ProtocolError(Kind::InvalidMessage, "message is not an object");
  bool has_id = j.contains("id") && !j.at("id").is_null();
  bool has_method = j.contains("method");
  RpcMessage m;
  if (has_method) {
    if (!j.at("method").is_string()) throw ProtocolError(Kind::InvalidMessage, "method must be a string");
    m.method_ = j.at("method").get<std::string>();
    m.payload_ = j.contains("params") ? j.at("params") : Json(nullptr);
    if (has_id) {
      m.kind_ = MessageKind::Request;
      m.id_ = id_from_json(j.at("id"));
    } else {
      m.kind_ = MessageKind::Notification;
    }
    return m;
  }
  bool has_result = j.contains("result");
  bool has_error = j.contains("error");
  if (!j.contains("id")) throw ProtocolError(Kind::InvalidMessage, "message has neither id nor method");
  if (has_result == has_error) {
    throw ProtocolError(Kind::InvalidMessage, "response needs exactly one of result/error");
  }
  m.kind_ = MessageKind::Response;
  // Error responses to unparseable requests carry id null; keep them as id "".
  m.id_ = has_id ? id_from_json(j.at("id")) : RequestId{std::string()};
  m.is_error_ = has_error;
  m.payload_ = has_error ? j.at("error") : j.at("result");
  return m;
}

Json RpcMessage::to_json() const {
  Json j = Json::object();
  j["jsonrpc"] = "2.0";
  if (id_) j["id"] = id_to_json(*id_);
  switch (kind_) {
    case MessageKind::Request:
    case MessageKind::Notification:
      j["method"] = *method_;
      if (!payload_.is_null()) j["params"] = payload_;
      break;
    case MessageKind::Response:
      j[is_error_ ? "error" : "result"] = payload_;
      break;
  }
  return j;
}

bool RpcMessage::operator==(const RpcMessage& other) const {
  return kind_ == other.kind_ && id_ == other.id_ && method_ == other.method_ &&
         is_error_ == other.is_error_ && payload_ == other.payload_;
}

std::string frame_message(const RpcMessage& msg) {
  std::string content;
  try {
    content = msg.to_json().dump();
  } catch (const Json::exception& e) {
    throw ProtocolError(ProtocolError::Kind::Serialization, e.what());
  }
  std::string out = "Content-Length: " + std::to_string(content.size()) + "\r\n\r\n";
  out += content;
  return out;
}

std::size_t StringSource::read_some(char* buf, std::size_t n) {
  std::size_t k = std::min(n, data_.size() - pos_);
  std::memcpy(buf, data_.data() + pos_, k);
  pos_ += k;
  return k;
}

std::size_t FdSource::read_some(char* buf, std::size_t n) {
  for (;;) {
    ssize_t r = ::read(fd_, buf, n);
    if (r >= 0) return static_cast<std::size_t>(r);
    if (errno != EINTR) return 0;
  }
}

bool MessageReader::fill() {
  if (pos_ > 0 && pos_ == buffer_.size()) {
    buffer_.clear();
    pos_ = 0;
  }
  char chunk[8192];
  std::size_t n = source_.read_some(chunk, sizeof chunk);
  if (n == 0) return false;
  buffer_.append(chunk, n);
  return true;
}

std::optional<std::string> MessageReader::read_line() {
  for (;;) {
    auto crlf = buffer_.find("\r\n", pos_);
    if (crlf != std::string::npos) {
      std::string line = buffer_.substr(pos_, crlf - pos_);
      pos_ = crlf + 2;
      return line;
    }
    if (!fill()) return std::nullopt;
  }
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

namespace {


// Validates one header line, updating `length` for Content-Length.
void apply_header_line(const std::string& line, std::optional<std::size_t>& length) {
  using Kind = ProtocolError::Kind;
  auto colon = line.find(':');
  if (colon == std::string::npos) throw ProtocolError(Kind::MalformedHeader, "header line without ':'");
  std::string_view name = trim(std::string_view(line).substr(0, colon));
  std::string_view value = trim(std::string_view(line).substr(colon + 1));
  if (iequals(name, "Content-Length")) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
      throw ProtocolError(Kind::MalformedHeader, "bad Content-Length: " + std::string(value));
    }
    length = n;
  } else if (!iequals(name, "Content-Type")) {
    throw ProtocolError(Kind::MalformedHeader, "unknown header: " + std::string(name));
  }
}

RpcMessage decode_content(const std::string& content) {
  Json j;
  try {
    j = Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(ProtocolError::Kind::InvalidJson, e.what());
  }
  return RpcMessage::from_json(j);
}

}  // namespace

std::optional<RpcMessage> MessageReader::next() {
  using Kind = ProtocolError::Kind;
  if (pos_ == buffer_.size() && !fill()) return std::nullopt;

  std::optional<std::size_t> length;
  bool first = true;
  for (;;) {
    auto line = read_line();
    if (!line) throw ProtocolError(Kind::PrematureEnd, "stream ended inside message header");
    if (line->empty()) {
      if (first) throw ProtocolError(Kind::MalformedHeader, "empty header");
      break;
    }
    first = false;
    apply_header_line(*line, length);
  }
  if (!length) throw ProtocolError(Kind::MalformedHeader, "missing Content-Length");

  while (buffer_.size() - pos_ < *length) {
    if (!fill()) throw ProtocolError(Kind::PrematureEnd, "stream ended inside message content");
  }
  last_content_ = buffer_.substr(pos_, *length);
  pos_ += *length;
  return decode_content(last_content_);
}

RpcMessage parse_message(ByteSource& source) {
  using Kind = ProtocolError::Kind;
  // Byte-at-a-time through the header so nothing past this message is consumed.
  std::optional<std::size_t> length;
  std::string line;
  bool first = true;
  bool any = false;
  for (;;) {
    char c = 0;
    if (source.read_some(&c, 1) == 0) {
      throw ProtocolError(Kind::PrematureEnd,
                          any ? "stream ended inside message header" : "stream ended before a message");
    }
    any = true;
    line.push_back(c);
    if (line.size() >= 2 && line[line.size() - 2] == '\r' && c == '\n') {
      line.resize(line.size() - 2);
      if (line.empty()) {
        if (first) throw ProtocolError(Kind::MalformedHeader, "empty header");
        break;
      }
      first = false;
      apply_header_line(line, length);
      line.clear();
    }
  }
  if (!length) throw ProtocolError(Kind::MalformedHeader, "missing Content-Length");
  std::string content(*length, '\0');
  std::size_t got = 0;
  while (got < *length) {
    std::size_t n = source.read_some(content.data() + got, *length - got);
    if (n == 0) throw ProtocolError(Kind::PrematureEnd, "stream ended inside message content");
    got += n;
  }
  return decode_content(content);
}

}  // namespace callctx::lsp
