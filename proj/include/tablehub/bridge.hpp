#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/exchange.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/session.hpp"
#include "tablehub/transform.hpp"

namespace tablehub {

inline constexpr std::string_view kProtocolName = "dsbp";
inline constexpr int kProtocolVersion = 1;

enum class MessageKind { Hello, Welcome, RequestData, Data, ApplyEdits, EditsApplied, DatasetChanged, Error };

constexpr std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "hello";
    case MessageKind::Welcome: return "welcome";
    case MessageKind::RequestData: return "request_data";
    case MessageKind::Data: return "data";
    case MessageKind::ApplyEdits: return "apply_edits";
    case MessageKind::EditsApplied: return "edits_applied";
    case MessageKind::DatasetChanged: return "dataset_changed";
    case MessageKind::Error: return "error";
  }
  return "error";
}

inline std::optional<MessageKind> parse_message_kind(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(MessageKind::Error); ++i)
    if (to_string(static_cast<MessageKind>(i)) == s) return static_cast<MessageKind>(i);
  return std::nullopt;
}

/// Error codes carried in `error` message payloads.
enum class BridgeErrc {
  NotReady,
  NoCommonFormat,
  UnknownDataset,
  Forbidden,
  BadTransform,
  ProtocolViolation,
  AdapterFailed,
  MalformedMessage,
  UnsupportedVersion,
  UnknownKind,
};

constexpr std::string_view to_string(BridgeErrc c) {
  switch (c) {
    case BridgeErrc::NotReady: return "NotReady";
    case BridgeErrc::NoCommonFormat: return "NoCommonFormat";
    case BridgeErrc::UnknownDataset: return "UnknownDataset";
    case BridgeErrc::Forbidden: return "Forbidden";
    case BridgeErrc::BadTransform: return "BadTransform";
    case BridgeErrc::ProtocolViolation: return "ProtocolViolation";
    case BridgeErrc::AdapterFailed: return "AdapterFailed";
    case BridgeErrc::MalformedMessage: return "MalformedMessage";
    case BridgeErrc::UnsupportedVersion: return "UnsupportedVersion";
    case BridgeErrc::UnknownKind: return "UnknownKind";
  }
  return "MalformedMessage";
}

struct BridgeMessage {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> reply_to;
  MessageKind kind = MessageKind::Hello;
  Json payload = Json::object();
};

/// Canonical JSON: protocol, version, id, reply_to (when set), kind, payload.
inline std::string encode_message(const BridgeMessage& m) {
  Json j;
  j["protocol"] = std::string(kProtocolName);
  j["version"] = kProtocolVersion;
  j["id"] = m.id;
  if (m.reply_to) j["reply_to"] = *m.reply_to;
  j["kind"] = std::string(to_string(m.kind));
  j["payload"] = m.payload;
  return write_json(j);
}

namespace detail {

[[noreturn]] inline void malformed(const std::string& why) { throw Error(Errc::MalformedMessage, why); }

inline bool is_uint(const Json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

inline void check_fields(const Json& obj, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional, std::string_view where) {
  if (!obj.is_object()) malformed(std::string(where) + " must be an object");
  for (auto r : required)
    if (!obj.contains(std::string(r))) malformed(std::string(where) + " lacks '" + std::string(r) + "'");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto r : required) known = known || k == r;
    for (auto o : optional) known = known || k == o;
    if (!known) malformed(std::string(where) + " has unknown field '" + k + "'");
  }
}

inline void require_string(const Json& obj, const char* field, bool non_empty = false) {
  const auto& v = obj[field];
  if (!v.is_string()) malformed(std::string("'") + field + "' must be a string");
  if (non_empty && v.get_ref<const std::string&>().empty()) malformed(std::string("'") + field + "' must be non-empty");
}

inline void require_string_array(const Json& obj, const char* field) {
  const auto& v = obj[field];
  if (!v.is_array()) malformed(std::string("'") + field + "' must be an array of strings");
  for (const auto& e : v)
    if (!e.is_string()) malformed(std::string("'") + field + "' must be an array of strings");
}

inline void validate_payload(MessageKind kind, const Json& p) {
  switch (kind) {
    case MessageKind::Hello:
      check_fields(p, {"tool_id", "accepts"}, {"features"}, "hello payload");
      require_string(p, "tool_id", true);
      require_string_array(p, "accepts");
      if (p.contains("features")) require_string_array(p, "features");
      break;
    case MessageKind::Welcome:
      check_fields(p, {"session_name", "datasets", "negotiated_format"}, {}, "welcome payload");
      require_string(p, "session_name");
      require_string(p, "negotiated_format");
      if (!p["datasets"].is_array()) malformed("'datasets' must be an array");
      break;
    case MessageKind::RequestData:
      check_fields(p, {"dataset_id"}, {"format"}, "request_data payload");
      require_string(p, "dataset_id");
      if (p.contains("format")) require_string(p, "format");
      break;
    case MessageKind::Data:
      check_fields(p, {"dataset_id", "format", "payload"}, {}, "data payload");
      require_string(p, "dataset_id");
      require_string(p, "format");
      break;
    case MessageKind::ApplyEdits:
      check_fields(p, {"dataset_id", "steps"}, {}, "apply_edits payload");
      require_string(p, "dataset_id");
      if (!p["steps"].is_array()) malformed("'steps' must be an array");
      break;
    case MessageKind::EditsApplied:
    case MessageKind::DatasetChanged:
      check_fields(p, {"dataset_id", "revision"}, {}, std::string(to_string(kind)) + " payload");
      require_string(p, "dataset_id");
      if (!is_uint(p["revision"])) malformed("'revision' must be a non-negative integer");
      break;
    case MessageKind::Error:
      check_fields(p, {"code", "detail"}, {}, "error payload");
      require_string(p, "code");
      require_string(p, "detail");
      break;
  }
}

}  // namespace detail

/// Parses and validates envelope and payload shape. Throws MalformedMessage,
/// UnsupportedVersion or UnknownKind.
inline BridgeMessage decode_message(std::string_view text) {
  Json j = parse_json_lenient(text);
  if (j.is_discarded()) detail::malformed("not a JSON document");
  if (!j.is_object()) detail::malformed("message must be a JSON object");
  auto proto = j.find("protocol");
  if (proto == j.end() || !proto->is_string() || proto->get_ref<const std::string&>() != kProtocolName)
    detail::malformed("missing or wrong 'protocol'");
  auto ver = j.find("version");
  if (ver == j.end() || !ver->is_number_integer()) detail::malformed("missing or non-integer 'version'");
  if (ver->get<std::int64_t>() != kProtocolVersion) {
    auto got = std::to_string(ver->get<std::int64_t>());
    throw Error(Errc::UnsupportedVersion, "unsupported protocol version " + got, got);
  }
  auto id = j.find("id");
  if (id == j.end() || !detail::is_uint(*id)) detail::malformed("missing or invalid 'id'");
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) detail::malformed("missing or non-string 'kind'");
  auto kind = parse_message_kind(kind_it->get_ref<const std::string&>());
  if (!kind)
    throw Error(Errc::UnknownKind, "unknown kind '" + kind_it->get<std::string>() + "'", kind_it->get<std::string>());

  for (const auto& [k, _] : j.items())
    if (k != "protocol" && k != "version" && k != "id" && k != "reply_to" && k != "kind" && k != "payload")
      detail::malformed("unknown envelope field '" + k + "'");

  BridgeMessage m;
  m.id = id->get<std::uint64_t>();
  m.kind = *kind;
  if (auto rt = j.find("reply_to"); rt != j.end()) {
    if (!detail::is_uint(*rt)) detail::malformed("invalid 'reply_to'");
    m.reply_to = rt->get<std::uint64_t>();
  }
  auto payload = j.find("payload");
  if (payload == j.end()) detail::malformed("missing 'payload'");
  detail::validate_payload(*kind, *payload);
  m.payload = *payload;
  return m;
}

// ---------------------------------------------------------------------------
// Hub

using ConnId = std::uint64_t;

enum class ConnState { Connected, Ready };

struct ToolConn {
  ConnId conn = 0;
  std::string tool_id;
  ConnState state = ConnState::Connected;
  std::vector<DataFormat> accepts;
  std::optional<DataFormat> negotiated;
  std::set<std::string> features;
  std::set<std::string> subscribed;
  std::optional<std::uint64_t> last_id;
};

struct Outgoing {
  ConnId to = 0;
  BridgeMessage message;
};

/// Hub-side protocol state machine. Transport agnostic: feed it incoming
/// text per connection and deliver the returned messages in order. Not
/// synchronized; one session's messages must be handled one at a time.
///
/// A tool subscribes to a dataset by requesting its data or editing it;
/// `dataset_changed` then reaches it after edits from other connections.
class Hub {
 public:
  explicit Hub(Session& session, std::string session_name = "tablehub",
               std::set<DataFormat> supports = all_formats())
      : session_(session), session_name_(std::move(session_name)), supports_(std::move(supports)) {}

  ConnId connect() {
    ConnId id = ++next_conn_;
    conns_[id] = ToolConn{id};
    return id;
  }

  void disconnect(ConnId c) { conns_.erase(c); }

  bool connected(ConnId c) const { return conns_.count(c) > 0; }
  const ToolConn& connection(ConnId c) const { return conns_.at(c); }
  std::size_t connection_count() const { return conns_.size(); }

  Session& session() { return session_; }
  const std::string& session_name() const { return session_name_; }

  /// Decodes and handles one text message. Malformed input yields exactly one
  /// error reply; `reply_to` is set when the id could be recovered.
  std::vector<Outgoing> handle_text(ConnId c, std::string_view text) {
    BridgeMessage m;
    try {
      m = decode_message(text);
    } catch (const Error& e) {
      BridgeErrc code = e.code() == Errc::UnsupportedVersion ? BridgeErrc::UnsupportedVersion
                        : e.code() == Errc::UnknownKind      ? BridgeErrc::UnknownKind
                                                             : BridgeErrc::MalformedMessage;
      std::vector<Outgoing> out;
      out.push_back(error_to(c, recover_id(text), code, e.detail()));
      return out;
    }
    return handle_message(c, m);
  }

  std::vector<Outgoing> handle_message(ConnId c, const BridgeMessage& m) {
    std::vector<Outgoing> out;
    auto it = conns_.find(c);
    if (it == conns_.end()) return out;
    ToolConn& conn = it->second;

    if (conn.last_id && m.id <= *conn.last_id) {
      out.push_back(error_to(c, m.id, BridgeErrc::ProtocolViolation,
                             "message id " + std::to_string(m.id) + " does not increase"));
      return out;
    }
    conn.last_id = m.id;

    switch (m.kind) {
      case MessageKind::Hello:
        on_hello(conn, m, out);
        break;
      case MessageKind::RequestData:
        if (conn.state != ConnState::Ready) out.push_back(error_to(c, m.id, BridgeErrc::NotReady, "send hello first"));
        else on_request_data(conn, m, out);
        break;
      case MessageKind::ApplyEdits:
        if (conn.state != ConnState::Ready) out.push_back(error_to(c, m.id, BridgeErrc::NotReady, "send hello first"));
        else on_apply_edits(conn, m, out);
        break;
      default:
        out.push_back(error_to(c, m.id, BridgeErrc::ProtocolViolation,
                               "'" + std::string(to_string(m.kind)) + "' is sent by the hub, not by tools"));
    }
    return out;
  }

  /// dataset_changed for every Ready subscriber except `origin`.
  std::vector<Outgoing> notify_changed(const std::string& dataset_id, std::optional<ConnId> origin = std::nullopt) {
    std::vector<Outgoing> out;
    if (!session_.has_dataset(dataset_id)) return out;
    auto revision = session_.dataset(dataset_id).revision;
    for (const auto& [id, conn] : conns_) {
      if (origin && id == *origin) continue;
      if (conn.state != ConnState::Ready || !conn.subscribed.count(dataset_id)) continue;
      Json p;
      p["dataset_id"] = dataset_id;
      p["revision"] = revision;
      out.push_back({id, BridgeMessage{next_id(), std::nullopt, MessageKind::DatasetChanged, std::move(p)}});
    }
    return out;
  }

 private:
  std::uint64_t next_id() { return ++next_msg_id_; }

  Outgoing reply(ConnId c, std::uint64_t to, MessageKind kind, Json payload) {
    return {c, BridgeMessage{next_id(), to, kind, std::move(payload)}};
  }

  Outgoing error_to(ConnId c, std::optional<std::uint64_t> to, BridgeErrc code, const std::string& detail) {
    Json p;
    p["code"] = std::string(to_string(code));
    p["detail"] = detail;
    return {c, BridgeMessage{next_id(), to, MessageKind::Error, std::move(p)}};
  }

  static std::optional<std::uint64_t> recover_id(std::string_view text) {
    Json j = parse_json_lenient(text);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    auto id = j.find("id");
    if (id == j.end() || !detail::is_uint(*id)) return std::nullopt;
    return id->get<std::uint64_t>();
  }

  Json dataset_summary(const std::string& id) const {
    const Dataset& d = session_.dataset(id);
    Json cols = Json::array();
    for (const auto& f : d.current.schema()) cols.push_back(Json{{"name", f.name}, {"dtype", std::string(to_string(f.dtype))}});
    Json j;
    j["id"] = d.id;
    j["name"] = d.name;
    j["n_rows"] = d.current.n_rows();
    j["columns"] = std::move(cols);
    return j;
  }

  void on_hello(ToolConn& conn, const BridgeMessage& m, std::vector<Outgoing>& out) {
    if (conn.state == ConnState::Ready) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::ProtocolViolation, "connection already completed hello"));
      return;
    }
    auto accepts_names = m.payload["accepts"].get<std::vector<std::string>>();
    DataFormat negotiated;
    try {
      negotiated = negotiate_format(accepts_names, supports_);
    } catch (const Error& e) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::NoCommonFormat, e.detail()));
      return;
    }
    conn.state = ConnState::Ready;
    conn.tool_id = m.payload["tool_id"].get<std::string>();
    conn.accepts.clear();
    for (const auto& n : accepts_names)
      if (auto f = parse_format(n); f && supports_.count(*f)) conn.accepts.push_back(*f);
    conn.negotiated = negotiated;
    conn.features.clear();
    if (m.payload.contains("features"))
      for (const auto& f : m.payload["features"]) conn.features.insert(f.get<std::string>());

    Json datasets = Json::array();
    for (const auto& id : session_.dataset_ids()) datasets.push_back(dataset_summary(id));
    Json p;
    p["session_name"] = session_name_;
    p["datasets"] = std::move(datasets);
    p["negotiated_format"] = std::string(to_string(negotiated));
    out.push_back(reply(conn.conn, m.id, MessageKind::Welcome, std::move(p)));
  }

  void on_request_data(ToolConn& conn, const BridgeMessage& m, std::vector<Outgoing>& out) {
    auto ds = m.payload["dataset_id"].get<std::string>();
    if (!session_.has_dataset(ds)) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::UnknownDataset, "unknown dataset '" + ds + "'"));
      return;
    }
    DataFormat format = *conn.negotiated;
    if (m.payload.contains("format")) {
      auto name = m.payload["format"].get<std::string>();
      auto f = parse_format(name);
      if (!f || !supports_.count(*f)) {
        out.push_back(error_to(conn.conn, m.id, BridgeErrc::NoCommonFormat, "format '" + name + "' is not supported"));
        return;
      }
      format = *f;
    }
    Payload payload = export_table(session_.dataset(ds).current, format);
    if (const AdapterSpec* a = session_.adapter_for(conn.tool_id); a && a->base == format) {
      try {
        payload = apply_adapter(payload, *a);
      } catch (const Error& e) {
        out.push_back(error_to(conn.conn, m.id, BridgeErrc::AdapterFailed, e.detail()));
        return;
      }
    }
    conn.subscribed.insert(ds);
    Json p;
    p["dataset_id"] = ds;
    p["format"] = std::string(to_string(format));
    p["payload"] = std::move(payload.document);
    out.push_back(reply(conn.conn, m.id, MessageKind::Data, std::move(p)));
  }

  void on_apply_edits(ToolConn& conn, const BridgeMessage& m, std::vector<Outgoing>& out) {
    if (!conn.features.count("edits")) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::Forbidden, "tool did not declare the 'edits' feature"));
      return;
    }
    auto ds = m.payload["dataset_id"].get<std::string>();
    if (!session_.has_dataset(ds)) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::UnknownDataset, "unknown dataset '" + ds + "'"));
      return;
    }
    std::uint64_t revision = 0;
    Pipeline steps;
    try {
      const auto& arr = m.payload["steps"];
      for (std::size_t i = 0; i < arr.size(); ++i) steps.push_back(step_from_json(arr[i], i));
      revision = session_.apply_steps(ds, steps);
    } catch (const Error& e) {
      out.push_back(error_to(conn.conn, m.id, BridgeErrc::BadTransform, e.what()));
      return;
    }
    conn.subscribed.insert(ds);
    Json p;
    p["dataset_id"] = ds;
    p["revision"] = revision;
    out.push_back(reply(conn.conn, m.id, MessageKind::EditsApplied, std::move(p)));
    if (steps.empty()) return;
    for (auto& o : notify_changed(ds, conn.conn)) out.push_back(std::move(o));
  }

  Session& session_;
  std::string session_name_;
  std::set<DataFormat> supports_;
  std::map<ConnId, ToolConn> conns_;
  ConnId next_conn_ = 0;
  std::uint64_t next_msg_id_ = 0;
};

}  // namespace tablehub
