#pragma once

// Golden bridge transcripts. A transcript file sets up a session and then
// lists connection events, messages sent by tools, and the exact messages the
// hub must emit in response, byte for byte.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tablehub/tablehub.hpp"

namespace transcript {

using namespace tablehub;

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Structural match honouring key order and the int/float distinction.
/// Returns "" on match, otherwise the first differing path.
inline std::string match(const Json& want, const Json& got, const std::string& path = "$") {
  if (want.type() != got.type() && !(want.is_number_integer() && got.is_number_integer()))
    return path + ": expected " + write_json(want) + ", got " + write_json(got);
  if (want.is_object()) {
    if (want.size() != got.size()) return path + ": expected " + write_json(want) + ", got " + write_json(got);
    auto wi = want.begin();
    auto gi = got.begin();
    for (; wi != want.end(); ++wi, ++gi) {
      if (wi.key() != gi.key()) return path + ": expected key '" + wi.key() + "', got '" + gi.key() + "'";
      if (auto d = match(wi.value(), gi.value(), path + "." + wi.key()); !d.empty()) return d;
    }
    return "";
  }
  if (want.is_array()) {
    if (want.size() != got.size()) return path + ": expected " + write_json(want) + ", got " + write_json(got);
    for (std::size_t i = 0; i < want.size(); ++i)
      if (auto d = match(want[i], got[i], path + "[" + std::to_string(i) + "]"); !d.empty()) return d;
    return "";
  }
  return want == got ? "" : path + ": expected " + write_json(want) + ", got " + write_json(got);
}

inline AdapterSpec adapter_from(const Json& j) {
  AdapterSpec a;
  a.tool_id = j.at("tool_id").get<std::string>();
  a.base = *parse_format(j.at("base").get<std::string>());
  if (j.contains("renames"))
    for (const auto& r : j["renames"]) a.field_renames.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::string>());
  if (j.contains("wrap_key")) a.wrap_key = j["wrap_key"].get<std::string>();
  return a;
}

struct Result {
  std::size_t exchanges = 0;
  std::string failure;  // empty on success
};

/// Replays one transcript document against a fresh hub.
inline Result run(const Json& doc) {
  Result res;
  Session session;
  for (const auto& d : doc.value("datasets", Json::array()))
    session.load_dataset(d.at("name").get<std::string>(), read_delimited(d.at("csv").get<std::string>()));
  for (const auto& a : doc.value("adapters", Json::array())) session.register_adapter(adapter_from(a));
  std::set<DataFormat> supports = all_formats();
  if (doc.contains("supports")) {
    supports.clear();
    for (const auto& f : doc["supports"]) supports.insert(*parse_format(f.get<std::string>()));
  }
  Hub hub(session, doc.value("session_name", std::string("tablehub")), supports);

  std::map<std::int64_t, ConnId> conns;
  const auto& script = doc.at("script");
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& ev = script[i];
    std::string where = "event " + std::to_string(i) + ": ";
    if (ev.contains("connect")) {
      conns[ev["connect"].get<std::int64_t>()] = hub.connect();
      continue;
    }
    if (ev.contains("disconnect")) {
      hub.disconnect(conns.at(ev["disconnect"].get<std::int64_t>()));
      continue;
    }
    ConnId from = conns.at(ev.at("from").get<std::int64_t>());
    std::string text = ev.contains("raw") ? ev["raw"].get<std::string>() : write_json(ev.at("send"));
    auto out = hub.handle_text(from, text);
    const auto& expect = ev.at("expect");
    if (out.size() != expect.size()) {
      res.failure = where + "expected " + std::to_string(expect.size()) + " messages, got " + std::to_string(out.size());
      for (const auto& o : out) res.failure += "\n  " + encode_message(o.message);
      return res;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      ConnId to = conns.at(expect[k].at("to").get<std::int64_t>());
      auto text_out = encode_message(out[k].message);
      if (out[k].to != to) {
        res.failure = where + "message " + std::to_string(k) + " went to the wrong connection: " + text_out;
        return res;
      }
      try {
        decode_message(text_out);
      } catch (const Error& e) {
        res.failure = where + "hub emitted an invalid message: " + e.what();
        return res;
      }
      if (auto d = match(expect[k].at("message"), Json::parse(text_out)); !d.empty()) {
        res.failure = where + "message " + std::to_string(k) + ": " + d;
        return res;
      }
      if (write_json(expect[k].at("message")) != text_out) {
        res.failure = where + "message " + std::to_string(k) + " differs in bytes: " + text_out;
        return res;
      }
    }
    ++res.exchanges;
  }
  return res;
}

inline std::vector<std::filesystem::path> files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace transcript
