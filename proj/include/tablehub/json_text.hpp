#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tablehub/value.hpp"

namespace tablehub {

/// Insertion-ordered JSON document; key order is part of the wire format.
using Json = nlohmann::ordered_json;

namespace detail {

inline void write_json_string(std::string& out, std::string_view s) {
  static constexpr char hex[] = "0123456789abcdef";
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          out += "\\u00";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xf]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

inline void write_json_to(std::string& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
    case Json::value_t::discarded:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::number_float: {
      double d = j.get<double>();
      out += std::isfinite(d) ? format_float(d) : "null";
      break;
    }
    case Json::value_t::string:
      write_json_string(out, j.get_ref<const std::string&>());
      break;
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& e : j) {
        if (!first) out.push_back(',');
        first = false;
        write_json_to(out, e);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out.push_back(',');
        first = false;
        write_json_string(out, k);
        out.push_back(':');
        write_json_to(out, v);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::binary:
      out += "null";
      break;
  }
}

}  // namespace detail

/// Compact canonical serialization. Floats use the same shortest round-trip
/// rendering as every other export path; strings pass bytes through except
/// for mandatory escapes, so invalid UTF-8 never throws.
inline std::string write_json(const Json& j) {
  std::string out;
  detail::write_json_to(out, j);
  return out;
}

inline Json value_to_json(const Value& v) {
  switch (v.index()) {
    case 1: return std::get<std::int64_t>(v);
    case 2: {
      double d = std::get<double>(v);
      return std::isfinite(d) ? Json(d) : Json(nullptr);
    }
    case 3: return std::get<bool>(v);
    case 4: return std::get<std::string>(v);
    case 5: return format_date(std::get<Date>(v));
    default: return nullptr;
  }
}

/// Maps a JSON scalar to a Value; integer literals within int64 range become
/// Int, every other number Float. Returns nullopt for arrays and objects.
inline std::optional<Value> json_to_value(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return Value{Null{}};
    case Json::value_t::boolean: return Value{j.get<bool>()};
    case Json::value_t::number_integer: return Value{j.get<std::int64_t>()};
    case Json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(INT64_MAX)) return Value{static_cast<std::int64_t>(u)};
      return Value{static_cast<double>(u)};
    }
    case Json::value_t::number_float: return Value{j.get<double>()};
    case Json::value_t::string: return Value{j.get<std::string>()};
    default: return std::nullopt;
  }
}

/// Parses without throwing on malformed input; returns a discarded value on
/// failure.
inline Json parse_json_lenient(std::string_view text) {
  return Json::parse(text.begin(), text.end(), nullptr, false);
}

}  // namespace tablehub
