#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/ingest.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/table.hpp"

namespace tablehub {

enum class DataFormat { RowRecords, ColumnMap, Matrix, Csv };

inline constexpr DataFormat kAllFormats[] = {DataFormat::RowRecords, DataFormat::ColumnMap, DataFormat::Matrix,
                                             DataFormat::Csv};

constexpr std::string_view to_string(DataFormat f) {
  switch (f) {
    case DataFormat::RowRecords: return "row_records";
    case DataFormat::ColumnMap: return "column_map";
    case DataFormat::Matrix: return "matrix";
    case DataFormat::Csv: return "csv";
  }
  return "csv";
}

inline std::optional<DataFormat> parse_format(std::string_view s) {
  for (auto f : kAllFormats)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// An exported table. Structured formats hold a JSON document; Csv holds the
/// text as a JSON string (until an adapter wraps it).
struct Payload {
  DataFormat format = DataFormat::Csv;
  Json document;
};

/// Wire/file bytes of a payload: raw text for unwrapped Csv, canonical JSON
/// otherwise.
inline std::string payload_text(const Payload& p) {
  if (p.format == DataFormat::Csv && p.document.is_string()) return p.document.get<std::string>();
  return write_json(p.document);
}

namespace detail {

inline bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline void append_csv_field(std::string& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

/// One record; an all-empty single-field record is written as `""` so it
/// is not read back as a blank line.
inline void append_csv_record(std::string& out, std::span<const std::string> fields) {
  if (fields.size() == 1 && fields[0].empty()) {
    out += "\"\"\n";
    return;
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    append_csv_field(out, fields[i]);
  }
  out.push_back('\n');
}

}  // namespace detail

inline std::string export_csv(const Table& t) {
  std::string out;
  if (t.n_cols() == 0) return out;
  auto names = t.names();
  detail::append_csv_record(out, names);
  std::vector<std::string> fields(t.n_cols());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) fields[c] = render_text(t.cell(r, c)).value_or("");
    detail::append_csv_record(out, fields);
  }
  return out;
}

inline Payload export_table(const Table& t, DataFormat f) {
  Payload p{f, {}};
  switch (f) {
    case DataFormat::RowRecords: {
      p.document = Json::array();
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        Json rec = Json::object();
        for (std::size_t c = 0; c < t.n_cols(); ++c) rec[t.column(c).name] = value_to_json(t.cell(r, c));
        p.document.push_back(std::move(rec));
      }
      break;
    }
    case DataFormat::ColumnMap: {
      p.document = Json::object();
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        Json arr = Json::array();
        for (const auto& v : t.column(c).values) arr.push_back(value_to_json(v));
        p.document[t.column(c).name] = std::move(arr);
      }
      break;
    }
    case DataFormat::Matrix: {
      p.document = Json::array();
      Json header = Json::array();
      for (const auto& n : t.names()) header.push_back(n);
      p.document.push_back(std::move(header));
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < t.n_cols(); ++c) row.push_back(value_to_json(t.cell(r, c)));
        p.document.push_back(std::move(row));
      }
      break;
    }
    case DataFormat::Csv:
      p.document = export_csv(t);
      break;
  }
  return p;
}

/// First entry of the tool's list (by name) that the hub supports; unknown
/// names are skipped.
inline DataFormat negotiate_format(std::span<const std::string> tool_accepts, const std::set<DataFormat>& hub_supports) {
  for (const auto& name : tool_accepts) {
    auto f = parse_format(name);
    if (f && hub_supports.count(*f)) return *f;
  }
  throw Error(Errc::NoCommonFormat, "no format in the tool's list is supported by the hub");
}

inline std::set<DataFormat> all_formats() { return {std::begin(kAllFormats), std::end(kAllFormats)}; }

struct AdapterSpec {
  std::string tool_id;
  DataFormat base = DataFormat::RowRecords;
  std::vector<std::pair<std::string, std::string>> field_renames;
  std::optional<std::string> wrap_key;
};

namespace detail {

inline Json rename_object_keys(const Json& obj, const std::unordered_map<std::string, std::string>& renames) {
  Json out = Json::object();
  for (const auto& [k, v] : obj.items()) {
    auto it = renames.find(k);
    out[it == renames.end() ? k : it->second] = v;
  }
  return out;
}

[[noreturn]] inline void unknown_field(const std::string& name) {
  throw Error(Errc::UnknownField, "adapter renames unknown field '" + name + "'", name);
}

}  // namespace detail

/// Applies declarative renames and optional wrapping to a payload exported
/// with `spec.base`.
inline Payload apply_adapter(const Payload& payload, const AdapterSpec& spec) {
  std::unordered_map<std::string, std::string> renames(spec.field_renames.begin(), spec.field_renames.end());
  Payload out = payload;

  if (!renames.empty()) {
    switch (payload.format) {
      case DataFormat::RowRecords: {
        const auto& recs = payload.document;
        if (!recs.empty()) {
          for (const auto& [from, _] : spec.field_renames)
            if (!recs.front().contains(from)) detail::unknown_field(from);
        }
        out.document = Json::array();
        for (const auto& rec : recs) out.document.push_back(detail::rename_object_keys(rec, renames));
        break;
      }
      case DataFormat::ColumnMap:
        for (const auto& [from, _] : spec.field_renames)
          if (!payload.document.contains(from)) detail::unknown_field(from);
        out.document = detail::rename_object_keys(payload.document, renames);
        break;
      case DataFormat::Matrix: {
        auto& header = out.document.at(0);
        for (const auto& [from, _] : spec.field_renames) {
          bool found = false;
          for (const auto& h : header) found = found || h.get<std::string>() == from;
          if (!found) detail::unknown_field(from);
        }
        for (auto& h : header) {
          auto it = renames.find(h.get<std::string>());
          if (it != renames.end()) h = it->second;
        }
        break;
      }
      case DataFormat::Csv: {
        auto raw = parse_delimited(payload.document.get<std::string>(), Dialect{',', '"', true});
        for (const auto& [from, _] : spec.field_renames)
          if (std::find(raw.header.begin(), raw.header.end(), from) == raw.header.end()) detail::unknown_field(from);
        for (auto& h : raw.header) {
          auto it = renames.find(h);
          if (it != renames.end()) h = it->second;
        }
        std::string text;
        if (!raw.header.empty()) {
          detail::append_csv_record(text, raw.header);
          for (const auto& row : raw.cells) detail::append_csv_record(text, row);
        }
        out.document = std::move(text);
        break;
      }
    }
  }

  if (spec.wrap_key) {
    Json wrapped = Json::object();
    wrapped[*spec.wrap_key] = std::move(out.document);
    out.document = std::move(wrapped);
  }
  return out;
}

}  // namespace tablehub
