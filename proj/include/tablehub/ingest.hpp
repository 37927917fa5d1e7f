#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/table.hpp"

namespace tablehub {

struct Dialect {
  char delimiter = ',';
  char quote = '"';
  bool has_header = true;
  friend bool operator==(const Dialect&, const Dialect&) = default;
};

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;  // rows x columns
};

/// Per-column count of non-empty cells that failed conversion.
struct IngestReport {
  std::vector<std::pair<std::string, std::size_t>> cast_failures;
  std::size_t total_failures() const {
    std::size_t n = 0;
    for (const auto& [_, k] : cast_failures) n += k;
    return n;
  }
};

inline constexpr std::array<char, 4> kCandidateDelimiters{',', ';', '\t', '|'};

inline std::string_view strip_bom(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  return text;
}

namespace detail {

/// Streaming RFC-4180 tokenizer. Blank lines between records are skipped.
class DelimitedScanner {
 public:
  DelimitedScanner(std::string_view text, char delimiter, char quote)
      : text_(text), delim_(delimiter), quote_(quote) {}

  /// Reads the next record into `fields`; false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    while (pos_ < text_.size() && at_newline()) consume_newline();
    if (pos_ >= text_.size()) return false;
    record_line_ = line_;

    std::string field;
    bool quoted_field = false;
    while (true) {
      if (pos_ >= text_.size()) {
        fields.push_back(std::move(field));
        return true;
      }
      char c = text_[pos_];
      if (c == quote_ && field.empty() && !quoted_field) {
        quoted_field = true;
        read_quoted(field);
        continue;
      }
      if (c == delim_) {
        ++pos_;
        fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
        continue;
      }
      if (at_newline()) {
        consume_newline();
        fields.push_back(std::move(field));
        return true;
      }
      field.push_back(c);
      ++pos_;
    }
  }

  std::size_t record_line() const { return record_line_; }

 private:
  bool at_newline() const {
    return text_[pos_] == '\n' ||
           (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n');
  }
  void consume_newline() {
    pos_ += text_[pos_] == '\r' ? 2 : 1;
    ++line_;
  }

  void read_quoted(std::string& field) {
    std::size_t open_line = line_;
    ++pos_;
    while (true) {
      if (pos_ >= text_.size())
        throw Error(Errc::UnterminatedQuote,
                    "unterminated quoted field starting on line " + std::to_string(open_line), {},
                    open_line);
      char c = text_[pos_];
      if (c == quote_) {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == quote_) {
          field.push_back(quote_);
          pos_ += 2;
          continue;
        }
        ++pos_;
        return;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
    }
  }

  std::string_view text_;
  char delim_;
  char quote_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

/// Splits up to `max_records` records on unquoted newlines, without
/// splitting fields. Unterminated quotes end the sample.
inline std::vector<std::string_view> sample_records(std::string_view text, char quote,
                                                    std::size_t max_records) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  bool in_quote = false;
  for (std::size_t i = 0; i < text.size() && out.size() < max_records; ++i) {
    char c = text[i];
    if (c == quote) {
      in_quote = !in_quote;
    } else if (c == '\n' && !in_quote) {
      std::size_t end = (i > start && text[i - 1] == '\r') ? i - 1 : i;
      if (end > start) out.push_back(text.substr(start, end - start));
      start = i + 1;
    }
  }
  if (out.size() < max_records && start < text.size() && !in_quote) {
    auto rest = text.substr(start);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    if (!rest.empty()) out.push_back(rest);
  }
  return out;
}

inline std::size_t count_unquoted(std::string_view record, char delim, char quote) {
  std::size_t n = 0;
  bool in_quote = false;
  for (char c : record) {
    if (c == quote) in_quote = !in_quote;
    else if (c == delim && !in_quote) ++n;
  }
  return n;
}

inline bool looks_numeric(std::string_view cell) {
  return parse_int(cell).has_value() || parse_float(cell).has_value();
}

}  // namespace detail

inline Dialect sniff_dialect(std::string_view text, std::size_t max_lines = 20) {
  text = strip_bom(text);
  auto records = detail::sample_records(text, '"', max_lines);
  if (records.empty()) throw Error(Errc::EmptyInput, "input contains no data");

  Dialect d;
  // Consistent candidates (same non-zero count on every sampled record) win
  // by count; otherwise fall back to the largest minimum count.
  std::optional<std::size_t> best_consistent;
  std::size_t best_min = 0;
  std::optional<char> fallback;
  for (char cand : kCandidateDelimiters) {
    std::vector<std::size_t> counts;
    for (auto r : records) counts.push_back(detail::count_unquoted(r, cand, '"'));
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    if (*lo == *hi && *lo > 0) {
      if (!best_consistent || *lo > *best_consistent) {
        best_consistent = *lo;
        d.delimiter = cand;
      }
    } else if (!best_consistent && *lo > best_min) {
      best_min = *lo;
      fallback = cand;
    }
  }
  if (!best_consistent && fallback) d.delimiter = *fallback;

  detail::DelimitedScanner scanner(text, d.delimiter, d.quote);
  std::vector<std::string> first, second;
  bool have_first = false, have_second = false;
  try {
    have_first = scanner.next(first);
    have_second = have_first && scanner.next(second);
  } catch (const Error&) {
    // A malformed sample still yields a dialect; parsing reports the error.
  }
  if (!have_second) {
    d.has_header = true;
  } else {
    bool first_numeric = std::any_of(first.begin(), first.end(), detail::looks_numeric);
    bool second_numeric = std::any_of(second.begin(), second.end(), detail::looks_numeric);
    d.has_header = !first_numeric && second_numeric;
  }
  return d;
}

inline RawTable parse_delimited(std::string_view text, const Dialect& d) {
  if (d.delimiter == d.quote || d.delimiter == '\n' || d.delimiter == '\r')
    throw Error(Errc::SyntaxError, "invalid dialect");
  text = strip_bom(text);
  RawTable raw;
  detail::DelimitedScanner scanner(text, d.delimiter, d.quote);
  std::vector<std::string> fields;
  bool header_done = false;
  while (scanner.next(fields)) {
    if (!header_done) {
      header_done = true;
      if (d.has_header) {
        raw.header = fields;
        for (std::size_t i = 0; i < raw.header.size(); ++i)
          if (raw.header[i].empty()) raw.header[i] = "col_" + std::to_string(i + 1);
        continue;
      }
      for (std::size_t i = 0; i < fields.size(); ++i)
        raw.header.push_back("col_" + std::to_string(i + 1));
    }
    if (fields.size() > raw.header.size())
      throw Error(Errc::RaggedRow,
                  "line " + std::to_string(scanner.record_line()) + " has " +
                      std::to_string(fields.size()) + " cells, header has " +
                      std::to_string(raw.header.size()),
                  {}, scanner.record_line());
    fields.resize(raw.header.size());
    raw.cells.push_back(std::move(fields));
    fields = {};
  }
  return raw;
}

inline DType infer_dtype(std::span<const std::string> cells, std::size_t sample_limit = 1000) {
  bool is_int = true, is_float = true, is_bool = true, is_date = true;
  std::size_t sampled = 0;
  for (const auto& c : cells) {
    if (c.empty()) continue;
    if (sampled++ >= sample_limit) break;
    if (is_int && !parse_int(c)) is_int = false;
    if (is_float && !parse_float(c)) is_float = false;
    if (is_bool && !parse_bool(c)) is_bool = false;
    if (is_date && !parse_date(c)) is_date = false;
    if (!is_int && !is_float && !is_bool && !is_date) break;
  }
  if (sampled == 0) return DType::Text;
  if (is_int) return DType::Int;
  if (is_float) return DType::Float;
  if (is_bool) return DType::Bool;
  if (is_date) return DType::Date;
  return DType::Text;
}

namespace detail {

inline std::optional<Value> parse_cell(const std::string& s, DType t) {
  if (s.empty()) return Value{Null{}};
  switch (t) {
    case DType::Int:
      if (auto x = parse_int(s)) return Value{*x};
      break;
    case DType::Float:
      if (auto x = parse_float(s)) return Value{*x};
      break;
    case DType::Bool:
      if (auto x = parse_bool(s)) return Value{*x};
      break;
    case DType::Date:
      if (auto x = parse_date(s)) return Value{*x};
      break;
    case DType::Text:
      return Value{s};
  }
  return std::nullopt;
}

}  // namespace detail

inline Table finalize(const RawTable& raw, const std::optional<Schema>& schema = std::nullopt,
                      IngestReport* report = nullptr) {
  std::vector<DType> dtypes(raw.header.size(), DType::Text);
  if (schema) {
    std::unordered_map<std::string_view, DType> by_name;
    for (const auto& f : *schema) by_name.emplace(f.name, f.dtype);
    std::unordered_set<std::string_view> header_set(raw.header.begin(), raw.header.end());
    bool same = by_name.size() == schema->size() && header_set.size() == raw.header.size() &&
                by_name.size() == header_set.size();
    for (const auto& h : raw.header) same = same && by_name.count(h) > 0;
    if (!same) throw Error(Errc::SchemaMismatch, "schema names do not match the header");
    for (std::size_t c = 0; c < raw.header.size(); ++c) dtypes[c] = by_name.at(raw.header[c]);
  }

  std::vector<Column> cols;
  cols.reserve(raw.header.size());
  std::vector<std::string> column_cells;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (!schema) {
      column_cells.clear();
      column_cells.reserve(raw.cells.size());
      for (const auto& row : raw.cells) column_cells.push_back(row[c]);
      dtypes[c] = infer_dtype(column_cells);
    }
    Column col{raw.header[c], dtypes[c], {}};
    col.values.reserve(raw.cells.size());
    std::size_t failures = 0;
    for (const auto& row : raw.cells) {
      if (auto v = detail::parse_cell(row[c], dtypes[c])) {
        col.values.push_back(std::move(*v));
      } else {
        col.values.emplace_back(Null{});
        ++failures;
      }
    }
    if (report && failures > 0) report->cast_failures.emplace_back(col.name, failures);
    cols.push_back(std::move(col));
  }
  return Table::from_columns(std::move(cols));
}

namespace detail {

/// Column dtype for structured input: Int and Float unify to Float; any other
/// mix falls back to Text.
inline DType unify_json_dtypes(const std::vector<Value>& values) {
  std::optional<DType> t;
  for (const auto& v : values) {
    auto d = dtype_of(v);
    if (!d) continue;
    if (!t) t = d;
    else if (*t != *d) {
      if (is_numeric(*t) && is_numeric(*d)) t = DType::Float;
      else return DType::Text;
    }
  }
  return t.value_or(DType::Text);
}

inline Column structured_column(std::string name, std::vector<Value> values) {
  DType t = unify_json_dtypes(values);
  Column c{std::move(name), t, {}};
  c.values.reserve(values.size());
  for (auto& v : values) {
    if (auto d = dtype_of(v); d && *d != t)
      c.values.push_back(*convert_value(v, t));
    else
      c.values.push_back(std::move(v));
  }
  return c;
}

}  // namespace detail

/// Accepts an array of flat records or a map of column name to array.
inline Table parse_structured(std::string_view text) {
  text = strip_bom(text);
  Json doc = parse_json_lenient(text);
  if (doc.is_discarded()) throw Error(Errc::MalformedDocument, "input is not a valid JSON document");

  if (doc.is_array()) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Value>> data;
    std::size_t n = doc.size();
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = doc[r];
      if (!rec.is_object())
        throw Error(Errc::UnsupportedShape, "array element " + std::to_string(r) + " is not an object",
                    {}, r);
      for (const auto& [key, val] : rec.items()) {
        auto v = json_to_value(val);
        if (!v)
          throw Error(Errc::NestedValue,
                      "nested value at row " + std::to_string(r) + ", key '" + key + "'", key, r);
        auto it = data.find(key);
        if (it == data.end()) {
          order.push_back(key);
          it = data.emplace(key, std::vector<Value>(n, Value{Null{}})).first;
        }
        it->second[r] = std::move(*v);
      }
    }
    std::vector<Column> cols;
    for (const auto& name : order) cols.push_back(detail::structured_column(name, std::move(data[name])));
    return Table::from_columns(std::move(cols));
  }

  if (doc.is_object()) {
    std::vector<Column> cols;
    std::optional<std::size_t> rows;
    for (const auto& [key, arr] : doc.items()) {
      if (!arr.is_array())
        throw Error(Errc::UnsupportedShape, "member '" + key + "' is not an array", key);
      if (rows && arr.size() != *rows)
        throw Error(Errc::LengthMismatch, "column '" + key + "' has a different length", key);
      rows = arr.size();
      std::vector<Value> values;
      values.reserve(arr.size());
      for (std::size_t r = 0; r < arr.size(); ++r) {
        auto v = json_to_value(arr[r]);
        if (!v)
          throw Error(Errc::NestedValue,
                      "nested value at row " + std::to_string(r) + ", key '" + key + "'", key, r);
        values.push_back(std::move(*v));
      }
      cols.push_back(detail::structured_column(key, std::move(values)));
    }
    return Table::from_columns(std::move(cols));
  }

  throw Error(Errc::UnsupportedShape, "top level must be an array of records or an object of arrays");
}

/// Sniff, parse, and infer in one step.
inline Table read_delimited(std::string_view text, std::optional<Dialect> dialect = std::nullopt,
                            IngestReport* report = nullptr) {
  Dialect d = dialect ? *dialect : sniff_dialect(text);
  return finalize(parse_delimited(text, d), std::nullopt, report);
}

}  // namespace tablehub
