#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/value.hpp"

namespace tablehub {

struct Column {
  std::string name;
  DType dtype = DType::Text;
  std::vector<Value> values;

  std::size_t size() const { return values.size(); }
  std::size_t null_count() const {
    std::size_t n = 0;
    for (const auto& v : values) n += is_null(v) ? 1 : 0;
    return n;
  }
};

inline bool same_values(const Column& a, const Column& b) {
  if (a.name != b.name || a.dtype != b.dtype || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_value(a.values[i], b.values[i])) return false;
  return true;
}

struct Field {
  std::string name;
  DType dtype;
  friend bool operator==(const Field&, const Field&) = default;
};

using Schema = std::vector<Field>;

/// Column names are non-empty and free of control characters.
inline bool valid_column_name(std::string_view name) {
  if (name.empty()) return false;
  for (unsigned char c : name)
    if (c < 0x20 || c == 0x7f) return false;
  return true;
}

/// Immutable columnar table. Columns are shared between tables derived from
/// one another, so copies and single-cell edits are cheap.
class Table {
 public:
  Table() = default;

  /// Validates every table invariant; throws on the first violation.
  static Table from_columns(std::vector<Column> columns) {
    Table t;
    std::unordered_set<std::string_view> seen;
    std::optional<std::size_t> rows;
    for (const auto& c : columns) {
      if (!valid_column_name(c.name))
        throw Error(Errc::InvalidName, "invalid column name '" + c.name + "'", c.name);
      if (!seen.insert(c.name).second)
        throw Error(Errc::DuplicateColumn, "duplicate column '" + c.name + "'", c.name);
      if (rows && c.size() != *rows)
        throw Error(Errc::LengthMismatch,
                    "column '" + c.name + "' has " + std::to_string(c.size()) +
                        " values, expected " + std::to_string(*rows),
                    c.name);
      rows = c.size();
      for (std::size_t r = 0; r < c.size(); ++r)
        if (!matches(c.values[r], c.dtype))
          throw Error(Errc::TypeViolation,
                      "value " + describe(c.values[r]) + " in column '" + c.name +
                          "' row " + std::to_string(r) + " is not " +
                          std::string(to_string(c.dtype)),
                      c.name, r);
    }
    t.n_rows_ = rows.value_or(0);
    t.columns_.reserve(columns.size());
    for (auto& c : columns) t.columns_.push_back(std::make_shared<const Column>(std::move(c)));
    return t;
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  const Column& column(std::size_t i) const { return *columns_.at(i); }

  const Column& column(std::string_view name) const { return *columns_[require_index(name)]; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i]->name == name) return i;
    return std::nullopt;
  }

  std::size_t require_index(std::string_view name) const {
    auto i = index_of(name);
    if (!i) throw Error(Errc::UnknownColumn, "unknown column '" + std::string(name) + "'",
                        std::string(name));
    return *i;
  }

  bool has_column(std::string_view name) const { return index_of(name).has_value(); }

  Schema schema() const {
    Schema s;
    s.reserve(columns_.size());
    for (const auto& c : columns_) s.push_back({c->name, c->dtype});
    return s;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c->name);
    return out;
  }

  const Value& cell(std::size_t row, std::size_t col) const { return columns_[col]->values[row]; }

  /// Builds a table from already-validated shared columns.
  static Table from_shared(std::vector<std::shared_ptr<const Column>> cols, std::size_t rows) {
    Table t;
    t.columns_ = std::move(cols);
    t.n_rows_ = rows;
    return t;
  }

  const std::vector<std::shared_ptr<const Column>>& shared_columns() const { return columns_; }

  friend bool operator==(const Table& a, const Table& b) {
    if (a.n_rows_ != b.n_rows_ || a.n_cols() != b.n_cols()) return false;
    for (std::size_t i = 0; i < a.n_cols(); ++i)
      if (a.columns_[i] != b.columns_[i] && !same_values(*a.columns_[i], *b.columns_[i]))
        return false;
    return true;
  }

 private:
  std::vector<std::shared_ptr<const Column>> columns_;
  std::size_t n_rows_ = 0;
};

struct ColumnSpec {
  std::string name;
  DType dtype;
  std::vector<Value> values;
};

inline Table make_table(std::vector<ColumnSpec> specs) {
  std::vector<Column> cols;
  cols.reserve(specs.size());
  for (auto& s : specs) cols.push_back({std::move(s.name), s.dtype, std::move(s.values)});
  return Table::from_columns(std::move(cols));
}

/// Re-checks all invariants of an existing table.
inline void validate(const Table& t) {
  std::vector<Column> copy;
  for (std::size_t i = 0; i < t.n_cols(); ++i) copy.push_back(t.column(i));
  auto checked = Table::from_columns(std::move(copy));
  if (checked.n_rows() != t.n_rows() && t.n_cols() > 0)
    throw Error(Errc::LengthMismatch, "row count disagrees with column length");
}

struct CastResult {
  Column column;
  std::size_t failures = 0;
};

inline CastResult cast_column(const Column& col, DType target) {
  CastResult out{{col.name, target, {}}, 0};
  out.column.values.reserve(col.size());
  for (const auto& v : col.values) {
    if (auto converted = convert_value(v, target)) {
      out.column.values.push_back(std::move(*converted));
    } else {
      out.column.values.emplace_back(Null{});
      ++out.failures;
    }
  }
  return out;
}

inline const Value& get_cell(const Table& t, std::size_t row, std::string_view col) {
  auto c = t.require_index(col);
  if (row >= t.n_rows())
    throw Error(Errc::RowOutOfBounds,
                "row " + std::to_string(row) + " out of bounds (" + std::to_string(t.n_rows()) +
                    " rows)",
                std::string(col), row);
  return t.cell(row, c);
}

inline Table with_cell(const Table& t, std::size_t row, std::string_view col, const Value& v) {
  auto c = t.require_index(col);
  if (row >= t.n_rows())
    throw Error(Errc::RowOutOfBounds,
                "row " + std::to_string(row) + " out of bounds (" + std::to_string(t.n_rows()) +
                    " rows)",
                std::string(col), row);
  const Column& src = t.column(c);
  auto converted = convert_value(v, src.dtype);
  if (!converted)
    throw Error(Errc::TypeViolation,
                "cannot store " + describe(v) + " in " + std::string(to_string(src.dtype)) +
                    " column '" + src.name + "'",
                src.name, row);
  Column edited = src;
  edited.values[row] = std::move(*converted);
  auto cols = t.shared_columns();
  cols[c] = std::make_shared<const Column>(std::move(edited));
  return Table::from_shared(std::move(cols), t.n_rows());
}

}  // namespace tablehub
