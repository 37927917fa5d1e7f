#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/table.hpp"

namespace tablehub {

enum class AggFn { Count, Sum, Mean, Min, Max };

constexpr std::string_view to_string(AggFn f) {
  switch (f) {
    case AggFn::Count: return "count";
    case AggFn::Sum: return "sum";
    case AggFn::Mean: return "mean";
    case AggFn::Min: return "min";
    case AggFn::Max: return "max";
  }
  return "count";
}

inline std::optional<AggFn> parse_agg_fn(std::string_view s) {
  if (s == "count") return AggFn::Count;
  if (s == "sum") return AggFn::Sum;
  if (s == "mean") return AggFn::Mean;
  if (s == "min") return AggFn::Min;
  if (s == "max") return AggFn::Max;
  return std::nullopt;
}

/// Output dtype of an aggregate; throws ValidationFailed for unsupported
/// input types.
inline DType agg_result_dtype(AggFn fn, std::optional<DType> input) {
  switch (fn) {
    case AggFn::Count: return DType::Int;
    case AggFn::Mean:
      if (!input || !is_numeric(*input))
        throw Error(Errc::ValidationFailed, "mean requires a numeric column");
      return DType::Float;
    case AggFn::Sum:
      if (!input || !is_numeric(*input))
        throw Error(Errc::ValidationFailed, "sum requires a numeric column");
      return *input;
    case AggFn::Min:
    case AggFn::Max:
      if (!input) throw Error(Errc::ValidationFailed, std::string(to_string(fn)) + " requires a column");
      return *input;
  }
  return DType::Int;
}

/// Aggregates `col` over the given row indices. `count` counts rows; every
/// other function skips nulls and returns Null when nothing is left. Int sums
/// that overflow 64 bits yield Null.
inline Value aggregate(AggFn fn, const Column* col, std::span<const std::size_t> rows) {
  if (fn == AggFn::Count) return Value{static_cast<std::int64_t>(rows.size())};
  const auto& vals = col->values;
  switch (fn) {
    case AggFn::Sum:
    case AggFn::Mean: {
      std::size_t n = 0;
      if (col->dtype == DType::Int) {
        __int128 acc = 0;
        for (auto r : rows)
          if (auto* i = std::get_if<std::int64_t>(&vals[r])) acc += *i, ++n;
        if (n == 0) return Value{Null{}};
        if (fn == AggFn::Mean)
          return Value{static_cast<double>(static_cast<long double>(acc) / static_cast<long double>(n))};
        if (acc > INT64_MAX || acc < INT64_MIN) return Value{Null{}};
        return Value{static_cast<std::int64_t>(acc)};
      }
      double acc = 0;
      for (auto r : rows)
        if (auto* f = std::get_if<double>(&vals[r])) acc += *f, ++n;
      if (n == 0) return Value{Null{}};
      return Value{fn == AggFn::Mean ? acc / static_cast<double>(n) : acc};
    }
    case AggFn::Min:
    case AggFn::Max: {
      const Value* best = nullptr;
      for (auto r : rows) {
        const Value& v = vals[r];
        if (is_null(v)) continue;
        if (!best) best = &v;
        else {
          auto c = compare_values(v, *best);
          if ((fn == AggFn::Min && c < 0) || (fn == AggFn::Max && c > 0)) best = &v;
        }
      }
      return best ? *best : Value{Null{}};
    }
    default:
      return Value{Null{}};
  }
}

/// Byte key identifying a tuple of values; equal tuples (Null == Null) map
/// to equal keys.
inline void append_value_key(std::string& key, const Value& v) {
  key.push_back(static_cast<char>('0' + v.index()));
  switch (v.index()) {
    case 1: {
      auto i = std::get<std::int64_t>(v);
      key.append(reinterpret_cast<const char*>(&i), sizeof i);
      break;
    }
    case 2: {
      double d = std::get<double>(v);
      if (d == 0.0) d = 0.0;  // fold -0.0
      key.append(reinterpret_cast<const char*>(&d), sizeof d);
      break;
    }
    case 3: key.push_back(std::get<bool>(v) ? '1' : '0'); break;
    case 4: {
      const auto& s = std::get<std::string>(v);
      auto n = static_cast<std::uint64_t>(s.size());
      key.append(reinterpret_cast<const char*>(&n), sizeof n);
      key += s;
      break;
    }
    case 5: {
      auto d = std::get<Date>(v).days;
      key.append(reinterpret_cast<const char*>(&d), sizeof d);
      break;
    }
    default: break;
  }
}

inline std::string row_key(const Table& t, std::span<const std::size_t> cols, std::size_t row) {
  std::string key;
  for (auto c : cols) append_value_key(key, t.cell(row, c));
  return key;
}

/// Keeps the given rows in the given order.
inline Table take_rows(const Table& t, std::span<const std::size_t> rows) {
  std::vector<std::shared_ptr<const Column>> cols;
  cols.reserve(t.n_cols());
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    const Column& src = t.column(c);
    Column out{src.name, src.dtype, {}};
    out.values.reserve(rows.size());
    for (auto r : rows) out.values.push_back(src.values[r]);
    cols.push_back(std::make_shared<const Column>(std::move(out)));
  }
  return Table::from_shared(std::move(cols), rows.size());
}

}  // namespace tablehub
