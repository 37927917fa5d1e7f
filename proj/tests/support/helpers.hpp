#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tablehub/tablehub.hpp"

namespace th = tablehub;

inline th::Value I(std::int64_t x) { return th::Value{x}; }
inline th::Value F(double x) { return th::Value{x}; }
inline th::Value B(bool x) { return th::Value{x}; }
inline th::Value T(std::string x) { return th::Value{std::move(x)}; }
inline th::Value D(int y, unsigned m, unsigned d) { return th::Value{*th::Date::from_ymd(y, m, d)}; }
inline const th::Value N{th::Null{}};

inline th::Table tbl(std::vector<th::ColumnSpec> cols) { return th::make_table(std::move(cols)); }

/// Code of the tablehub::Error thrown by `f`, or nullopt if it returned.
template <class Fn>
std::optional<th::Errc> error_of(Fn&& f) {
  try {
    f();
  } catch (const th::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

template <class Fn>
th::Error caught(Fn&& f) {
  try {
    f();
  } catch (const th::Error& e) {
    return e;
  }
  throw std::runtime_error("expected a tablehub::Error");
}

inline ::testing::AssertionResult values_equal(const std::vector<th::Value>& got, const std::vector<th::Value>& want) {
  if (got.size() != want.size())
    return ::testing::AssertionFailure() << "size " << got.size() << " != " << want.size();
  for (std::size_t i = 0; i < got.size(); ++i)
    if (!th::same_value(got[i], want[i]) || got[i].index() != want[i].index())
      return ::testing::AssertionFailure() << "at " << i << ": " << th::describe(got[i]) << " != " << th::describe(want[i]);
  return ::testing::AssertionSuccess();
}

inline ::testing::AssertionResult tables_equal(const th::Table& got, const th::Table& want) {
  if (got == want) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "\n got: " << th::payload_text(th::export_table(got, th::DataFormat::Matrix))
                                       << "\nwant: " << th::payload_text(th::export_table(want, th::DataFormat::Matrix));
}
