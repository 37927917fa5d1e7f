#include <cmath>
#include <limits>

#include "../support/gen.hpp"
#include "../support/helpers.hpp"

using namespace tablehub;

TEST(MakeTable, BuildsTwoColumnTable) {
  auto t = tbl({{"a", DType::Int, {I(1), I(2)}}, {"b", DType::Text, {T("x"), T("y")}}});
  EXPECT_EQ(t.n_rows(), 2u);
  EXPECT_EQ(t.n_cols(), 2u);
  EXPECT_EQ(t.names(), (std::vector<std::string>{"a", "b"}));
}

TEST(MakeTable, LengthMismatchNamesColumn) {
  auto e = caught([] { tbl({{"a", DType::Int, {I(1)}}, {"b", DType::Int, {I(1), I(2)}}}); });
  EXPECT_EQ(e.code(), Errc::LengthMismatch);
  EXPECT_EQ(e.subject(), "b");
}

TEST(MakeTable, DuplicateColumn) {
  auto e = caught([] { tbl({{"a", DType::Int, {I(1)}}, {"a", DType::Int, {I(2)}}}); });
  EXPECT_EQ(e.code(), Errc::DuplicateColumn);
  EXPECT_EQ(e.subject(), "a");
}

TEST(MakeTable, TypeViolationReportsRowAndColumn) {
  auto e = caught([] { tbl({{"a", DType::Int, {I(1), T("x")}}}); });
  EXPECT_EQ(e.code(), Errc::TypeViolation);
  EXPECT_EQ(e.subject(), "a");
  EXPECT_EQ(e.location(), 1u);
}

TEST(MakeTable, ZeroColumnsHasZeroRows) {
  auto t = tbl({});
  EXPECT_EQ(t.n_rows(), 0u);
  EXPECT_EQ(t.n_cols(), 0u);
}

TEST(MakeTable, RejectsEmptyAndControlCharacterNames) {
  EXPECT_EQ(error_of([] { tbl({{"", DType::Int, {}}}); }), Errc::InvalidName);
  EXPECT_EQ(error_of([] { tbl({{"a\nb", DType::Int, {}}}); }), Errc::InvalidName);
  EXPECT_EQ(error_of([] { tbl({{"a\x7f", DType::Int, {}}}); }), Errc::InvalidName);
}

TEST(MakeTable, NamesAreCaseSensitive) {
  EXPECT_NO_THROW(tbl({{"a", DType::Int, {I(1)}}, {"A", DType::Int, {I(2)}}}));
}

TEST(CastColumn, TextToIntExact) {
  auto r = cast_column({"c", DType::Text, {T("1"), T("2")}}, DType::Int);
  EXPECT_TRUE(values_equal(r.column.values, {I(1), I(2)}));
  EXPECT_EQ(r.failures, 0u);
}

TEST(CastColumn, TextToIntFailuresBecomeNull) {
  auto r = cast_column({"c", DType::Text, {T("1.5"), T("2")}}, DType::Int);
  EXPECT_TRUE(values_equal(r.column.values, {N, I(2)}));
  EXPECT_EQ(r.failures, 1u);
}

TEST(CastColumn, IntToBool) {
  auto r = cast_column({"c", DType::Int, {I(1), I(0)}}, DType::Bool);
  EXPECT_TRUE(values_equal(r.column.values, {B(true), B(false)}));
  EXPECT_EQ(r.failures, 0u);
  auto bad = cast_column({"c", DType::Int, {I(2), N}}, DType::Bool);
  EXPECT_TRUE(values_equal(bad.column.values, {N, N}));
  EXPECT_EQ(bad.failures, 1u);
}

TEST(CastColumn, ConversionMatrix) {
  auto one = [](Value v, DType t) { return cast_column({"c", *dtype_of(v), {std::move(v)}}, t); };
  EXPECT_TRUE(values_equal(one(T("-12"), DType::Int).column.values, {I(-12)}));
  EXPECT_EQ(one(T(" 12"), DType::Int).failures, 1u);
  EXPECT_EQ(one(T("1e3"), DType::Int).failures, 1u);
  EXPECT_EQ(one(T("99999999999999999999"), DType::Int).failures, 1u);
  EXPECT_TRUE(values_equal(one(T("1e3"), DType::Float).column.values, {F(1000.0)}));
  EXPECT_TRUE(values_equal(one(T("-.5"), DType::Float).column.values, {F(-0.5)}));
  EXPECT_EQ(one(T("nan"), DType::Float).failures, 1u);
  EXPECT_EQ(one(T("0x10"), DType::Float).failures, 1u);
  EXPECT_TRUE(values_equal(one(T("TRUE"), DType::Bool).column.values, {B(true)}));
  EXPECT_TRUE(values_equal(one(T("False"), DType::Bool).column.values, {B(false)}));
  EXPECT_EQ(one(T("yes"), DType::Bool).failures, 1u);
  EXPECT_TRUE(values_equal(one(T("2024-02-29"), DType::Date).column.values, {D(2024, 2, 29)}));
  EXPECT_EQ(one(T("2023-02-29"), DType::Date).failures, 1u);
  EXPECT_EQ(one(T("2023-2-9"), DType::Date).failures, 1u);
  EXPECT_TRUE(values_equal(one(I(3), DType::Float).column.values, {F(3.0)}));
  EXPECT_TRUE(values_equal(one(F(3.0), DType::Int).column.values, {I(3)}));
  EXPECT_EQ(one(F(3.5), DType::Int).failures, 1u);
  EXPECT_EQ(one(F(1e30), DType::Int).failures, 1u);
  EXPECT_TRUE(values_equal(one(B(true), DType::Int).column.values, {I(1)}));
  EXPECT_TRUE(values_equal(one(F(0.1), DType::Text).column.values, {T("0.1")}));
  EXPECT_TRUE(values_equal(one(F(2.0), DType::Text).column.values, {T("2.0")}));
  EXPECT_TRUE(values_equal(one(D(2020, 1, 5), DType::Text).column.values, {T("2020-01-05")}));
  EXPECT_TRUE(values_equal(one(T(""), DType::Int).column.values, {N}));
  EXPECT_EQ(one(T(""), DType::Int).failures, 0u);
  EXPECT_EQ(one(I(5), DType::Date).failures, 1u);
}

TEST(GetCell, ReadsAndValidates) {
  auto t = tbl({{"a", DType::Int, {I(1), I(2)}}});
  EXPECT_TRUE(same_value(get_cell(t, 0, "a"), I(1)));
  EXPECT_EQ(error_of([&] { get_cell(t, 5, "a"); }), Errc::RowOutOfBounds);
  EXPECT_EQ(error_of([&] { get_cell(t, 0, "z"); }), Errc::UnknownColumn);
}

TEST(WithCell, ReplacesOneCellAndLeavesInputUnchanged) {
  auto t = tbl({{"a", DType::Int, {I(1), I(2)}}});
  auto u = with_cell(t, 0, "a", I(9));
  EXPECT_TRUE(values_equal(u.column(0).values, {I(9), I(2)}));
  EXPECT_TRUE(values_equal(t.column(0).values, {I(1), I(2)}));
  EXPECT_TRUE(values_equal(with_cell(t, 0, "a", N).column(0).values, {N, I(2)}));
  EXPECT_EQ(error_of([&] { with_cell(t, 0, "a", T("zz")); }), Errc::TypeViolation);
  EXPECT_EQ(error_of([&] { with_cell(t, 2, "a", I(1)); }), Errc::RowOutOfBounds);
  EXPECT_EQ(error_of([&] { with_cell(t, 0, "q", I(1)); }), Errc::UnknownColumn);
}

TEST(WithCell, CoercesThroughCastRules) {
  auto t = tbl({{"a", DType::Int, {I(1)}}, {"b", DType::Float, {F(1)}}});
  EXPECT_TRUE(values_equal(with_cell(t, 0, "a", T("42")).column(0).values, {I(42)}));
  EXPECT_TRUE(values_equal(with_cell(t, 0, "b", I(3)).column(1).values, {F(3.0)}));
}

TEST(WithCell, SharesUntouchedColumns) {
  auto t = tbl({{"a", DType::Int, {I(1)}}, {"b", DType::Int, {I(2)}}});
  auto u = with_cell(t, 0, "a", I(5));
  EXPECT_EQ(t.shared_columns()[1], u.shared_columns()[1]);
  EXPECT_NE(t.shared_columns()[0], u.shared_columns()[0]);
}

TEST(FormatFloat, CanonicalForms) {
  EXPECT_EQ(format_float(0.0), "0.0");
  EXPECT_EQ(format_float(-0.0), "-0.0");
  EXPECT_EQ(format_float(1.0), "1.0");
  EXPECT_EQ(format_float(0.1), "0.1");
  EXPECT_EQ(format_float(1.5), "1.5");
  EXPECT_EQ(format_float(-123.25), "-123.25");
  EXPECT_EQ(format_float(1e20), "100000000000000000000.0");
  EXPECT_EQ(format_float(1e21), "1e+21");
  EXPECT_EQ(format_float(1.5e-7), "0.00000015");
  EXPECT_EQ(format_float(1.5e-8), "1.5e-8");
  EXPECT_EQ(format_float(5e-324), "5e-324");
  EXPECT_EQ(format_float(1.7976931348623157e308), "1.7976931348623157e+308");
  EXPECT_EQ(format_float(0.30000000000000004), "0.30000000000000004");
}

TEST(FormatFloat, RoundTripsThroughParse) {
  gen::Rng r(7);
  for (int i = 0; i < 5000; ++i) {
    double x = gen::gen_float(r);
    auto back = parse_float(format_float(x));
    ASSERT_TRUE(back) << format_float(x);
    EXPECT_EQ(*back, x) << format_float(x);
    EXPECT_EQ(std::signbit(*back), std::signbit(x));
  }
}

TEST(ParseText, DatesAndInts) {
  EXPECT_EQ(format_date(*parse_date("1970-01-01")), "1970-01-01");
  EXPECT_EQ(parse_date("1970-01-01")->days, 0);
  EXPECT_EQ(parse_date("1969-12-31")->days, -1);
  EXPECT_FALSE(parse_date("1970-13-01"));
  EXPECT_FALSE(parse_date("70-01-01"));
  EXPECT_FALSE(parse_date("1970-01-01T00:00"));
  EXPECT_EQ(parse_int("+7"), 7);
  EXPECT_EQ(parse_int("-9223372036854775808"), std::numeric_limits<std::int64_t>::min());
  EXPECT_FALSE(parse_int("9223372036854775808"));
  EXPECT_FALSE(parse_int("-"));
  EXPECT_FALSE(parse_int(""));
}

// Property: editing a cell and writing the old value back restores the table.
TEST(TableProperty, CellEditIsInvertible) {
  gen::Rng r(11);
  for (int i = 0; i < 300; ++i) {
    auto t = gen::gen_table(r, {.max_rows = 20});
    if (t.n_rows() == 0) continue;
    auto row = r.index(t.n_rows());
    const auto& col = t.column(r.index(t.n_cols()));
    auto v = gen::gen_value(r, col.dtype);
    auto edited = with_cell(t, row, col.name, v);
    validate(edited);
    auto restored = with_cell(edited, row, col.name, get_cell(t, row, col.name));
    ASSERT_TRUE(tables_equal(restored, t));
  }
}

// Property: Int/Bool/Date columns survive a cast to Text and back.
TEST(TableProperty, CastThroughTextRoundTrips) {
  gen::Rng r(12);
  for (DType t : {DType::Int, DType::Bool, DType::Date}) {
    for (int i = 0; i < 100; ++i) {
      Column c{"c", t, {}};
      for (int k = 0; k < 30; ++k) c.values.push_back(gen::gen_value(r, t, 0.0));
      auto text = cast_column(c, DType::Text);
      EXPECT_EQ(text.failures, 0u);
      auto back = cast_column(text.column, t);
      EXPECT_EQ(back.failures, 0u);
      EXPECT_TRUE(values_equal(back.column.values, c.values));
    }
  }
}

TEST(CompareValues, OrdersMixedNumericAndNulls) {
  EXPECT_TRUE(compare_values(I(1), F(1.5)) < 0);
  EXPECT_TRUE(compare_values(F(2.0), I(2)) == 0);
  EXPECT_TRUE(compare_values(I(std::numeric_limits<std::int64_t>::max()), F(9.2233720368547758e18)) < 0);
  EXPECT_TRUE(compare_nulls_last(N, I(1)) > 0);
  EXPECT_TRUE(compare_nulls_last(I(1), N) < 0);
  EXPECT_TRUE(compare_values(T("a"), T("b")) < 0);
  EXPECT_TRUE(compare_values(D(2020, 1, 1), D(2019, 12, 31)) > 0);
  EXPECT_TRUE(compare_values(B(false), B(true)) < 0);
}
