#include "../support/gen.hpp"
#include "../support/helpers.hpp"
#include "../support/oracle.hpp"

using namespace tablehub;

namespace {

Table sales4() {
  return tbl({{"region", DType::Text, {T("N"), T("N"), T("S"), T("S")}},
              {"product", DType::Text, {T("p"), T("q"), T("p"), T("q")}},
              {"sales", DType::Int, {I(1), I(2), I(3), I(4)}}});
}

PivotSpec sum_spec(bool totals) { return {{"region"}, {"product"}, "sales", AggFn::Sum, totals}; }

}  // namespace

TEST(Pivot, SumWithTotals) {
  auto r = pivot(sales4(), sum_spec(true));
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_TRUE(values_equal(r.cells[0], {I(1), I(2)}));
  EXPECT_TRUE(values_equal(r.cells[1], {I(3), I(4)}));
  EXPECT_TRUE(values_equal(*r.row_totals, {I(3), I(7)}));
  EXPECT_TRUE(values_equal(*r.col_totals, {I(4), I(6)}));
  EXPECT_TRUE(values_equal({*r.grand_total}, {I(10)}));
}

TEST(Pivot, EmptyIntersectionsAreNull) {
  auto t = tbl({{"region", DType::Text, {T("N"), T("S")}},
                {"product", DType::Text, {T("p"), T("q")}},
                {"sales", DType::Int, {I(1), I(2)}}});
  auto r = pivot(t, sum_spec(false));
  EXPECT_TRUE(values_equal(r.cells[0], {I(1), N}));
  EXPECT_TRUE(values_equal(r.cells[1], {N, I(2)}));
  EXPECT_FALSE(r.row_totals.has_value());
  EXPECT_FALSE(r.grand_total.has_value());
}

TEST(Pivot, CountWithoutMeasure) {
  auto r = pivot(sales4(), {{"region"}, {"product"}, std::nullopt, AggFn::Count, false});
  EXPECT_TRUE(values_equal(r.cells[0], {I(1), I(1)}));
  EXPECT_TRUE(values_equal(r.cells[1], {I(1), I(1)}));
  auto sparse = tbl({{"a", DType::Text, {T("x"), T("y")}}, {"b", DType::Text, {T("u"), T("v")}}});
  auto c = pivot(sparse, {{"a"}, {"b"}, std::nullopt, AggFn::Count, false});
  EXPECT_TRUE(values_equal(c.cells[0], {I(1), I(0)}));
}

TEST(Pivot, HeadersSortedNullLast) {
  auto t = tbl({{"k", DType::Int, {I(3), N, I(1), I(3)}}, {"v", DType::Int, {I(1), I(1), I(1), I(1)}}});
  auto r = pivot(t, {{"k"}, {}, std::nullopt, AggFn::Count, false});
  ASSERT_EQ(r.row_headers.size(), 3u);
  EXPECT_TRUE(values_equal({r.row_headers[0][0], r.row_headers[1][0], r.row_headers[2][0]}, {I(1), I(3), N}));
  ASSERT_EQ(r.col_headers.size(), 1u);
  EXPECT_TRUE(r.col_headers[0].empty());
}

TEST(Pivot, MeanTotalsAreTrueMeans) {
  auto t = tbl({{"g", DType::Text, {T("a"), T("a"), T("b")}}, {"v", DType::Int, {I(1), I(2), I(6)}}});
  auto r = pivot(t, {{"g"}, {}, "v", AggFn::Mean, true});
  EXPECT_TRUE(values_equal({*r.grand_total}, {F(3.0)}));
  EXPECT_EQ(r.value_dtype, DType::Float);
}

TEST(Pivot, Validation) {
  auto t = sales4();
  EXPECT_EQ(error_of([&] { pivot(t, {{"region"}, {"region"}, std::nullopt, AggFn::Count, false}); }),
            Errc::ValidationFailed);
  EXPECT_EQ(error_of([&] { pivot(t, {{"zz"}, {}, std::nullopt, AggFn::Count, false}); }), Errc::ValidationFailed);
  EXPECT_EQ(error_of([&] { pivot(t, {{"region"}, {}, std::nullopt, AggFn::Sum, false}); }), Errc::ValidationFailed);
  EXPECT_EQ(error_of([&] { pivot(t, {{"region"}, {}, "zz", AggFn::Sum, false}); }), Errc::ValidationFailed);
  EXPECT_EQ(error_of([&] { pivot(t, {{"region"}, {}, "product", AggFn::Sum, false}); }), Errc::ValidationFailed);
}

TEST(PivotToTable, FlattenWithTotals) {
  auto flat = pivot_to_table(pivot(sales4(), sum_spec(true)));
  auto want = tbl({{"region", DType::Text, {T("N"), T("S"), T("(total)")}},
                   {"p", DType::Int, {I(1), I(3), I(4)}},
                   {"q", DType::Int, {I(2), I(4), I(6)}},
                   {"total", DType::Int, {I(3), I(7), I(10)}}});
  EXPECT_TRUE(tables_equal(flat, want));
  EXPECT_EQ(export_csv(flat), "region,p,q,total\nN,1,2,3\nS,3,4,7\n(total),4,6,10\n");
}

TEST(PivotToTable, CountWithoutTotals) {
  auto flat = pivot_to_table(pivot(sales4(), {{"region"}, {"product"}, std::nullopt, AggFn::Count, false}));
  auto want = tbl({{"region", DType::Text, {T("N"), T("S")}},
                   {"p", DType::Int, {I(1), I(1)}},
                   {"q", DType::Int, {I(1), I(1)}}});
  EXPECT_TRUE(tables_equal(flat, want));
}

TEST(PivotToTable, EmptyTableKeepsDimColumns) {
  auto t = tbl({{"region", DType::Text, {}}, {"product", DType::Text, {}}, {"sales", DType::Int, {}}});
  auto flat = pivot_to_table(pivot(t, sum_spec(false)));
  EXPECT_EQ(flat.names(), (std::vector<std::string>{"region"}));
  EXPECT_EQ(flat.n_rows(), 0u);
}

TEST(PivotToTable, ColumnNaming) {
  auto t = tbl({{"r", DType::Text, {T("x"), T("x"), T("x"), T("x")}},
                {"a", DType::Text, {T("u"), T(""), N, T("u")}},
                {"b", DType::Int, {I(1), I(2), I(3), I(1)}}});
  auto flat = pivot_to_table(pivot(t, {{"r"}, {"a", "b"}, std::nullopt, AggFn::Count, false}));
  EXPECT_EQ(flat.names(), (std::vector<std::string>{"r", "(empty)/2", "u/1", "(null)/3"}));
  auto dup = tbl({{"r", DType::Text, {T("x")}}, {"c", DType::Text, {T("r")}}});
  EXPECT_EQ(pivot_to_table(pivot(dup, {{"r"}, {"c"}, std::nullopt, AggFn::Count, false})).names(),
            (std::vector<std::string>{"r", "r_2"}));
  auto only_rows = pivot_to_table(pivot(dup, {{"r"}, {}, std::nullopt, AggFn::Count, false}));
  EXPECT_EQ(only_rows.names(), (std::vector<std::string>{"r", "value"}));
}

// Property: every cell and total matches a nested-loop scan.
TEST(PivotProperty, MatchesBruteForce) {
  gen::Rng r(51);
  for (int i = 0; i < 200; ++i) {
    auto n = static_cast<std::size_t>(r.range(0, 200));
    auto mt = r.chance(0.5) ? DType::Int : DType::Float;
    auto t = Table::from_columns({gen::gen_dim(r, "d1", n), gen::gen_dim(r, "d2", n), gen::gen_dim(r, "d3", n),
                                  gen::gen_measure(r, "m", n, mt)});
    PivotSpec spec;
    std::vector<std::string> dims{"d1", "d2", "d3"};
    for (const auto& d : dims) {
      auto where = r.index(3);
      if (where == 0) spec.row_dims.push_back(d);
      else if (where == 1) spec.col_dims.push_back(d);
    }
    spec.agg = r.pick(std::vector<AggFn>{AggFn::Count, AggFn::Sum, AggFn::Mean, AggFn::Min, AggFn::Max});
    if (spec.agg != AggFn::Count || r.chance(0.5)) spec.measure = "m";
    spec.totals = r.chance(0.6);
    auto got = pivot(t, spec);
    ASSERT_EQ(oracle::compare_pivot(oracle::pivot(t, spec), got, spec.totals), "") << i;
  }
}

// Property: with sum and totals, grand == sum(row totals) == sum(col totals).
TEST(PivotProperty, SumTotalsAreConsistent) {
  gen::Rng r(52);
  for (int i = 0; i < 150; ++i) {
    auto n = static_cast<std::size_t>(r.range(1, 120));
    auto t = Table::from_columns({gen::gen_dim(r, "a", n), gen::gen_dim(r, "b", n), gen::gen_measure(r, "m", n, DType::Int)});
    auto res = pivot(t, {{"a"}, {"b"}, "m", AggFn::Sum, true});
    auto sum = [](const std::vector<Value>& vs) {
      std::int64_t s = 0;
      bool any = false;
      for (const auto& v : vs)
        if (auto p = std::get_if<std::int64_t>(&v)) s += *p, any = true;
      return any ? Value{s} : Value{Null{}};
    };
    ASSERT_TRUE(values_equal({sum(*res.row_totals)}, {*res.grand_total}));
    ASSERT_TRUE(values_equal({sum(*res.col_totals)}, {*res.grand_total}));
  }
}

// Property: no column dims reduces to GroupAggregate (up to row order).
TEST(PivotProperty, NoColumnDimsIsGroupAggregate) {
  gen::Rng r(53);
  for (int i = 0; i < 150; ++i) {
    auto n = static_cast<std::size_t>(r.range(0, 80));
    auto t = Table::from_columns({gen::gen_dim(r, "a", n), gen::gen_dim(r, "b", n), gen::gen_measure(r, "m", n, DType::Float)});
    auto fn = r.pick(std::vector<AggFn>{AggFn::Count, AggFn::Sum, AggFn::Mean, AggFn::Min, AggFn::Max});
    auto res = pivot(t, {{"a", "b"}, {}, "m", fn, false});
    auto grouped = apply_transform(t, Sort{{{"a", true}, {"b", true}}});
    grouped = apply_transform(grouped, GroupAggregate{{"a", "b"}, {{"out", fn, "m"}}});
    ASSERT_EQ(grouped.n_rows(), res.row_headers.size());
    for (std::size_t k = 0; k < grouped.n_rows(); ++k) {
      ASSERT_TRUE(values_equal(res.row_headers[k], {grouped.cell(k, 0), grouped.cell(k, 1)}));
      ASSERT_TRUE(values_equal({res.cells[k][0]}, {grouped.cell(k, 2)}));
    }
  }
}
