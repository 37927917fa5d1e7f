#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tablehub/aggregate.hpp"
#include "tablehub/error.hpp"
#include "tablehub/table.hpp"

namespace tablehub {

struct PivotSpec {
  std::vector<std::string> row_dims;
  std::vector<std::string> col_dims;
  std::optional<std::string> measure;
  AggFn agg = AggFn::Count;
  bool totals = false;
};

using Tuple = std::vector<Value>;

struct PivotResult {
  std::vector<std::string> row_dim_names;
  std::vector<std::string> col_dim_names;
  std::vector<Tuple> row_headers;
  std::vector<Tuple> col_headers;
  std::vector<std::vector<Value>> cells;  // row_headers x col_headers
  std::optional<std::vector<Value>> row_totals;
  std::optional<std::vector<Value>> col_totals;
  std::optional<Value> grand_total;
  DType value_dtype = DType::Int;
};

inline constexpr std::string_view kTotalLabel = "(total)";

namespace detail {

inline std::strong_ordering compare_tuples(const Tuple& a, const Tuple& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (auto c = compare_nulls_last(a[i], b[i]); c != 0) return c;
  return a.size() <=> b.size();
}

/// Distinct tuples of `dims` present in `t`, sorted ascending (nulls last),
/// and each row's position in that order.
struct Axis {
  std::vector<Tuple> headers;
  std::vector<std::size_t> row_slot;
};

inline Axis build_axis(const Table& t, const std::vector<std::size_t>& dims) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> first_row, raw_slot(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    auto [it, fresh] = index.try_emplace(row_key(t, dims, r), first_row.size());
    if (fresh) first_row.push_back(r);
    raw_slot[r] = it->second;
  }
  std::vector<Tuple> tuples;
  for (auto r : first_row) {
    Tuple tup;
    for (auto d : dims) tup.push_back(t.cell(r, d));
    tuples.push_back(std::move(tup));
  }
  std::vector<std::size_t> order(tuples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return compare_tuples(tuples[a], tuples[b]) < 0; });
  std::vector<std::size_t> rank(order.size());
  Axis axis;
  for (std::size_t i = 0; i < order.size(); ++i) {
    rank[order[i]] = i;
    axis.headers.push_back(tuples[order[i]]);
  }
  axis.row_slot.resize(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) axis.row_slot[r] = rank[raw_slot[r]];
  return axis;
}

}  // namespace detail

inline PivotResult pivot(const Table& t, const PivotSpec& spec) {
  auto resolve = [&](const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
      auto i = t.index_of(n);
      if (!i) throw Error(Errc::ValidationFailed, "unknown pivot dimension '" + n + "'", n);
      if (std::find(idx.begin(), idx.end(), *i) != idx.end())
        throw Error(Errc::ValidationFailed, "dimension '" + n + "' listed twice", n);
      idx.push_back(*i);
    }
    return idx;
  };
  auto rows = resolve(spec.row_dims);
  auto cols = resolve(spec.col_dims);
  for (auto r : rows)
    if (std::find(cols.begin(), cols.end(), r) != cols.end())
      throw Error(Errc::ValidationFailed, "'" + t.column(r).name + "' is both a row and a column dimension",
                  t.column(r).name);

  const Column* measure = nullptr;
  if (spec.measure) {
    auto m = t.index_of(*spec.measure);
    if (!m) throw Error(Errc::ValidationFailed, "unknown measure '" + *spec.measure + "'", *spec.measure);
    measure = &t.column(*m);
  } else if (spec.agg != AggFn::Count) {
    throw Error(Errc::ValidationFailed, std::string(to_string(spec.agg)) + " requires a measure");
  }

  PivotResult out;
  out.row_dim_names = spec.row_dims;
  out.col_dim_names = spec.col_dims;
  out.value_dtype = agg_result_dtype(spec.agg, measure ? std::optional{measure->dtype} : std::nullopt);

  auto row_axis = detail::build_axis(t, rows);
  auto col_axis = detail::build_axis(t, cols);
  out.row_headers = row_axis.headers;
  out.col_headers = col_axis.headers;

  std::size_t nr = out.row_headers.size(), nc = out.col_headers.size();
  std::vector<std::vector<std::vector<std::size_t>>> buckets(nr, std::vector<std::vector<std::size_t>>(nc));
  std::vector<std::vector<std::size_t>> by_row(nr), by_col(nc);
  std::vector<std::size_t> all(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    auto ri = row_axis.row_slot[r], ci = col_axis.row_slot[r];
    buckets[ri][ci].push_back(r);
    by_row[ri].push_back(r);
    by_col[ci].push_back(r);
    all[r] = r;
  }

  out.cells.assign(nr, std::vector<Value>(nc));
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out.cells[i][j] = aggregate(spec.agg, measure, buckets[i][j]);

  if (spec.totals) {
    out.row_totals.emplace();
    out.col_totals.emplace();
    for (const auto& b : by_row) out.row_totals->push_back(aggregate(spec.agg, measure, b));
    for (const auto& b : by_col) out.col_totals->push_back(aggregate(spec.agg, measure, b));
    out.grand_total = aggregate(spec.agg, measure, all);
  }
  return out;
}

/// Flattens a pivot grid into a table: row-dimension columns rendered as
/// text, one column per column-header tuple (values joined with "/"), and a
/// "total" column plus "(total)" row when totals are present.
inline Table pivot_to_table(const PivotResult& r) {
  std::vector<Column> out;
  std::unordered_set<std::string> used;
  auto unique_name = [&](std::string name) {
    for (auto& ch : name)
      if (static_cast<unsigned char>(ch) < 0x20 || ch == 0x7f) ch = ' ';
    std::string candidate = name;
    for (int k = 2; used.count(candidate); ++k) candidate = name + "_" + std::to_string(k);
    used.insert(candidate);
    return candidate;
  };
  bool totals = r.grand_total.has_value();
  std::size_t nr = r.row_headers.size();

  for (std::size_t d = 0; d < r.row_dim_names.size(); ++d) {
    Column c{unique_name(r.row_dim_names[d]), DType::Text, {}};
    for (const auto& h : r.row_headers) {
      auto s = render_text(h[d]);
      c.values.push_back(s ? Value{*s} : Value{Null{}});
    }
    if (totals) c.values.emplace_back(std::string(kTotalLabel));
    out.push_back(std::move(c));
  }
  for (std::size_t j = 0; j < r.col_headers.size(); ++j) {
    std::string name;
    for (std::size_t d = 0; d < r.col_headers[j].size(); ++d) {
      if (d) name += "/";
      auto part = render_text(r.col_headers[j][d]).value_or("(null)");
      name += part.empty() ? "(empty)" : part;
    }
    if (name.empty()) name = "value";
    Column c{unique_name(name), r.value_dtype, {}};
    for (std::size_t i = 0; i < nr; ++i) c.values.push_back(r.cells[i][j]);
    if (totals) c.values.push_back((*r.col_totals)[j]);
    out.push_back(std::move(c));
  }
  if (totals) {
    Column c{unique_name("total"), r.value_dtype, {}};
    for (std::size_t i = 0; i < nr; ++i) c.values.push_back((*r.row_totals)[i]);
    c.values.push_back(*r.grand_total);
    out.push_back(std::move(c));
  }
  return Table::from_columns(std::move(out));
}

}  // namespace tablehub
