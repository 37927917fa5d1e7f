#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "tablehub/aggregate.hpp"
#include "tablehub/error.hpp"
#include "tablehub/expr.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/table.hpp"

namespace tablehub {

struct Filter {
  std::string pred;
};
struct Derive {
  std::string name;
  std::string expr;
};
struct Select {
  std::vector<std::string> names;
};
struct Drop {
  std::vector<std::string> names;
};
struct RenamePair {
  std::string from;
  std::string to;
};
struct Rename {
  std::vector<RenamePair> pairs;
};
struct SortKey {
  std::string name;
  bool ascending = true;
};
struct Sort {
  std::vector<SortKey> keys;
};
struct Fold {
  std::vector<std::string> cols;
  std::string key_name;
  std::string value_name;
};
struct Spread {
  std::string key_col;
  std::string value_col;
};
struct Aggregation {
  std::string out_name;
  AggFn fn = AggFn::Count;
  std::optional<std::string> col;
};
struct GroupAggregate {
  std::vector<std::string> by;
  std::vector<Aggregation> aggs;
};
struct EditCell {
  std::size_t row = 0;
  std::string col;
  Value value;
};
struct DeleteRows {
  std::vector<std::size_t> indices;
};
struct SetType {
  std::string col;
  DType dtype = DType::Text;
};

using Transform = std::variant<Filter, Derive, Select, Drop, Rename, Sort, Fold, Spread, GroupAggregate,
                               EditCell, DeleteRows, SetType>;
using Pipeline = std::vector<Transform>;

/// Non-fatal findings collected while applying steps.
struct Diagnostics {
  std::vector<std::string> warnings;
  std::size_t cast_failures = 0;
};

namespace detail {

inline void require_new_name(const Table& t, const std::string& name, std::string_view what) {
  if (!valid_column_name(name))
    throw Error(Errc::InvalidName, std::string(what) + " '" + name + "' is not a valid column name", name);
  if (t.has_column(name))
    throw Error(Errc::NameCollision, std::string(what) + " '" + name + "' collides with an existing column", name);
}

inline std::vector<std::size_t> require_distinct_columns(const Table& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    idx.push_back(t.require_index(n));
    if (!seen.insert(n).second) throw Error(Errc::DuplicateColumn, "column '" + n + "' listed twice", n);
  }
  return idx;
}

inline Table apply(const Table& t, const Filter& f, Diagnostics*) {
  auto e = parse_expr(f.pred);
  if (auto ty = typecheck(*e, t.schema()); ty != DType::Bool)
    throw Error(Errc::ValidationFailed,
                "filter predicate '" + f.pred + "' has type " + std::string(to_string(ty)) + ", expected bool");
  auto mask = eval_expr(*e, t);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.n_rows(); ++r)
    if (auto* b = std::get_if<bool>(&mask.values[r]); b && *b) keep.push_back(r);
  return take_rows(t, keep);
}

inline Table apply(const Table& t, const Derive& d, Diagnostics*) {
  require_new_name(t, d.name, "derived column");
  auto e = parse_expr(d.expr);
  auto col = eval_expr(*e, t, d.name);
  auto cols = t.shared_columns();
  cols.push_back(std::make_shared<const Column>(std::move(col)));
  return Table::from_shared(std::move(cols), t.n_rows());
}

inline Table apply(const Table& t, const Select& s, Diagnostics*) {
  auto idx = require_distinct_columns(t, s.names);
  std::vector<std::shared_ptr<const Column>> cols;
  for (auto i : idx) cols.push_back(t.shared_columns()[i]);
  return Table::from_shared(std::move(cols), cols.empty() ? 0 : t.n_rows());
}

inline Table apply(const Table& t, const Drop& d, Diagnostics*) {
  auto idx = require_distinct_columns(t, d.names);
  std::set<std::size_t> gone(idx.begin(), idx.end());
  std::vector<std::shared_ptr<const Column>> cols;
  for (std::size_t i = 0; i < t.n_cols(); ++i)
    if (!gone.count(i)) cols.push_back(t.shared_columns()[i]);
  return Table::from_shared(std::move(cols), cols.empty() ? 0 : t.n_rows());
}

inline Table apply(const Table& t, const Rename& r, Diagnostics*) {
  std::vector<std::string> names = t.names();
  std::unordered_set<std::string_view> sources;
  for (const auto& p : r.pairs) {
    auto i = t.require_index(p.from);
    if (!sources.insert(p.from).second)
      throw Error(Errc::DuplicateColumn, "column '" + p.from + "' renamed twice", p.from);
    if (!valid_column_name(p.to))
      throw Error(Errc::InvalidName, "'" + p.to + "' is not a valid column name", p.to);
    names[i] = p.to;
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) throw Error(Errc::NameCollision, "rename produces duplicate column '" + n + "'", n);
  std::vector<std::shared_ptr<const Column>> cols;
  for (std::size_t i = 0; i < t.n_cols(); ++i) {
    if (names[i] == t.column(i).name) {
      cols.push_back(t.shared_columns()[i]);
    } else {
      Column c = t.column(i);
      c.name = names[i];
      cols.push_back(std::make_shared<const Column>(std::move(c)));
    }
  }
  return Table::from_shared(std::move(cols), t.n_rows());
}

inline Table apply(const Table& t, const Sort& s, Diagnostics*) {
  std::vector<std::pair<std::size_t, bool>> keys;
  for (const auto& k : s.keys) keys.emplace_back(t.require_index(k.name), k.ascending);
  std::vector<std::size_t> order(t.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (auto [c, asc] : keys) {
      const Value& x = t.cell(a, c);
      const Value& y = t.cell(b, c);
      bool nx = is_null(x), ny = is_null(y);
      if (nx || ny) {
        if (nx == ny) continue;
        return ny;  // nulls last in either direction
      }
      auto cmp = compare_values(x, y);
      if (cmp == 0) continue;
      return asc ? cmp < 0 : cmp > 0;
    }
    return false;
  });
  return take_rows(t, order);
}

inline Table apply(const Table& t, const Fold& f, Diagnostics* diag) {
  if (f.cols.empty()) throw Error(Errc::ValidationFailed, "fold needs at least one column");
  auto folded = require_distinct_columns(t, f.cols);
  std::set<std::size_t> folded_set(folded.begin(), folded.end());
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < t.n_cols(); ++i)
    if (!folded_set.count(i)) kept.push_back(i);

  for (const auto* n : {&f.key_name, &f.value_name}) {
    if (!valid_column_name(*n)) throw Error(Errc::InvalidName, "'" + *n + "' is not a valid column name", *n);
    for (auto k : kept)
      if (t.column(k).name == *n)
        throw Error(Errc::NameCollision, "fold output '" + *n + "' collides with a kept column", *n);
  }
  if (f.key_name == f.value_name)
    throw Error(Errc::NameCollision, "fold key and value names are equal", f.key_name);

  DType value_type = t.column(folded[0]).dtype;
  bool text_fallback = false;
  for (auto c : folded) {
    DType d = t.column(c).dtype;
    if (d == value_type) continue;
    if (is_numeric(d) && is_numeric(value_type)) value_type = DType::Float;
    else text_fallback = true;
  }
  if (text_fallback) {
    value_type = DType::Text;
    if (diag) diag->warnings.push_back("fold: mixed column types folded as text");
  }

  std::size_t n_out = t.n_rows() * folded.size();
  std::vector<Column> out;
  for (auto k : kept) {
    Column c{t.column(k).name, t.column(k).dtype, {}};
    c.values.reserve(n_out);
    out.push_back(std::move(c));
  }
  Column key{f.key_name, DType::Text, {}}, value{f.value_name, value_type, {}};
  key.values.reserve(n_out);
  value.values.reserve(n_out);
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (auto c : folded) {
      for (std::size_t j = 0; j < kept.size(); ++j) out[j].values.push_back(t.cell(r, kept[j]));
      key.values.emplace_back(t.column(c).name);
      value.values.push_back(convert_value(t.cell(r, c), value_type).value_or(Value{Null{}}));
    }
  }
  out.push_back(std::move(key));
  out.push_back(std::move(value));
  return Table::from_columns(std::move(out));
}

inline Table apply(const Table& t, const Spread& s, Diagnostics*) {
  auto kc = t.require_index(s.key_col);
  auto vc = t.require_index(s.value_col);
  if (kc == vc) throw Error(Errc::ValidationFailed, "spread key and value columns must differ");
  std::vector<std::size_t> group_cols;
  for (std::size_t i = 0; i < t.n_cols(); ++i)
    if (i != kc && i != vc) group_cols.push_back(i);

  std::vector<std::string> key_names;
  std::unordered_map<std::string, std::size_t> key_index;
  std::vector<std::size_t> group_first_row;
  std::unordered_map<std::string, std::size_t> group_index;
  std::vector<std::vector<std::optional<std::size_t>>> cell_row;  // group x key -> source row

  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    auto name = render_text(t.cell(r, kc));
    if (!name) throw Error(Errc::ValidationFailed, "spread key is null at row " + std::to_string(r), s.key_col, r);
    auto [kit, new_key] = key_index.try_emplace(*name, key_names.size());
    if (new_key) {
      if (!valid_column_name(*name))
        throw Error(Errc::InvalidName, "spread key '" + *name + "' is not a valid column name", *name, r);
      for (auto g : group_cols)
        if (t.column(g).name == *name)
          throw Error(Errc::NameCollision, "spread key '" + *name + "' collides with a column", *name, r);
      key_names.push_back(*name);
      for (auto& row : cell_row) row.emplace_back();
    }
    auto [git, new_group] = group_index.try_emplace(row_key(t, group_cols, r), group_first_row.size());
    if (new_group) {
      group_first_row.push_back(r);
      cell_row.emplace_back(key_names.size());
    }
    auto& slot = cell_row[git->second][kit->second];
    if (slot)
      throw Error(Errc::DuplicateSpreadKey,
                  "duplicate key '" + *name + "' in group starting at row " + std::to_string(group_first_row[git->second]),
                  *name, r);
    slot = r;
  }

  std::vector<Column> out;
  for (auto g : group_cols) {
    Column c{t.column(g).name, t.column(g).dtype, {}};
    for (auto r : group_first_row) c.values.push_back(t.cell(r, g));
    out.push_back(std::move(c));
  }
  DType vt = t.column(vc).dtype;
  for (std::size_t k = 0; k < key_names.size(); ++k) {
    Column c{key_names[k], vt, {}};
    for (std::size_t g = 0; g < group_first_row.size(); ++g) {
      auto src = cell_row[g][k];
      c.values.push_back(src ? t.cell(*src, vc) : Value{Null{}});
    }
    out.push_back(std::move(c));
  }
  return Table::from_columns(std::move(out));
}

inline Table apply(const Table& t, const GroupAggregate& g, Diagnostics*) {
  auto by = require_distinct_columns(t, g.by);
  std::unordered_set<std::string_view> out_names(g.by.begin(), g.by.end());
  std::vector<const Column*> inputs;
  std::vector<DType> out_types;
  for (const auto& a : g.aggs) {
    if (!valid_column_name(a.out_name))
      throw Error(Errc::InvalidName, "'" + a.out_name + "' is not a valid column name", a.out_name);
    if (!out_names.insert(a.out_name).second)
      throw Error(Errc::NameCollision, "aggregate output '" + a.out_name + "' collides", a.out_name);
    const Column* in = nullptr;
    if (a.col) in = &t.column(*a.col);
    else if (a.fn != AggFn::Count)
      throw Error(Errc::ValidationFailed, std::string(to_string(a.fn)) + " needs an input column", a.out_name);
    out_types.push_back(agg_result_dtype(a.fn, in ? std::optional{in->dtype} : std::nullopt));
    inputs.push_back(in);
  }

  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    auto [it, fresh] = index.try_emplace(row_key(t, by, r), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(r);
  }

  std::vector<Column> out;
  for (auto b : by) {
    Column c{t.column(b).name, t.column(b).dtype, {}};
    for (const auto& rows : groups) c.values.push_back(t.cell(rows.front(), b));
    out.push_back(std::move(c));
  }
  for (std::size_t a = 0; a < g.aggs.size(); ++a) {
    Column c{g.aggs[a].out_name, out_types[a], {}};
    for (const auto& rows : groups) c.values.push_back(aggregate(g.aggs[a].fn, inputs[a], rows));
    out.push_back(std::move(c));
  }
  return Table::from_columns(std::move(out));
}

inline Table apply(const Table& t, const EditCell& e, Diagnostics*) { return with_cell(t, e.row, e.col, e.value); }

inline Table apply(const Table& t, const DeleteRows& d, Diagnostics*) {
  std::vector<bool> drop(t.n_rows(), false);
  for (auto i : d.indices) {
    if (i >= t.n_rows())
      throw Error(Errc::RowOutOfBounds, "row " + std::to_string(i) + " out of bounds", {}, i);
    drop[i] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.n_rows(); ++r)
    if (!drop[r]) keep.push_back(r);
  return take_rows(t, keep);
}

inline Table apply(const Table& t, const SetType& s, Diagnostics* diag) {
  auto i = t.require_index(s.col);
  auto cast = cast_column(t.column(i), s.dtype);
  if (diag) {
    diag->cast_failures += cast.failures;
    if (cast.failures)
      diag->warnings.push_back("set_type: " + std::to_string(cast.failures) + " cells of '" + s.col +
                               "' became null");
  }
  auto cols = t.shared_columns();
  cols[i] = std::make_shared<const Column>(std::move(cast.column));
  return Table::from_shared(std::move(cols), t.n_rows());
}

}  // namespace detail

/// Applies one step. Throws (leaving `t` untouched) when the step does not
/// validate against the table.
inline Table apply_transform(const Table& t, const Transform& tr, Diagnostics* diag = nullptr) {
  return std::visit([&](const auto& step) { return detail::apply(t, step, diag); }, tr);
}

inline Table apply_pipeline(const Table& t, const Pipeline& p, Diagnostics* diag = nullptr) {
  Table cur = t;
  for (std::size_t i = 0; i < p.size(); ++i) {
    try {
      cur = apply_transform(cur, p[i], diag);
    } catch (const StepFailedError&) {
      throw;
    } catch (const Error& e) {
      throw StepFailedError(i, e);
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Script format

inline constexpr int kScriptVersion = 1;

inline std::string_view op_name(const Transform& tr) {
  static constexpr std::string_view names[] = {"filter", "derive",    "select",          "drop",
                                               "rename", "sort",      "fold",            "spread",
                                               "group_aggregate",     "edit_cell",       "delete_rows",
                                               "set_type"};
  return names[tr.index()];
}

inline Json step_to_json(const Transform& tr) {
  Json j;
  j["op"] = std::string(op_name(tr));
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Filter>) {
          j["pred"] = s.pred;
        } else if constexpr (std::is_same_v<T, Derive>) {
          j["name"] = s.name;
          j["expr"] = s.expr;
        } else if constexpr (std::is_same_v<T, Select> || std::is_same_v<T, Drop>) {
          j["names"] = s.names;
        } else if constexpr (std::is_same_v<T, Rename>) {
          Json pairs = Json::array();
          for (const auto& p : s.pairs) pairs.push_back(Json{{"old", p.from}, {"new", p.to}});
          j["pairs"] = std::move(pairs);
        } else if constexpr (std::is_same_v<T, Sort>) {
          Json keys = Json::array();
          for (const auto& k : s.keys) keys.push_back(Json{{"name", k.name}, {"ascending", k.ascending}});
          j["keys"] = std::move(keys);
        } else if constexpr (std::is_same_v<T, Fold>) {
          j["cols"] = s.cols;
          j["key_name"] = s.key_name;
          j["value_name"] = s.value_name;
        } else if constexpr (std::is_same_v<T, Spread>) {
          j["key_col"] = s.key_col;
          j["value_col"] = s.value_col;
        } else if constexpr (std::is_same_v<T, GroupAggregate>) {
          j["by"] = s.by;
          Json aggs = Json::array();
          for (const auto& a : s.aggs) {
            Json ja;
            ja["out_name"] = a.out_name;
            ja["fn"] = std::string(to_string(a.fn));
            ja["col"] = a.col ? Json(*a.col) : Json(nullptr);
            aggs.push_back(std::move(ja));
          }
          j["aggs"] = std::move(aggs);
        } else if constexpr (std::is_same_v<T, EditCell>) {
          j["row"] = s.row;
          j["col"] = s.col;
          j["value"] = value_to_json(s.value);
        } else if constexpr (std::is_same_v<T, DeleteRows>) {
          j["indices"] = s.indices;
        } else {
          j["col"] = s.col;
          j["dtype"] = std::string(to_string(s.dtype));
        }
      },
      tr);
  return j;
}

namespace detail {

class StepReader {
 public:
  StepReader(const Json& j, std::size_t index) : j_(j), index_(index) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::MalformedScript, "steps[" + std::to_string(index_) + "]: " + what, {}, index_);
  }

  void allow(std::initializer_list<std::string_view> fields) const {
    for (const auto& [k, _] : j_.items()) {
      if (k == "op") continue;
      if (std::find(fields.begin(), fields.end(), k) == fields.end()) fail("unknown field '" + k + "'");
    }
  }

  const Json& field(const char* name) const {
    auto it = j_.find(name);
    if (it == j_.end()) fail(std::string("missing field '") + name + "'");
    return *it;
  }

  std::string str(const char* name) const { return as_str(field(name), name); }

  std::string as_str(const Json& v, const std::string& what) const {
    if (!v.is_string()) fail("'" + what + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strs(const char* name) const {
    const auto& v = field(name);
    if (!v.is_array()) fail(std::string("'") + name + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(as_str(e, std::string(name) + "[]"));
    return out;
  }

  std::size_t index(const Json& v, const std::string& what) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail("'" + what + "' must be a non-negative integer");
    return static_cast<std::size_t>(v.get<std::uint64_t>());
  }

  const Json& array(const char* name) const {
    const auto& v = field(name);
    if (!v.is_array()) fail(std::string("'") + name + "' must be an array");
    return v;
  }

  void require_object(const Json& v, std::initializer_list<std::string_view> fields, const std::string& what) const {
    if (!v.is_object()) fail("'" + what + "' entries must be objects");
    for (const auto& [k, _] : v.items())
      if (std::find(fields.begin(), fields.end(), k) == fields.end())
        fail("unknown field '" + k + "' in '" + what + "'");
  }

 private:
  const Json& j_;
  std::size_t index_;
};

}  // namespace detail

/// Decodes one step object; `index` is used in error locations.
inline Transform step_from_json(const Json& j, std::size_t index = 0) {
  detail::StepReader rd(j, index);
  if (!j.is_object()) rd.fail("step must be an object");
  std::string op = rd.str("op");
  if (op == "filter") {
    rd.allow({"pred"});
    return Filter{rd.str("pred")};
  }
  if (op == "derive") {
    rd.allow({"name", "expr"});
    return Derive{rd.str("name"), rd.str("expr")};
  }
  if (op == "select") {
    rd.allow({"names"});
    return Select{rd.strs("names")};
  }
  if (op == "drop") {
    rd.allow({"names"});
    return Drop{rd.strs("names")};
  }
  if (op == "rename") {
    rd.allow({"pairs"});
    Rename r;
    for (const auto& p : rd.array("pairs")) {
      rd.require_object(p, {"old", "new"}, "pairs");
      if (!p.contains("old") || !p.contains("new")) rd.fail("rename pair needs 'old' and 'new'");
      r.pairs.push_back({rd.as_str(p["old"], "old"), rd.as_str(p["new"], "new")});
    }
    return r;
  }
  if (op == "sort") {
    rd.allow({"keys"});
    Sort s;
    for (const auto& k : rd.array("keys")) {
      rd.require_object(k, {"name", "ascending"}, "keys");
      if (!k.contains("name")) rd.fail("sort key needs 'name'");
      SortKey key{rd.as_str(k["name"], "name"), true};
      if (k.contains("ascending")) {
        if (!k["ascending"].is_boolean()) rd.fail("'ascending' must be a boolean");
        key.ascending = k["ascending"].get<bool>();
      }
      s.keys.push_back(std::move(key));
    }
    return s;
  }
  if (op == "fold") {
    rd.allow({"cols", "key_name", "value_name"});
    return Fold{rd.strs("cols"), rd.str("key_name"), rd.str("value_name")};
  }
  if (op == "spread") {
    rd.allow({"key_col", "value_col"});
    return Spread{rd.str("key_col"), rd.str("value_col")};
  }
  if (op == "group_aggregate") {
    rd.allow({"by", "aggs"});
    GroupAggregate g{rd.strs("by"), {}};
    for (const auto& a : rd.array("aggs")) {
      rd.require_object(a, {"out_name", "fn", "col"}, "aggs");
      if (!a.contains("out_name") || !a.contains("fn")) rd.fail("aggregation needs 'out_name' and 'fn'");
      Aggregation agg;
      agg.out_name = rd.as_str(a["out_name"], "out_name");
      auto fn = parse_agg_fn(rd.as_str(a["fn"], "fn"));
      if (!fn) rd.fail("unknown aggregate function '" + a["fn"].get<std::string>() + "'");
      agg.fn = *fn;
      if (a.contains("col") && !a["col"].is_null()) agg.col = rd.as_str(a["col"], "col");
      g.aggs.push_back(std::move(agg));
    }
    return g;
  }
  if (op == "edit_cell") {
    rd.allow({"row", "col", "value"});
    auto v = json_to_value(rd.field("value"));
    if (!v) rd.fail("'value' must be a scalar");
    return EditCell{rd.index(rd.field("row"), "row"), rd.str("col"), std::move(*v)};
  }
  if (op == "delete_rows") {
    rd.allow({"indices"});
    DeleteRows d;
    for (const auto& i : rd.array("indices")) d.indices.push_back(rd.index(i, "indices[]"));
    return d;
  }
  if (op == "set_type") {
    rd.allow({"col", "dtype"});
    auto t = parse_dtype(rd.str("dtype"));
    if (!t) rd.fail("unknown dtype '" + rd.str("dtype") + "'");
    return SetType{rd.str("col"), *t};
  }
  rd.fail("unknown op '" + op + "'");
}

inline Json pipeline_to_json(const Pipeline& p) {
  Json steps = Json::array();
  for (const auto& s : p) steps.push_back(step_to_json(s));
  Json j;
  j["version"] = kScriptVersion;
  j["steps"] = std::move(steps);
  return j;
}

inline std::string serialize_pipeline(const Pipeline& p) { return write_json(pipeline_to_json(p)); }

inline Pipeline pipeline_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(Errc::MalformedScript, "script must be a JSON object");
  for (const auto& [k, _] : doc.items())
    if (k != "version" && k != "steps") throw Error(Errc::MalformedScript, "unknown field '" + k + "'");
  auto v = doc.find("version");
  if (v == doc.end() || !v->is_number_integer())
    throw Error(Errc::MalformedScript, "missing or non-integer 'version'");
  if (v->get<std::int64_t>() != kScriptVersion)
    throw Error(Errc::MalformedScript, "unsupported script version " + std::to_string(v->get<std::int64_t>()));
  auto steps = doc.find("steps");
  if (steps == doc.end() || !steps->is_array()) throw Error(Errc::MalformedScript, "missing 'steps' array");
  Pipeline p;
  for (std::size_t i = 0; i < steps->size(); ++i) p.push_back(step_from_json((*steps)[i], i));
  return p;
}

inline Pipeline parse_pipeline(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedScript, "invalid JSON at byte " + std::to_string(e.byte), {}, e.byte);
  }
  return pipeline_from_json(doc);
}

}  // namespace tablehub
