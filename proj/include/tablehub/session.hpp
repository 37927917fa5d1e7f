#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tablehub/error.hpp"
#include "tablehub/exchange.hpp"
#include "tablehub/ingest.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/table.hpp"
#include "tablehub/transform.hpp"

namespace tablehub {

struct Dataset {
  std::string id;
  std::string name;
  Table base;
  Pipeline pipeline;
  Table current;
  std::uint64_t revision = 0;
};

struct HistoryResult {
  std::uint64_t revision = 0;
  bool applied = false;  // false when the stack was empty
};

inline constexpr int kProjectVersion = 1;

/// Host-side data state: datasets, their transform pipelines, undo/redo
/// history and tool adapters. Not internally synchronized; callers funnel
/// all mutations through one thread or lock.
class Session {
 public:
  static constexpr std::size_t kUndoDepth = 100;

  std::string load_dataset(std::string name, Table t) {
    std::string id = "ds" + std::to_string(++next_id_);
    Entry e;
    e.data = Dataset{id, std::move(name), t, {}, t, 0};
    order_.push_back(id);
    entries_.emplace(id, std::move(e));
    return id;
  }

  bool has_dataset(std::string_view id) const { return entries_.count(std::string(id)) > 0; }

  const Dataset& dataset(std::string_view id) const { return entry(id).data; }

  /// Dataset ids in load order.
  const std::vector<std::string>& dataset_ids() const { return order_; }

  std::uint64_t apply_step(std::string_view id, const Transform& tr, Diagnostics* diag = nullptr) {
    return apply_steps(id, Pipeline{tr}, diag);
  }

  /// Applies several steps atomically: either all validate and each becomes
  /// one undo unit, or nothing changes.
  std::uint64_t apply_steps(std::string_view id, const Pipeline& steps, Diagnostics* diag = nullptr) {
    Entry& e = entry(id);
    Table cur = e.data.current;
    std::vector<Table> staged;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      try {
        cur = apply_transform(cur, steps[i], diag);
      } catch (const Error& err) {
        if (steps.size() == 1) throw;
        throw StepFailedError(i, err);
      }
    }
    for (const auto& s : steps) {
      push_bounded(e.undo, e.data.pipeline);
      e.data.pipeline.push_back(s);
      ++e.data.revision;
    }
    if (!steps.empty()) e.redo.clear();
    e.data.current = std::move(cur);
    return e.data.revision;
  }

  HistoryResult undo(std::string_view id) { return step_history(entry(id), true); }
  HistoryResult redo(std::string_view id) { return step_history(entry(id), false); }

  std::size_t undo_depth(std::string_view id) const { return entry(id).undo.size(); }
  std::size_t redo_depth(std::string_view id) const { return entry(id).redo.size(); }

  void register_adapter(AdapterSpec spec) {
    auto key = spec.tool_id;
    adapters_[key] = std::move(spec);
  }

  const AdapterSpec* adapter_for(std::string_view tool_id) const {
    auto it = adapters_.find(std::string(tool_id));
    return it == adapters_.end() ? nullptr : &it->second;
  }

  std::string save_project() const {
    Json datasets = Json::array();
    for (const auto& id : order_) {
      const Dataset& d = dataset(id);
      Json schema = Json::array();
      for (const auto& f : d.base.schema()) schema.push_back(Json{{"name", f.name}, {"dtype", std::string(to_string(f.dtype))}});
      Json entry;
      entry["name"] = d.name;
      entry["schema"] = std::move(schema);
      entry["base_csv"] = export_csv(d.base);
      entry["pipeline"] = pipeline_to_json(d.pipeline);
      datasets.push_back(std::move(entry));
    }
    Json doc;
    doc["version"] = kProjectVersion;
    doc["datasets"] = std::move(datasets);
    return write_json(doc);
  }

  static Session load_project(std::string_view text) {
    auto fail = [](const std::string& why) -> void { throw Error(Errc::MalformedProject, why); };
    Json doc = parse_json_lenient(text);
    if (doc.is_discarded() || !doc.is_object()) fail("project is not a JSON object");
    auto v = doc.find("version");
    if (v == doc.end() || !v->is_number_integer()) fail("missing or non-integer 'version'");
    if (v->get<std::int64_t>() != kProjectVersion)
      fail("unsupported project version " + std::to_string(v->get<std::int64_t>()));
    auto ds = doc.find("datasets");
    if (ds == doc.end() || !ds->is_array()) fail("missing 'datasets' array");

    Session s;
    for (std::size_t i = 0; i < ds->size(); ++i) {
      const Json& d = (*ds)[i];
      std::string where = "datasets[" + std::to_string(i) + "]";
      if (!d.is_object() || !d.contains("name") || !d["name"].is_string() || !d.contains("schema") ||
          !d["schema"].is_array() || !d.contains("base_csv") || !d["base_csv"].is_string() || !d.contains("pipeline"))
        fail(where + " needs name, schema, base_csv and pipeline");
      Schema schema;
      for (const auto& f : d["schema"]) {
        if (!f.is_object() || !f.contains("name") || !f["name"].is_string() || !f.contains("dtype") ||
            !f["dtype"].is_string())
          fail(where + ".schema entries need name and dtype");
        auto t = parse_dtype(f["dtype"].get<std::string>());
        if (!t) fail(where + ": unknown dtype '" + f["dtype"].get<std::string>() + "'");
        schema.push_back({f["name"].get<std::string>(), *t});
      }
      try {
        const auto& csv = d["base_csv"].get_ref<const std::string&>();
        auto raw = parse_delimited(csv, Dialect{',', '"', true});
        std::vector<std::string> header_order;
        for (const auto& f : schema) header_order.push_back(f.name);
        if (raw.header != header_order) throw Error(Errc::SchemaMismatch, "schema order differs from the header");
        Table base = finalize(raw, schema);
        Pipeline p = pipeline_from_json(d["pipeline"]);
        auto id = s.load_dataset(d["name"].get<std::string>(), base);
        Entry& e = s.entry(id);
        e.data.current = apply_pipeline(base, p);
        e.data.pipeline = std::move(p);
      } catch (const Error& err) {
        throw Error(Errc::MalformedProject, where + ": " + err.what());
      }
    }
    return s;
  }

 private:
  struct Entry {
    Dataset data;
    std::deque<Pipeline> undo;
    std::deque<Pipeline> redo;
  };

  static void push_bounded(std::deque<Pipeline>& stack, Pipeline p) {
    stack.push_back(std::move(p));
    if (stack.size() > kUndoDepth) stack.pop_front();
  }

  HistoryResult step_history(Entry& e, bool is_undo) {
    auto& from = is_undo ? e.undo : e.redo;
    auto& to = is_undo ? e.redo : e.undo;
    if (from.empty()) return {e.data.revision, false};
    Pipeline target = std::move(from.back());
    from.pop_back();
    e.data.current = apply_pipeline(e.data.base, target);
    push_bounded(to, std::move(e.data.pipeline));
    e.data.pipeline = std::move(target);
    return {++e.data.revision, true};
  }

  Entry& entry(std::string_view id) {
    auto it = entries_.find(std::string(id));
    if (it == entries_.end()) throw Error(Errc::UnknownDataset, "unknown dataset '" + std::string(id) + "'", std::string(id));
    return it->second;
  }
  const Entry& entry(std::string_view id) const { return const_cast<Session*>(this)->entry(id); }

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  std::map<std::string, AdapterSpec> adapters_;
  std::uint64_t next_id_ = 0;
};

}  // namespace tablehub
