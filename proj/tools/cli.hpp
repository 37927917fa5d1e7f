#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/logger.h>
#include <spdlog/sinks/ostream_sink.h>

#include "tablehub/tablehub.hpp"
#include "serve.hpp"

namespace tablehub::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kParse = 2, kValidation = 3, kIo = 4 };

struct Failure {
  int code;
  std::string message;
};

struct InputOptions {
  std::string path;
  std::string format;  // empty: by extension
  bool no_header = false;
  std::string delimiter;
};

namespace detail {

inline std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("tablehub", sink);
  log->set_pattern("%l: %v");
  auto level = spdlog::level::err;
  if (const char* env = std::getenv("TABLEHUB_LOG")) {
    std::string v = env;
    if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  log->set_level(level);
  return log;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIo, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Failure{kIo, "error reading '" + path + "'"};
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty()) {
    out << data;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure{kIo, "cannot write '" + path + "'"};
  f << data;
  f.close();
  if (!f) throw Failure{kIo, "error writing '" + path + "'"};
}

inline std::optional<char> parse_delimiter(const std::string& s) {
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() == 1 && s[0] != '"' && s[0] != '\n' && s[0] != '\r') return s[0];
  return std::nullopt;
}

inline std::string input_kind(const InputOptions& in) {
  if (!in.format.empty()) return in.format;
  auto ext = std::filesystem::path(in.path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".json") return "json";
  if (ext == ".tsv") return "tsv";
  return "csv";
}

inline Table load_table(const InputOptions& in, spdlog::logger& log) {
  std::string text = read_file(in.path);
  std::string kind = input_kind(in);
  try {
    Table t;
    if (kind == "json") {
      t = parse_structured(text);
    } else {
      std::optional<Dialect> dialect;
      if (kind == "tsv" || !in.delimiter.empty() || in.no_header) {
        Dialect d = kind == "tsv" ? Dialect{'\t', '"', true} : sniff_dialect(strip_bom(text));
        if (!in.delimiter.empty()) d.delimiter = *parse_delimiter(in.delimiter);
        if (in.no_header) d.has_header = false;
        dialect = d;
      }
      IngestReport report;
      t = read_delimited(text, dialect, &report);
      if (report.total_failures()) log.info("{} cells could not be cast and became null", report.total_failures());
    }
    log.info("loaded {}: {} rows, {} columns", in.path, t.n_rows(), t.n_cols());
    return t;
  } catch (const Error& e) {
    throw Failure{kParse, in.path + ": " + e.what()};
  }
}

inline std::string render_payload(const Payload& p) {
  std::string text = payload_text(p);
  if (p.format != DataFormat::Csv) text.push_back('\n');
  return text;
}

inline std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline void add_input_flags(CLI::App* sub, InputOptions& in) {
  sub->add_option("file", in.path, "Input file (.csv, .tsv or .json)")->required();
  sub->add_option("--format", in.format, "Input format override")->check(CLI::IsMember({"csv", "tsv", "json"}));
  sub->add_flag("--no-header", in.no_header, "First row is data, not column names");
  sub->add_option("--delimiter", in.delimiter, "Field delimiter (single character, or \\t)");
}

}  // namespace detail

/// Runs one command line. Data goes to `out` (or -o), diagnostics to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = detail::make_logger(err);

  CLI::App app{"Tabular data hub: ingest, wrangle, pivot and serve tables", "tablehub"};
  app.require_subcommand(1, 1);

  InputOptions in;
  std::string to, output, script, rows, cols, agg = "count", project, host = "127.0.0.1";
  bool totals = false;
  int port = 8765;
  const std::vector<std::string> format_names{"row_records", "column_map", "matrix", "csv"};

  auto* info = app.add_subcommand("info", "Print row count and column types");
  detail::add_input_flags(info, in);

  auto* convert = app.add_subcommand("convert", "Ingest a file and export it in another format");
  detail::add_input_flags(convert, in);
  convert->add_option("--to", to, "Output format")->required()->check(CLI::IsMember(format_names));
  convert->add_option("-o,--output", output, "Output file (default stdout)");

  auto* wrangle = app.add_subcommand("wrangle", "Apply a transform script");
  detail::add_input_flags(wrangle, in);
  wrangle->add_option("--script", script, "Transform script (.dwj)")->required();
  wrangle->add_option("--to", to, "Output format")->default_val("csv")->check(CLI::IsMember(format_names));
  wrangle->add_option("-o,--output", output, "Output file (default stdout)");

  auto* pivot_cmd = app.add_subcommand("pivot", "Pivot and write the flattened grid as csv");
  detail::add_input_flags(pivot_cmd, in);
  pivot_cmd->add_option("--rows", rows, "Row dimensions, comma separated");
  pivot_cmd->add_option("--cols", cols, "Column dimensions, comma separated");
  pivot_cmd->add_option("--agg", agg, "count, or fn:measure with fn in sum/mean/min/max/count");
  pivot_cmd->add_flag("--totals", totals, "Add marginal totals");
  pivot_cmd->add_option("-o,--output", output, "Output file (default stdout)");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the bridge protocol over WebSocket");
  serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--project", project, "Project file to preload (.dsproj)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!in.delimiter.empty() && !detail::parse_delimiter(in.delimiter))
      throw Failure{kUsage, "--delimiter must be a single character"};

    if (*info) {
      Table t = detail::load_table(in, *log);
      std::ostringstream ss;
      ss << "name: " << std::filesystem::path(in.path).stem().string() << "\n";
      ss << "rows: " << t.n_rows() << "\n";
      ss << "columns: " << t.n_cols() << "\n";
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        const Column& col = t.column(c);
        ss << "  " << col.name << "\t" << to_string(col.dtype) << "\tnulls=" << col.null_count() << "\n";
      }
      out << ss.str();
      return kOk;
    }

    if (*convert) {
      Table t = detail::load_table(in, *log);
      detail::write_output(output, detail::render_payload(export_table(t, *parse_format(to))), out);
      return kOk;
    }

    if (*wrangle) {
      std::string script_text = detail::read_file(script);
      Pipeline p;
      try {
        p = parse_pipeline(script_text);
      } catch (const Error& e) {
        throw Failure{kParse, script + ": " + e.what()};
      }
      Table t = detail::load_table(in, *log);
      Diagnostics diag;
      try {
        t = apply_pipeline(t, p, &diag);
      } catch (const Error& e) {
        throw Failure{kValidation, e.what()};
      }
      for (const auto& w : diag.warnings) log->warn("{}", w);
      log->info("pipeline of {} steps produced {} rows", p.size(), t.n_rows());
      detail::write_output(output, detail::render_payload(export_table(t, *parse_format(to))), out);
      return kOk;
    }

    if (*pivot_cmd) {
      PivotSpec spec;
      spec.row_dims = detail::split_names(rows);
      spec.col_dims = detail::split_names(cols);
      spec.totals = totals;
      auto colon = agg.find(':');
      auto fn = parse_agg_fn(agg.substr(0, colon));
      if (!fn) throw Failure{kUsage, "--agg: unknown aggregate '" + agg.substr(0, colon) + "'"};
      spec.agg = *fn;
      if (colon != std::string::npos) {
        spec.measure = agg.substr(colon + 1);
        if (spec.measure->empty()) throw Failure{kUsage, "--agg: empty measure name"};
      } else if (*fn != AggFn::Count) {
        throw Failure{kUsage, "--agg: " + agg + " needs a measure, as in " + agg + ":column"};
      }
      Table t = detail::load_table(in, *log);
      Table grid;
      try {
        grid = pivot_to_table(pivot(t, spec));
      } catch (const Error& e) {
        throw Failure{kValidation, e.what()};
      }
      detail::write_output(output, export_csv(grid), out);
      return kOk;
    }

    if (*serve_cmd) {
      Session session;
      if (!project.empty()) {
        std::string text = detail::read_file(project);
        try {
          session = Session::load_project(text);
        } catch (const Error& e) {
          throw Failure{kParse, project + ": " + e.what()};
        }
      }
      Hub hub(session, project.empty() ? "tablehub" : std::filesystem::path(project).stem().string());
      std::unique_ptr<serve::Server> server;
      try {
        server = std::make_unique<serve::Server>(hub, host, static_cast<std::uint16_t>(port),
                                                 [&](const std::string& m) { log->debug("{}", m); });
      } catch (const std::exception& e) {
        throw Failure{kIo, std::string("cannot listen: ") + e.what()};
      }
      boost::asio::signal_set signals(server->context(), SIGINT, SIGTERM);
      signals.async_wait([&](const boost::system::error_code&, int) { server->stop(); });
      out << "listening on ws://" << host << ":" << server->port() << std::endl;
      server->run();
      return kOk;
    }
  } catch (const Failure& f) {
    log->error("{}", f.message);
    return f.code;
  } catch (const Error& e) {
    log->error("{}", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kIo;
  }
  return kUsage;
}

}  // namespace tablehub::cli
