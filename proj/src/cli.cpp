#include "scaffolding/cli.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "scaffolding/dataset.hpp"
#include "scaffolding/errors.hpp"
#include "scaffolding/llm_gateway.hpp"
#include "scaffolding/scaffold.hpp"
#include "scaffolding/service.hpp"
#include "scaffolding/structure.hpp"

namespace scaffolding {
namespace {

// Thrown inside subcommands to leave with a specific exit code.
struct Exit {
  int code;
};

struct DataArgs {
  std::string file;
  std::string format;
};

Dataset load_dataset(const DataArgs& a, std::ostream& err) {
  try {
    if (a.format.empty()) return ingest_file(a.file);
    const auto format = data_format_from_string(a.format);
    if (!format) {
      err << "error: unknown format " << a.format << "\n";
      throw Exit{kExitUsage};
    }
    std::ifstream in(a.file, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + a.file);
    std::ostringstream ss;
    ss << in.rdbuf();
    IngestOptions opts;
    opts.name = std::filesystem::path(a.file).stem().string();
    return ingest(ss.str(), *format, opts);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    throw Exit{kExitUsage};
  }
}

Json read_json_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: cannot open " << path << "\n";
    throw Exit{kExitUsage};
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    err << "error: " << path << " is not valid JSON: " << e.what() << "\n";
    throw Exit{kExitUsage};
  }
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics, std::ostream& err) {
  for (const auto& d : diagnostics) {
    err << to_string(d.severity) << " " << to_string(d.code);
    if (d.group_index) err << " [group " << *d.group_index << "]";
    err << ": " << d.message << "\n";
  }
}

int run_generation(const Dataset& d, const Task& task, const std::string& mock,
                   const std::string& fixtures_dir, std::ostream& out, std::ostream& err) {
  GenerationConfig cfg = config_from_env();
  if (!mock.empty()) cfg.backend = MockBackendSpec{mock};
  if (!fixtures_dir.empty()) cfg.fixtures_dir = fixtures_dir;
  GenerationResult result;
  try {
    result = generate_validated(d, task, cfg);
  } catch (const UnknownFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FixtureError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  }
  out << canonical_dump(to_json(result.set)) << "\n";
  print_diagnostics(result.diagnostics, err);
  if (has_errors(result.diagnostics)) {
    err << "scaffolds still had errors after " << result.attempts_used << " attempts\n";
    return kExitValidation;
  }
  return kExitOk;
}

ScaffoldSet load_scaffold_set(const std::string& path, const std::optional<std::string>& field,
                              std::vector<Diagnostic>& diagnostics, std::ostream& err) {
  const Json j = read_json_file(path, err);
  try {
    return scaffold_set_from_json(j, field);
  } catch (const GroupPredicateError& e) {
    diagnostics.push_back(make_error(DiagnosticCode::kSchemaViolation, e.what(), e.group_index()));
  } catch (const Error& e) {
    diagnostics.push_back(make_error(DiagnosticCode::kSchemaViolation, e.what()));
  }
  throw Exit{kExitValidation};
}

int cmd_validate(const std::string& scaffolds, const DataArgs& data, const std::string& field,
                 std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(data, err);
  std::vector<Diagnostic> diagnostics;
  try {
    const ScaffoldSet set = load_scaffold_set(
        scaffolds, field.empty() ? std::nullopt : std::optional<std::string>(field), diagnostics,
        err);
    diagnostics = validate_scaffold_set(set, d);
  } catch (const Exit&) {
    if (diagnostics.empty()) throw;
  } catch (const NotABinPredicate& e) {
    diagnostics.push_back(make_error(DiagnosticCode::kSchemaViolation, e.what(), e.group_index()));
  } catch (const UnknownFieldError& e) {
    diagnostics.push_back(make_error(DiagnosticCode::kUnknownField, e.what()));
  }
  Json body = Json::object();
  body["diagnostics"] = to_json(diagnostics);
  out << canonical_dump(body) << "\n";
  print_diagnostics(diagnostics, err);
  return has_errors(diagnostics) ? kExitValidation : kExitOk;
}

int cmd_render(const DataArgs& data, const std::vector<std::string>& scaffold_files,
               std::size_t depth, bool as_json, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(data, err);
  std::map<std::string, ScaffoldSet> bins;
  std::optional<ScaffoldSet> highlights;
  for (const auto& file : scaffold_files) {
    std::vector<Diagnostic> diagnostics;
    ScaffoldSet set;
    try {
      set = load_scaffold_set(file, std::nullopt, diagnostics, err);
    } catch (const Exit&) {
      print_diagnostics(diagnostics, err);
      throw;
    }
    if (set.kind == ScaffoldKind::kBins) {
      bins[set.field] = std::move(set);
    } else {
      highlights = std::move(set);
    }
  }
  StructureNode root;
  try {
    root = build_structure(d, bins, highlights);
  } catch (const InvalidScaffold& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnknownFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (as_json) {
    out << structure_to_json(root) << "\n";
  } else {
    out << render_outline(root, depth);
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic scaffolds for accessible data navigation"};
  app.name(args.empty() ? "scaffold" : args.front());
  app.require_subcommand(1);

  DataArgs data;
  std::string field, mock, fixtures_dir, scaffolds_file, host = "127.0.0.1", state_dir;
  std::vector<std::string> scaffold_files;
  int k = 0;
  int port = kDefaultPort;
  std::size_t depth = std::numeric_limits<std::size_t>::max();
  bool as_json = false;

  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("file", data.file, "CSV or JSON-records data file")->required();
    cmd->add_option("--format", data.format, "csv or json-records (default: by extension)");
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Print the dataset id and field summary");
  add_data(ingest_cmd);

  auto* bins_cmd = app.add_subcommand("bins", "Generate a validated bin set for one field");
  add_data(bins_cmd);
  bins_cmd->add_option("--field", field, "Field to bin")->required();
  bins_cmd->add_option("--k", k, "Equal-width bins instead of generated ones")
      ->check(CLI::PositiveNumber);
  bins_cmd->add_option("--mock", mock, "Replay a response fixture");
  bins_cmd->add_option("--fixtures-dir", fixtures_dir, "Fixture directory");

  auto* hl_cmd = app.add_subcommand("highlights", "Generate validated data highlights");
  add_data(hl_cmd);
  hl_cmd->add_option("--mock", mock, "Replay a response fixture");
  hl_cmd->add_option("--fixtures-dir", fixtures_dir, "Fixture directory");

  auto* validate_cmd = app.add_subcommand("validate", "Validate a scaffold file against data");
  validate_cmd->add_option("scaffolds", scaffolds_file, "Scaffold set JSON")->required();
  validate_cmd->add_option("--data", data.file, "Data file")->required();
  validate_cmd->add_option("--format", data.format, "csv or json-records");
  validate_cmd->add_option("--field", field, "Read a bare groups document as bins for this field");

  auto* render_cmd = app.add_subcommand("render", "Print the textual structure outline");
  add_data(render_cmd);
  render_cmd->add_option("--scaffolds", scaffold_files, "Scaffold set JSON (repeatable)");
  render_cmd->add_option("--depth", depth, "Levels to print")->check(CLI::PositiveNumber);
  render_cmd->add_flag("--json", as_json, "Print structure JSON instead");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--state-dir", state_dir, "Persist datasets and scaffolds here");
  serve_cmd->add_option("--fixtures-dir", fixtures_dir, "Fixture directory");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitUsage;
  }

  try {
    if (ingest_cmd->parsed()) {
      out << canonical_dump(field_summary_json(load_dataset(data, err))) << "\n";
      return kExitOk;
    }
    if (bins_cmd->parsed()) {
      const Dataset d = load_dataset(data, err);
      if (k > 0) {
        try {
          out << canonical_dump(to_json(equal_width_bins(d, field, k))) << "\n";
        } catch (const Error& e) {
          err << "error: " << e.what() << "\n";
          return kExitUsage;
        }
        return kExitOk;
      }
      return run_generation(d, Task::bins(field), mock, fixtures_dir, out, err);
    }
    if (hl_cmd->parsed()) {
      return run_generation(load_dataset(data, err), Task::highlights(), mock, fixtures_dir,
                            out, err);
    }
    if (validate_cmd->parsed()) return cmd_validate(scaffolds_file, data, field, out, err);
    if (render_cmd->parsed()) return cmd_render(data, scaffold_files, depth, as_json, out, err);
    if (serve_cmd->parsed()) {
      ServiceOptions opts;
      opts.generation = config_from_env();
      if (!fixtures_dir.empty()) opts.generation.fixtures_dir = fixtures_dir;
      if (!state_dir.empty()) opts.state_dir = state_dir;
      Service service(std::move(opts));
      const std::size_t loaded = service.load_state();
      err << "serving on http://" << host << ":" << port;
      if (loaded) err << " (" << loaded << " datasets restored)";
      err << std::endl;
      const int rc = run_server(service, host, port);
      if (rc != 0) err << "error: cannot listen on " << host << ":" << port << "\n";
      return rc;
    }
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace scaffolding
