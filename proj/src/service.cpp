#include "scaffolding/service.hpp"

#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "scaffolding/errors.hpp"

namespace scaffolding {

struct Service::Stored {
  WorkspaceEntry entry;
  mutable std::once_flag structure_once;
  mutable std::string structure_json;
};

namespace {

HttpResponse json_response(int status, const Json& body) {
  return {status, canonical_dump(body)};
}

HttpResponse error_response(int status, const std::string& message,
                            const std::vector<Diagnostic>& diagnostics = {}) {
  Json body = Json::object();
  body["error"] = message;
  body["diagnostics"] = to_json(diagnostics);
  return json_response(status, body);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    const std::size_t j = std::min(path.find('/', i), path.size());
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

std::optional<std::size_t> query_size(const std::multimap<std::string, std::string>& query,
                                      const std::string& key, std::size_t fallback,
                                      bool& bad) {
  const auto it = query.find(key);
  if (it == query.end()) return fallback;
  std::size_t v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    bad = true;
    return std::nullopt;
  }
  return v;
}

Json snapshot_json(const WorkspaceEntry& e) {
  Json j = Json::object();
  j["datasetId"] = e.dataset->id();
  j["name"] = e.dataset->name();
  j["format"] = to_string(e.format);
  j["content"] = e.content;
  Json bins = Json::object();
  for (const auto& [field, set] : e.bin_sets) bins[field] = to_json(set);
  j["binSets"] = std::move(bins);
  j["highlights"] = e.highlights ? to_json(*e.highlights) : Json(nullptr);
  return j;
}

WorkspaceEntry entry_from_snapshot(const Json& j, const IngestOptions& base) {
  WorkspaceEntry e;
  const auto format = data_format_from_string(j.at("format").get<std::string>());
  if (!format) throw SchemaViolation("snapshot has an unknown format");
  e.format = *format;
  e.content = j.at("content").get<std::string>();
  IngestOptions opts = base;
  opts.name = j.at("name").get<std::string>();
  e.dataset = std::make_shared<const Dataset>(ingest(e.content, e.format, opts));
  for (const auto& [field, set] : j.at("binSets").items()) {
    e.bin_sets.emplace(field, scaffold_set_from_json(set, field));
  }
  if (!j.at("highlights").is_null()) e.highlights = scaffold_set_from_json(j.at("highlights"));
  return e;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.backend_factory) options_.backend_factory = make_backend;
  if (options_.state_dir) std::filesystem::create_directories(*options_.state_dir);
}

Service::~Service() = default;

std::shared_ptr<const Service::Stored> Service::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second;
}

std::shared_ptr<const WorkspaceEntry> Service::entry(const std::string& id) const {
  auto stored = find(id);
  if (!stored) return nullptr;
  return {stored, &stored->entry};
}

void Service::persist(const WorkspaceEntry& entry) const {
  if (!options_.state_dir) return;
  const auto path = *options_.state_dir / (entry.dataset->id() + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << canonical_dump(snapshot_json(entry));
    if (!out) throw Error("cannot write snapshot " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void Service::forget(const std::string& id) const {
  if (!options_.state_dir) return;
  std::error_code ec;
  std::filesystem::remove(*options_.state_dir / (id + ".json"), ec);
}

std::size_t Service::load_state() {
  if (!options_.state_dir) return 0;
  std::size_t loaded = 0;
  for (const auto& file : std::filesystem::directory_iterator(*options_.state_dir)) {
    if (file.path().extension() != ".json") continue;
    std::ifstream in(file.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      auto stored = std::make_shared<Stored>();
      stored->entry = entry_from_snapshot(Json::parse(ss.str()), options_.ingest);
      const std::string id = stored->entry.dataset->id();
      std::unique_lock lock(mutex_);
      entries_[id] = std::move(stored);
      ++loaded;
    } catch (const std::exception&) {
      // Unreadable snapshots are skipped rather than blocking startup.
    }
  }
  return loaded;
}

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             std::string_view body,
                             const std::multimap<std::string, std::string>& query) {
  const auto parts = split_path(path);
  if (parts.size() < 2 || parts[0] != "api" || parts[1] != "datasets") {
    return error_response(404, "no such endpoint: " + std::string(path));
  }
  try {
    if (parts.size() == 2) {
      if (method == "GET") return list_datasets();
      if (method == "POST") return create_dataset(body);
    } else if (parts.size() == 3) {
      if (method == "GET") return get_dataset(parts[2]);
      if (method == "DELETE") return delete_dataset(parts[2]);
    } else if (parts.size() == 4) {
      if (parts[3] == "scaffolds" && method == "POST") return generate_scaffolds(parts[2], body);
      if (parts[3] == "structure" && method == "GET") return get_structure(parts[2]);
      if (parts[3] == "selection" && method == "POST") {
        return post_selection(parts[2], body, query);
      }
    }
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  return error_response(parts.size() <= 4 ? 405 : 404,
                        std::string(method) + " " + std::string(path) + " is not supported");
}

HttpResponse Service::list_datasets() {
  Json list = Json::array();
  std::shared_lock lock(mutex_);
  for (const auto& [id, stored] : entries_) list.push_back(field_summary_json(*stored->entry.dataset));
  Json body = Json::object();
  body["datasets"] = std::move(list);
  return json_response(200, body);
}

HttpResponse Service::create_dataset(std::string_view body) {
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::exception& e) {
    return error_response(400, std::string("request body is not JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("content") || !req.contains("format") ||
      !req.at("format").is_string()) {
    return error_response(400, "expected {\"format\", \"content\"}");
  }
  const auto format = data_format_from_string(req.at("format").get<std::string>());
  if (!format) return error_response(400, "unknown format " + req.at("format").dump());

  const Json& content = req.at("content");
  std::string bytes;
  if (content.is_string()) {
    bytes = content.get<std::string>();
  } else if (content.is_array() && *format == DataFormat::kJsonRecords) {
    bytes = content.dump();
  } else {
    return error_response(400, "content must be a string");
  }

  IngestOptions opts = options_.ingest;
  if (req.contains("name") && req.at("name").is_string()) {
    opts.name = req.at("name").get<std::string>();
  }
  auto stored = std::make_shared<Stored>();
  try {
    stored->entry.dataset = std::make_shared<const Dataset>(ingest(bytes, *format, opts));
  } catch (const DatasetTooLarge& e) {
    return error_response(413, e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  stored->entry.format = *format;
  stored->entry.content = std::move(bytes);
  const Json summary = field_summary_json(*stored->entry.dataset);
  const std::string id = stored->entry.dataset->id();

  std::unique_lock lock(mutex_);
  if (entries_.count(id)) return json_response(200, summary);
  persist(stored->entry);
  entries_.emplace(id, std::move(stored));
  return json_response(201, summary);
}

HttpResponse Service::get_dataset(const std::string& id) {
  const auto stored = find(id);
  if (!stored) return error_response(404, "unknown dataset " + id);
  return json_response(200, field_summary_json(*stored->entry.dataset));
}

HttpResponse Service::delete_dataset(const std::string& id) {
  std::unique_lock lock(mutex_);
  if (!entries_.erase(id)) return error_response(404, "unknown dataset " + id);
  forget(id);
  Json body = Json::object();
  body["datasetId"] = id;
  body["deleted"] = true;
  return json_response(200, body);
}

HttpResponse Service::generate_scaffolds(const std::string& id, std::string_view body) {
  const auto stored = find(id);
  if (!stored) return error_response(404, "unknown dataset " + id);
  const Dataset& d = *stored->entry.dataset;

  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::exception& e) {
    return error_response(400, std::string("request body is not JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("kind") || !req.at("kind").is_string()) {
    return error_response(400, "expected {\"kind\": \"bins\" | \"highlights\"}");
  }
  Task task;
  const auto kind = req.at("kind").get<std::string>();
  if (kind == "bins") {
    if (!req.contains("field") || !req.at("field").is_string()) {
      return error_response(400, "bins require a field");
    }
    task = Task::bins(req.at("field").get<std::string>());
    if (!d.find_field(task.field)) {
      return error_response(400, "unknown field " + task.field,
                            {make_error(DiagnosticCode::kUnknownField,
                                        "field \"" + task.field + "\" is not in the dataset")});
    }
  } else if (kind == "highlights") {
    task = Task::highlights();
  } else {
    return error_response(400, "unknown scaffold kind " + kind);
  }

  GenerationConfig cfg = options_.generation;
  if (req.contains("mockFixture") && req.at("mockFixture").is_string()) {
    cfg.backend = MockBackendSpec{req.at("mockFixture").get<std::string>()};
  }

  GenerationResult result;
  try {
    auto backend = options_.backend_factory(cfg);
    result = generate_validated(d, task, cfg, *backend);
  } catch (const FixtureError& e) {
    return error_response(400, e.what());
  } catch (const TransportError& e) {
    return error_response(502, e.what());
  } catch (const AuthError& e) {
    return error_response(502, e.what());
  } catch (const PredicateParseError& e) {
    return error_response(502, e.what(), {make_error(DiagnosticCode::kSchemaViolation, e.what())});
  } catch (const SchemaViolation& e) {
    return error_response(502, e.what(), {make_error(DiagnosticCode::kSchemaViolation, e.what())});
  } catch (const NotABinPredicate& e) {
    return error_response(502, e.what(),
                          {make_error(DiagnosticCode::kSchemaViolation, e.what(), e.group_index())});
  }

  Json out = Json::object();
  out["scaffolds"] = to_json(result.set);
  out["diagnostics"] = to_json(result.diagnostics);
  out["attemptsUsed"] = result.attempts_used;
  if (has_errors(result.diagnostics)) {
    out["error"] = "scaffolds still had errors after " +
                   std::to_string(result.attempts_used) + " attempts";
    return json_response(400, out);
  }

  std::unique_lock lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return error_response(404, "dataset " + id + " was deleted");
  auto next = std::make_shared<Stored>();
  next->entry = it->second->entry;
  if (task.kind == ScaffoldKind::kBins) {
    next->entry.bin_sets[task.field] = result.set;
  } else {
    next->entry.highlights = result.set;
  }
  persist(next->entry);
  it->second = std::move(next);
  return json_response(200, out);
}

HttpResponse Service::get_structure(const std::string& id) {
  const auto stored = find(id);
  if (!stored) return error_response(404, "unknown dataset " + id);
  std::call_once(stored->structure_once, [&] {
    const auto& e = stored->entry;
    stored->structure_json = structure_to_json(
        build_structure(*e.dataset, e.bin_sets, e.highlights, options_.structure));
  });
  return {200, stored->structure_json};
}

HttpResponse Service::post_selection(const std::string& id, std::string_view body,
                                     const std::multimap<std::string, std::string>& query) {
  const auto stored = find(id);
  if (!stored) return error_response(404, "unknown dataset " + id);
  const Dataset& d = *stored->entry.dataset;

  bool bad = false;
  const auto page = query_size(query, "page", 0, bad);
  const auto page_size = query_size(query, "pageSize", options_.default_page_size, bad);
  if (bad || *page_size == 0) return error_response(400, "page and pageSize must be integers, pageSize > 0");

  std::optional<Predicate> p;
  try {
    p = parse_predicate(body);
  } catch (const PredicateParseError& e) {
    return error_response(400, e.what(), {make_error(DiagnosticCode::kSchemaViolation, e.what())});
  }
  auto diagnostics = typecheck(*p, d.fields());
  if (has_errors(diagnostics)) return error_response(400, "predicate does not typecheck", diagnostics);
  const auto ranges = check_ranges(*p, d.fields());
  diagnostics.insert(diagnostics.end(), ranges.begin(), ranges.end());

  const Selection sel = select(*p, d);
  Json rows = Json::array();
  const std::size_t start = std::min(sel.row_indices.size(), *page * *page_size);
  const std::size_t end = std::min(sel.row_indices.size(), start + *page_size);
  for (std::size_t i = start; i < end; ++i) {
    rows.push_back(record_to_json(d, d.records()[sel.row_indices[i]]));
  }
  Json out = Json::object();
  out["count"] = sel.count;
  out["rowIndices"] = sel.row_indices;
  out["rowsPage"] = std::move(rows);
  out["page"] = *page;
  out["pageSize"] = *page_size;
  out["diagnostics"] = to_json(diagnostics);
  return json_response(200, out);
}

void Service::bind(httplib::Server& server) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    const HttpResponse r = handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Get("/api/.*", route);
  server.Post("/api/.*", route);
  server.Delete("/api/.*", route);
  server.Options("/api/.*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

int run_server(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.bind(server);
  return server.listen(host, port) ? 0 : 2;
}

}  // namespace scaffolding
