#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "scaffolding/dataset.hpp"
#include "scaffolding/llm_gateway.hpp"
#include "scaffolding/scaffold.hpp"
#include "scaffolding/structure.hpp"

namespace httplib {
class Server;
}

namespace scaffolding {

inline constexpr int kDefaultPort = 7341;

struct HttpResponse {
  int status = 200;
  std::string body;  // canonical JSON
};

using BackendFactory = std::function<std::unique_ptr<ChatBackend>(const GenerationConfig&)>;

struct ServiceOptions {
  GenerationConfig generation;
  std::optional<std::filesystem::path> state_dir;
  IngestOptions ingest;
  StructureOptions structure;
  std::size_t default_page_size = 20;
  // Defaults to make_backend.
  BackendFactory backend_factory;
};

// One dataset and the scaffold sets accepted for it. Entries are never
// mutated in place; every change swaps in a new entry.
struct WorkspaceEntry {
  std::shared_ptr<const Dataset> dataset;
  DataFormat format = DataFormat::kCsv;
  std::string content;
  std::map<std::string, ScaffoldSet> bin_sets;
  std::optional<ScaffoldSet> highlights;
};

// The HTTP API as a plain request -> response function:
//   GET    /api/datasets
//   POST   /api/datasets                    {format, content, name?}
//   GET    /api/datasets/{id}
//   DELETE /api/datasets/{id}
//   POST   /api/datasets/{id}/scaffolds     {kind, field?, mockFixture?}
//   GET    /api/datasets/{id}/structure
//   POST   /api/datasets/{id}/selection     predicate; ?page=&pageSize=
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  HttpResponse handle(std::string_view method, std::string_view path,
                      std::string_view body,
                      const std::multimap<std::string, std::string>& query = {});

  // Reads every snapshot in the state directory; returns how many loaded.
  std::size_t load_state();

  std::shared_ptr<const WorkspaceEntry> entry(const std::string& id) const;

  // Routes /api/* on the server to handle().
  void bind(httplib::Server& server);

 private:
  struct Stored;

  HttpResponse create_dataset(std::string_view body);
  HttpResponse get_dataset(const std::string& id);
  HttpResponse list_datasets();
  HttpResponse delete_dataset(const std::string& id);
  HttpResponse generate_scaffolds(const std::string& id, std::string_view body);
  HttpResponse get_structure(const std::string& id);
  HttpResponse post_selection(const std::string& id, std::string_view body,
                              const std::multimap<std::string, std::string>& query);

  std::shared_ptr<const Stored> find(const std::string& id) const;
  void persist(const WorkspaceEntry& entry) const;
  void forget(const std::string& id) const;

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Stored>> entries_;
};

// Blocks serving the API until the server is stopped.
int run_server(Service& service, const std::string& host, int port);

}  // namespace scaffolding
