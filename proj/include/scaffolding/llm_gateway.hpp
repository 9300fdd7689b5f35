#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scaffolding/dataset.hpp"
#include "scaffolding/diagnostic.hpp"
#include "scaffolding/errors.hpp"
#include "scaffolding/json_util.hpp"
#include "scaffolding/scaffold.hpp"

namespace scaffolding {

inline constexpr std::string_view kDefaultModel = "gpt-4o-mini";
inline constexpr std::string_view kDefaultBaseUrl = "https://api.openai.com/v1";
inline constexpr std::string_view kApiKeyEnv = "SCAFFOLD_LLM_API_KEY";
inline constexpr std::string_view kBaseUrlEnv = "SCAFFOLD_LLM_BASE_URL";
inline constexpr std::string_view kFixturesDirEnv = "SCAFFOLD_FIXTURES_DIR";

struct RemoteBackendSpec {
  std::string base_url{kDefaultBaseUrl};
};

struct MockBackendSpec {
  std::string fixture_id;
};

struct GenerationConfig {
  std::string model{kDefaultModel};
  double temperature = 0.2;
  int max_repair_attempts = 2;
  std::size_t max_prompt_rows = 200;
  std::variant<RemoteBackendSpec, MockBackendSpec> backend;
  // Where mock fixtures live: $SCAFFOLD_FIXTURES_DIR, else the repository's
  // fixtures/responses directory.
  std::string fixtures_dir = default_fixtures_dir();

  static std::string default_fixtures_dir();
};

// Remote backend at $SCAFFOLD_LLM_BASE_URL (or the public endpoint).
GenerationConfig config_from_env();

struct Task {
  ScaffoldKind kind = ScaffoldKind::kHighlights;
  std::string field;  // bins only

  static Task bins(std::string field) { return {ScaffoldKind::kBins, std::move(field)}; }
  static Task highlights() { return {ScaffoldKind::kHighlights, {}}; }
};

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct PromptSpec {
  Task task;
  std::string system;
  std::string user;
  Json response_schema;
  // Extra turns appended after the user message on repair attempts.
  std::vector<ChatMessage> followups;

  std::vector<ChatMessage> messages() const;
  // Every message concatenated; what the repair tests inspect.
  std::string text() const;
};

struct ChatRequest {
  std::string model;
  double temperature = 0;
  std::vector<ChatMessage> messages;
  Json response_schema;
};

// OpenAI chat-completions request body with a json_schema response format.
Json chat_request_body(const ChatRequest& request);

// Returns the assistant message content for one request.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

class FixtureError : public Error {
 public:
  using Error::Error;
};

// Replays canned response bodies in order; the last one repeats once the
// script runs out. Keeps every request for inspection.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::vector<std::string> responses);
  // Loads {dir}/{fixture_id}.json: a JSON array whose elements are response
  // objects or raw response strings.
  static MockBackend from_fixture(const std::string& dir,
                                  const std::string& fixture_id);

  std::string complete(const ChatRequest& request) override;
  const std::vector<ChatRequest>& requests() const { return requests_; }

 private:
  std::vector<std::string> responses_;
  std::vector<ChatRequest> requests_;
};

// POST {base_url}/chat/completions. 401/403 -> AuthError; connection
// failures and other non-2xx statuses -> TransportError.
class RemoteBackend : public ChatBackend {
 public:
  RemoteBackend(std::string base_url, std::string api_key);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
  std::string api_key_;
};

std::unique_ptr<ChatBackend> make_backend(const GenerationConfig& cfg);

// The JSON schema of the expected response: {"groups":[{name, explanation,
// predicate}]} with predicates in the field-predicate grammar.
Json llm_response_schema();

// Deterministic for a given dataset, task and config. Throws
// UnknownFieldError for bins over an undeclared field.
PromptSpec build_prompt(const Dataset& d, const Task& task,
                        const GenerationConfig& cfg);

// Parses an assistant reply. Throws SchemaViolation or GroupPredicateError.
ScaffoldSet parse_llm_response(std::string_view content, const Task& task,
                               const std::string& model);

ScaffoldSet generate(const PromptSpec& prompt, const GenerationConfig& cfg,
                     ChatBackend& backend);
ScaffoldSet generate(const PromptSpec& prompt, const GenerationConfig& cfg);

struct GenerationResult {
  ScaffoldSet set;
  std::vector<Diagnostic> diagnostics;
  int attempts_used = 0;
};

// Generate, validate, and re-prompt with the error messages until an
// attempt is error-free or the repair budget is spent. Warnings never cause
// a retry.
GenerationResult generate_validated(const Dataset& d, const Task& task,
                                    const GenerationConfig& cfg,
                                    ChatBackend& backend);
GenerationResult generate_validated(const Dataset& d, const Task& task,
                                    const GenerationConfig& cfg);

// The re-prompt for an attempt that produced error diagnostics.
PromptSpec repair_prompt(const PromptSpec& original,
                         std::string_view previous_response,
                         const std::vector<Diagnostic>& diagnostics);

}  // namespace scaffolding
