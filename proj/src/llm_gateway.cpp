#include "scaffolding/llm_gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace scaffolding {
namespace {

constexpr std::size_t kSummaryCategoryLimit = 50;

std::string quote(std::string_view s) { return Json(std::string(s)).dump(); }

std::string env_or(std::string_view name, std::string_view fallback) {
  const char* v = std::getenv(std::string(name).c_str());
  return v && *v ? std::string(v) : std::string(fallback);
}

std::string csv_cell(const DataValue& v) {
  if (is_null(v)) return "";
  std::string s = display_value(v);
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string describe_extent(const FieldSpec& f, std::size_t category_limit) {
  if (const auto* q = std::get_if<QuantitativeExtent>(&f.extent)) {
    return format_number(q->min) + " to " + format_number(q->max);
  }
  if (const auto* t = std::get_if<TemporalExtent>(&f.extent)) {
    return t->min.lexical + " to " + t->max.lexical;
  }
  const auto& cats = std::get<NominalExtent>(f.extent).categories;
  std::string out = std::to_string(cats.size()) + " categories: ";
  for (std::size_t i = 0; i < cats.size() && i < category_limit; ++i) {
    if (i > 0) out += ", ";
    out += quote(cats[i].category) + " (" + std::to_string(cats[i].count) + ")";
  }
  if (cats.size() > category_limit) {
    out += ", and " + std::to_string(cats.size() - category_limit) + " more";
  }
  return out;
}

constexpr std::string_view kSystemPrompt =
    "You help readers understand unfamiliar datasets by proposing semantically "
    "meaningful groupings of the data, drawing on real-world knowledge of the "
    "data's domain.\n"
    "Reply with JSON only, matching the provided schema: an object with a "
    "\"groups\" array. Each group has a short \"name\", an \"explanation\" of "
    "its real-world meaning, and a \"predicate\" that defines exactly which "
    "records belong to it.\n"
    "Predicates use Vega-Lite field predicates and logical composition:\n"
    "- {\"field\": F, \"equal\": v}\n"
    "- {\"field\": F, \"lt\" | \"lte\" | \"gt\" | \"gte\": v}\n"
    "- {\"field\": F, \"range\": [low, high]}  (inclusive, low <= high)\n"
    "- {\"field\": F, \"oneOf\": [v1, v2, ...]}\n"
    "- {\"field\": F, \"valid\": true | false}  (value present / missing)\n"
    "- {\"and\": [p1, p2, ...]}, {\"or\": [p1, p2, ...]}, {\"not\": p}\n"
    "Use only the field names listed in the dataset description, write dates "
    "as YYYY-MM-DD, and keep every literal within the values the field "
    "actually takes.";

std::string task_text(const Dataset& d, const Task& task) {
  std::ostringstream out;
  if (task.kind == ScaffoldKind::kHighlights) {
    out << "Task: identify between 3 and 7 data highlights. A data highlight is "
           "a subset of records that is interesting in light of real-world "
           "knowledge about this domain; its predicate can combine several "
           "fields. Each explanation should connect the selected records to "
           "their real-world meaning. Each predicate must select at least one "
           "record but not every record. Only refer to events and context that "
           "fall within the time span the data covers.";
    return out.str();
  }
  const FieldSpec& f = d.field(task.field);
  if (f.is_continuous()) {
    out << "Task: divide the " << to_string(f.measure) << " field "
        << quote(f.name)
        << " into semantic bins that reflect how a reader would make sense of "
           "its values in this domain, each with a name and an explanation. "
           "Every predicate must involve only the field "
        << quote(f.name)
        << ". The bins must be non-overlapping intervals that together cover "
           "the full extent of the data, from "
        << describe_extent(f, 0)
        << ". Make each bin lower-inclusive, e.g. {\"and\": [{\"field\": "
        << quote(f.name) << ", \"gte\": low}, {\"field\": " << quote(f.name)
        << ", \"lt\": high}]}, and close the last bin with \"lte\" so the "
           "maximum is included.";
    return out.str();
  }
  const auto& cats = std::get<NominalExtent>(f.extent).categories;
  out << "Task: group the categories of the nominal field " << quote(f.name)
      << " into higher-level groupings, each with a name and an explanation. "
         "Every predicate must use only the field "
      << quote(f.name)
      << " with \"oneOf\" (or \"equal\" for a single category). The groupings "
         "must be mutually exclusive and exhaustively cover all categories: "
         "each of the following "
      << cats.size() << " categories must appear in exactly one group.\n"
      << "Categories: ";
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (i > 0) out << ", ";
    out << quote(cats[i].category);
  }
  return out.str();
}

Json predicate_schema() {
  const Json scalar = {{"type", Json::array({"number", "string"})}};
  const Json ref = {{"$ref", "#/$defs/predicate"}};
  Json variants = Json::array();
  auto object_with = [](Json properties, Json required) {
    return Json{{"type", "object"},
                {"properties", std::move(properties)},
                {"required", std::move(required)},
                {"additionalProperties", false}};
  };
  variants.push_back(object_with({{"and", {{"type", "array"}, {"items", ref}}}},
                                 Json::array({"and"})));
  variants.push_back(object_with({{"or", {{"type", "array"}, {"items", ref}}}},
                                 Json::array({"or"})));
  variants.push_back(object_with({{"not", ref}}, Json::array({"not"})));
  for (const char* op : {"equal", "lt", "lte", "gt", "gte"}) {
    variants.push_back(object_with({{"field", {{"type", "string"}}}, {op, scalar}},
                                   Json::array({"field", op})));
  }
  variants.push_back(object_with(
      {{"field", {{"type", "string"}}},
       {"range", {{"type", "array"}, {"items", scalar}, {"minItems", 2}, {"maxItems", 2}}}},
      Json::array({"field", "range"})));
  variants.push_back(object_with(
      {{"field", {{"type", "string"}}}, {"oneOf", {{"type", "array"}, {"items", scalar}}}},
      Json::array({"field", "oneOf"})));
  variants.push_back(object_with(
      {{"field", {{"type", "string"}}}, {"valid", {{"type", "boolean"}}}},
      Json::array({"field", "valid"})));
  return Json{{"anyOf", std::move(variants)}};
}

std::string strip_code_fence(std::string_view s) {
  s = trim(s);
  if (s.substr(0, 3) != "```") return std::string(s);
  const auto first_newline = s.find('\n');
  const auto last_fence = s.rfind("```");
  if (first_newline == std::string_view::npos || last_fence <= first_newline) {
    return std::string(s);
  }
  return std::string(trim(s.substr(first_newline + 1, last_fence - first_newline - 1)));
}

ChatRequest request_for(const PromptSpec& prompt, const GenerationConfig& cfg) {
  return ChatRequest{cfg.model, cfg.temperature, prompt.messages(),
                     prompt.response_schema};
}

Diagnostic schema_violation(const std::string& message,
                            std::optional<int> group_index = std::nullopt) {
  return make_error(DiagnosticCode::kSchemaViolation, message, group_index);
}

}  // namespace

std::string GenerationConfig::default_fixtures_dir() {
#ifdef SCAFFOLD_DEFAULT_FIXTURES_DIR
  return env_or(kFixturesDirEnv, SCAFFOLD_DEFAULT_FIXTURES_DIR);
#else
  return env_or(kFixturesDirEnv, "fixtures/responses");
#endif
}

GenerationConfig config_from_env() {
  GenerationConfig cfg;
  cfg.backend = RemoteBackendSpec{env_or(kBaseUrlEnv, kDefaultBaseUrl)};
  return cfg;
}

std::vector<ChatMessage> PromptSpec::messages() const {
  std::vector<ChatMessage> out{{"system", system}, {"user", user}};
  out.insert(out.end(), followups.begin(), followups.end());
  return out;
}

std::string PromptSpec::text() const {
  std::string out;
  for (const auto& m : messages()) {
    out += m.content;
    out += '\n';
  }
  return out;
}

Json chat_request_body(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"role", m.role}, {"content", m.content}});
  }
  Json body = Json::object();
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = std::move(messages);
  body["response_format"] = Json{
      {"type", "json_schema"},
      {"json_schema",
       {{"name", "semantic_scaffolds"}, {"schema", request.response_schema}, {"strict", false}}}};
  return body;
}

MockBackend::MockBackend(std::vector<std::string> responses)
    : responses_(std::move(responses)) {
  if (responses_.empty()) throw FixtureError("mock backend needs at least one response");
}

MockBackend MockBackend::from_fixture(const std::string& dir,
                                      const std::string& fixture_id) {
  if (fixture_id.empty() || fixture_id.find('/') != std::string::npos ||
      fixture_id.find("..") != std::string::npos) {
    throw FixtureError("invalid mock fixture id \"" + fixture_id + "\"");
  }
  const std::string path = dir + "/" + fixture_id + ".json";
  std::ifstream in(path);
  if (!in) throw FixtureError("mock fixture \"" + fixture_id + "\" not found in " + dir);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FixtureError("mock fixture \"" + fixture_id + "\" is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) {
    throw FixtureError("mock fixture \"" + fixture_id + "\" must be a JSON array");
  }
  std::vector<std::string> responses;
  for (const auto& r : doc) {
    responses.push_back(r.is_string() ? r.get<std::string>() : canonical_dump(r));
  }
  return MockBackend(std::move(responses));
}

std::string MockBackend::complete(const ChatRequest& request) {
  const std::size_t i = std::min(requests_.size(), responses_.size() - 1);
  requests_.push_back(request);
  return responses_[i];
}

RemoteBackend::RemoteBackend(std::string base_url, std::string api_key)
    : api_key_(std::move(api_key)) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme_end = base_url.find("://");
  const auto path_start =
      base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = base_url;
  } else {
    origin_ = base_url.substr(0, path_start);
    path_prefix_ = base_url.substr(path_start);
  }
}

std::string RemoteBackend::complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  if (!client.is_valid()) throw TransportError("invalid LLM base URL " + origin_);
  client.set_connection_timeout(10);
  client.set_read_timeout(180);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const std::string body = canonical_dump(chat_request_body(request));
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body,
                         "application/json");
  if (!res) {
    throw TransportError("LLM request to " + origin_ + " failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw AuthError("LLM endpoint rejected the credentials (HTTP " +
                    std::to_string(res->status) + "); set " +
                    std::string(kApiKeyEnv));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  Json doc;
  try {
    doc = Json::parse(res->body);
  } catch (const Json::parse_error&) {
    throw SchemaViolation("LLM endpoint returned a non-JSON body");
  }
  const Json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const Json& choice = doc["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      content = &choice["message"]["content"];
    }
  }
  if (!content) throw SchemaViolation("LLM reply has no choices[0].message.content");
  return content->get<std::string>();
}

std::unique_ptr<ChatBackend> make_backend(const GenerationConfig& cfg) {
  if (const auto* mock = std::get_if<MockBackendSpec>(&cfg.backend)) {
    return std::make_unique<MockBackend>(
        MockBackend::from_fixture(cfg.fixtures_dir, mock->fixture_id));
  }
  return std::make_unique<RemoteBackend>(std::get<RemoteBackendSpec>(cfg.backend).base_url,
                                         env_or(kApiKeyEnv, ""));
}

Json llm_response_schema() {
  Json group = {
      {"type", "object"},
      {"properties",
       {{"name", {{"type", "string"}}},
        {"explanation", {{"type", "string"}}},
        {"predicate", {{"$ref", "#/$defs/predicate"}}}}},
      {"required", Json::array({"name", "explanation", "predicate"})},
      {"additionalProperties", false}};
  return Json{{"type", "object"},
              {"properties", {{"groups", {{"type", "array"}, {"items", std::move(group)}}}}},
              {"required", Json::array({"groups"})},
              {"additionalProperties", false},
              {"$defs", {{"predicate", predicate_schema()}}}};
}

PromptSpec build_prompt(const Dataset& d, const Task& task,
                        const GenerationConfig& cfg) {
  if (task.kind == ScaffoldKind::kBins) d.field(task.field);

  std::ostringstream user;
  user << "Dataset " << quote(d.name()) << " has " << d.row_count()
       << " records and " << d.fields().size() << " fields:\n";
  for (const auto& f : d.fields()) {
    user << "- " << f.name << " (" << to_string(f.measure)
         << "): " << describe_extent(f, kSummaryCategoryLimit) << "\n";
  }

  const auto rows = sample_row_indices(d, cfg.max_prompt_rows, 0);
  user << "\nRecords (" << rows.size() << " of " << d.row_count()
       << (rows.size() < d.row_count() ? ", uniformly sampled" : "") << "):\n";
  for (std::size_t c = 0; c < d.fields().size(); ++c) {
    user << (c ? "," : "") << csv_cell(d.fields()[c].name);
  }
  user << "\n";
  for (std::size_t i : rows) {
    const Record& r = d.records()[i];
    for (std::size_t c = 0; c < d.fields().size(); ++c) {
      user << (c ? "," : "") << csv_cell(r.find(d.fields()[c].name)->second);
    }
    user << "\n";
  }
  user << "\n" << task_text(d, task);

  PromptSpec p;
  p.task = task;
  p.system = std::string(kSystemPrompt);
  p.user = user.str();
  p.response_schema = llm_response_schema();
  return p;
}

ScaffoldSet parse_llm_response(std::string_view content, const Task& task,
                               const std::string& model) {
  Json doc;
  try {
    doc = Json::parse(strip_code_fence(content));
  } catch (const Json::parse_error& e) {
    throw SchemaViolation(std::string("response is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaViolation("response must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "groups") {
      throw SchemaViolation("response has unexpected key \"" + key + "\"");
    }
  }
  if (!doc.contains("groups")) throw SchemaViolation("response has no \"groups\" array");

  ScaffoldSet set;
  set.kind = task.kind;
  set.field = task.kind == ScaffoldKind::kBins ? task.field : "";
  set.groups = groups_from_json(doc.at("groups"), true);
  set.provenance = Provenance{Provenance::Source::kLlm, model, 1};
  return set;
}

ScaffoldSet generate(const PromptSpec& prompt, const GenerationConfig& cfg,
                     ChatBackend& backend) {
  const std::string content = backend.complete(request_for(prompt, cfg));
  return parse_llm_response(content, prompt.task, cfg.model);
}

ScaffoldSet generate(const PromptSpec& prompt, const GenerationConfig& cfg) {
  auto backend = make_backend(cfg);
  return generate(prompt, cfg, *backend);
}

PromptSpec repair_prompt(const PromptSpec& original,
                         std::string_view previous_response,
                         const std::vector<Diagnostic>& diagnostics) {
  std::vector<std::string> messages;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::kError) continue;
    if (std::find(messages.begin(), messages.end(), d.message) == messages.end()) {
      messages.push_back(d.message);
    }
  }
  std::string feedback = "Your previous response had these problems:\n";
  for (const auto& m : messages) feedback += "- " + m + "\n";
  feedback +=
      "Return a corrected response with the same JSON structure that fixes "
      "every problem listed.";

  PromptSpec p = original;
  p.followups = {{"assistant", std::string(previous_response)}, {"user", feedback}};
  return p;
}

GenerationResult generate_validated(const Dataset& d, const Task& task,
                                    const GenerationConfig& cfg,
                                    ChatBackend& backend) {
  const PromptSpec base = build_prompt(d, task, cfg);
  PromptSpec prompt = base;
  const int max_attempts = 1 + std::max(0, cfg.max_repair_attempts);

  for (int attempt = 1;; ++attempt) {
    const std::string content = backend.complete(request_for(prompt, cfg));
    const bool last = attempt == max_attempts;

    std::optional<ScaffoldSet> set;
    std::vector<Diagnostic> diagnostics;
    try {
      set = parse_llm_response(content, task, cfg.model);
      set->provenance.attempts = attempt;
      diagnostics = validate_scaffold_set(*set, d);
    } catch (const GroupPredicateError& e) {
      if (last) throw;
      diagnostics = {schema_violation(e.what(), e.group_index())};
    } catch (const SchemaViolation& e) {
      if (last) throw;
      diagnostics = {schema_violation(e.what())};
    } catch (const NotABinPredicate& e) {
      diagnostics = {schema_violation(e.what(), e.group_index())};
    }

    if (set && (!has_errors(diagnostics) || last)) {
      return GenerationResult{std::move(*set), std::move(diagnostics), attempt};
    }
    prompt = repair_prompt(base, content, diagnostics);
  }
}

GenerationResult generate_validated(const Dataset& d, const Task& task,
                                    const GenerationConfig& cfg) {
  auto backend = make_backend(cfg);
  return generate_validated(d, task, cfg, *backend);
}

}  // namespace scaffolding
