#include "scaffolding/diagnostic.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "scaffolding/errors.hpp"

namespace scaffolding {
namespace {

constexpr std::array<std::pair<DiagnosticCode, std::string_view>, 13> kCodes{{
    {DiagnosticCode::kUnknownField, "UnknownField"},
    {DiagnosticCode::kTypeMismatch, "TypeMismatch"},
    {DiagnosticCode::kMalformedRange, "MalformedRange"},
    {DiagnosticCode::kEmptySelection, "EmptySelection"},
    {DiagnosticCode::kUniversalSelection, "UniversalSelection"},
    {DiagnosticCode::kOverlappingBins, "OverlappingBins"},
    {DiagnosticCode::kCoverageGap, "CoverageGap"},
    {DiagnosticCode::kNonExclusiveGroups, "NonExclusiveGroups"},
    {DiagnosticCode::kNonExhaustiveGroups, "NonExhaustiveGroups"},
    {DiagnosticCode::kOutOfExtent, "OutOfExtent"},
    {DiagnosticCode::kTemporalOutOfScope, "TemporalOutOfScope"},
    {DiagnosticCode::kLowInformationSchema, "LowInformationSchema"},
    {DiagnosticCode::kSchemaViolation, "SchemaViolation"},
}};

}  // namespace

std::string_view to_string(DiagnosticCode code) {
  for (const auto& [c, name] : kCodes) {
    if (c == code) return name;
  }
  return "SchemaViolation";
}

std::optional<DiagnosticCode> diagnostic_code_from_string(std::string_view s) {
  for (const auto& [c, name] : kCodes) {
    if (name == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

Diagnostic make_error(DiagnosticCode code, std::string message,
                      std::optional<int> group_index) {
  return Diagnostic{code, Severity::kError, std::move(message), group_index};
}

Diagnostic make_warning(DiagnosticCode code, std::string message,
                        std::optional<int> group_index) {
  return Diagnostic{code, Severity::kWarning, std::move(message), group_index};
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) {
                       return d.severity == Severity::kError;
                     });
}

bool contains_code(std::span<const Diagnostic> diagnostics,
                   DiagnosticCode code) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [code](const Diagnostic& d) { return d.code == code; });
}

Json to_json(const Diagnostic& d) {
  Json j = Json::object();
  j["code"] = to_string(d.code);
  j["severity"] = to_string(d.severity);
  j["message"] = d.message;
  j["groupIndex"] = d.group_index ? Json(*d.group_index) : Json(nullptr);
  return j;
}

Json to_json(std::span<const Diagnostic> diagnostics) {
  Json arr = Json::array();
  for (const auto& d : diagnostics) arr.push_back(to_json(d));
  return arr;
}

Diagnostic diagnostic_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("code") || !j.contains("severity") ||
      !j.contains("message")) {
    throw SchemaViolation("diagnostic must have code, severity and message");
  }
  Diagnostic d;
  const auto code = diagnostic_code_from_string(j.at("code").get<std::string>());
  if (!code) throw SchemaViolation("unknown diagnostic code");
  d.code = *code;
  const auto sev = j.at("severity").get<std::string>();
  if (sev != "error" && sev != "warning") {
    throw SchemaViolation("unknown diagnostic severity: " + sev);
  }
  d.severity = sev == "error" ? Severity::kError : Severity::kWarning;
  d.message = j.at("message").get<std::string>();
  if (j.contains("groupIndex") && !j.at("groupIndex").is_null()) {
    d.group_index = j.at("groupIndex").get<int>();
  }
  return d;
}

}  // namespace scaffolding
