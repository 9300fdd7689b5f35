#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scaffolding/json_util.hpp"

namespace scaffolding {

enum class DiagnosticCode {
  kUnknownField,
  kTypeMismatch,
  kMalformedRange,
  kEmptySelection,
  kUniversalSelection,
  kOverlappingBins,
  kCoverageGap,
  kNonExclusiveGroups,
  kNonExhaustiveGroups,
  kOutOfExtent,
  kTemporalOutOfScope,
  kLowInformationSchema,
  kSchemaViolation,
};

enum class Severity { kError, kWarning };

// A coded validation finding. message names the concrete fields and values
// involved so it can be shown to a reader or fed back to the model verbatim.
struct Diagnostic {
  DiagnosticCode code = DiagnosticCode::kSchemaViolation;
  Severity severity = Severity::kError;
  std::string message;
  std::optional<int> group_index;

  bool operator==(const Diagnostic&) const = default;
};

std::string_view to_string(DiagnosticCode code);
std::optional<DiagnosticCode> diagnostic_code_from_string(std::string_view s);
std::string_view to_string(Severity s);

Diagnostic make_error(DiagnosticCode code, std::string message,
                      std::optional<int> group_index = std::nullopt);
Diagnostic make_warning(DiagnosticCode code, std::string message,
                        std::optional<int> group_index = std::nullopt);

bool has_errors(std::span<const Diagnostic> diagnostics);
bool contains_code(std::span<const Diagnostic> diagnostics, DiagnosticCode code);

// {"code","severity","message","groupIndex"}; groupIndex is null when absent.
Json to_json(const Diagnostic& d);
Json to_json(std::span<const Diagnostic> diagnostics);
Diagnostic diagnostic_from_json(const Json& j);

}  // namespace scaffolding
