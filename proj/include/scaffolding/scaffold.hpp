#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scaffolding/dataset.hpp"
#include "scaffolding/diagnostic.hpp"
#include "scaffolding/predicate.hpp"

namespace scaffolding {

// One grouping: a short name, a prose explanation, and the predicate that
// defines its members.
struct SemanticScaffold {
  std::string name;
  std::string explanation;
  Predicate predicate;

  bool operator==(const SemanticScaffold&) const = default;
};

enum class ScaffoldKind { kBins, kHighlights };

std::string_view to_string(ScaffoldKind kind);

struct Provenance {
  enum class Source { kLlm, kFallback, kManual };

  Source source = Source::kManual;
  std::string model;  // kLlm only
  int attempts = 0;   // kLlm only

  bool operator==(const Provenance&) const = default;
};

// Bins partition one field; every group of a bin set references exactly
// that field. Highlights may reference any fields.
struct ScaffoldSet {
  ScaffoldKind kind = ScaffoldKind::kHighlights;
  std::string field;  // kBins only
  std::vector<SemanticScaffold> groups;
  Provenance provenance;

  bool operator==(const ScaffoldSet&) const = default;
};

// A predicate in a "groups" array failed to parse.
class GroupPredicateError : public PredicateParseError {
 public:
  GroupPredicateError(int group_index, const PredicateParseError& cause)
      : PredicateParseError(cause.kind(),
                            "group " + std::to_string(group_index) + ": " +
                                cause.what()),
        group_index_(group_index) {}
  int group_index() const { return group_index_; }

 private:
  int group_index_;
};

// Real-valued interval; temporal values are epoch milliseconds. Unbounded
// ends use +-infinity.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool empty() const;
  bool contains(double x) const;
  bool operator==(const Interval&) const = default;
};

// The interval a bin predicate denotes: a range, an equal, a single bound,
// or a conjunction of such leaves on the field. nullopt for other shapes.
std::optional<Interval> bin_interval(const Predicate& p, const FieldSpec& field);

std::string format_interval(const Interval& iv, const FieldSpec& field);

// typecheck + range checks; when those pass, EmptySelection (error),
// UniversalSelection (warning) and OutOfExtent (warning).
std::vector<Diagnostic> validate_highlight(
    const SemanticScaffold& s, const Dataset& d,
    std::optional<int> group_index = std::nullopt);

// Continuous fields: disjoint intervals covering [min, max] (checked on a
// 1001-point grid plus every data value). Nominal fields: groups that use
// each category exactly once. Throws NotABinPredicate for groups on another
// field or of a non-bin shape, UnknownFieldError when the field is missing.
std::vector<Diagnostic> validate_bin_set(const ScaffoldSet& set,
                                         const Dataset& d);

// TemporalOutOfScope for 4-digit years (1000-2999) in the name or
// explanation that fall outside every temporal field's extent.
std::vector<Diagnostic> scan_explanation_context(
    const SemanticScaffold& s, const Dataset& d,
    std::optional<int> group_index = std::nullopt);

// LowInformationSchema when at least half the field names are generic.
std::vector<Diagnostic> schema_information_check(const Dataset& d);

bool is_generic_field_name(std::string_view name);

// k equal-width bins, lower-inclusive with the last bin closed. A zero-width
// extent yields a single bin. Throws FieldNotContinuous / UnknownFieldError.
ScaffoldSet equal_width_bins(const Dataset& d, std::string_view field, int k);

// Everything a scaffold set must pass before it is shown: the schema check,
// the per-kind validator, and the explanation scan for every group.
std::vector<Diagnostic> validate_scaffold_set(const ScaffoldSet& set,
                                              const Dataset& d);

Json scaffold_to_json(const SemanticScaffold& s);
Json to_json(const ScaffoldSet& set);

// Parses a "groups" array. Throws SchemaViolation for shape problems and
// GroupPredicateError for bad predicates.
std::vector<SemanticScaffold> groups_from_json(const Json& groups,
                                               bool require_explanation);

// Accepts a full set document or a bare {"groups":[...]} (read as
// highlights, or bins when default_bin_field is given).
ScaffoldSet scaffold_set_from_json(
    const Json& j, std::optional<std::string> default_bin_field = std::nullopt);

}  // namespace scaffolding
