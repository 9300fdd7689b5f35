#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scaffolding/dataset.hpp"
#include "scaffolding/diagnostic.hpp"
#include "scaffolding/errors.hpp"
#include "scaffolding/json_util.hpp"

namespace scaffolding {

// Field predicate operators, named as on the wire.
enum class Op { kEqual, kLt, kLte, kGt, kGte, kRange, kOneOf, kValid };

std::string_view to_string(Op op);

// A literal keeps its JSON type so canonical output reproduces it.
using Literal = std::variant<double, std::string>;

struct FieldPredicate {
  std::string field;
  Op op = Op::kEqual;
  // One operand for comparisons, two for range, any number for oneOf,
  // none for valid.
  std::vector<Literal> operands;
  bool valid = true;

  bool operator==(const FieldPredicate&) const = default;
};

class Predicate {
 public:
  enum class Kind { kLeaf, kAnd, kOr, kNot };

  static Predicate leaf(FieldPredicate fp);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
  static Predicate negate(Predicate child);

  Kind kind() const { return kind_; }
  const FieldPredicate& field_predicate() const { return leaf_; }
  const std::vector<Predicate>& children() const { return children_; }

  bool operator==(const Predicate& other) const;

 private:
  Kind kind_ = Kind::kAnd;
  FieldPredicate leaf_;
  std::vector<Predicate> children_;
};

class PredicateParseError : public Error {
 public:
  enum class Kind {
    kSyntax,
    kUnknownOperator,
    kMultipleOperators,
    kMissingField,
    kMissingOperator,
    kInvalidOperand,
  };

  PredicateParseError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(PredicateParseError::Kind kind);

// Strict parse: unknown keys, two operators on one leaf, or a leaf without
// "field" are errors.
Predicate parse_predicate(std::string_view json);
Predicate predicate_from_json(const Json& j);

Json predicate_to_json(const Predicate& p);
// Fixed key order (composition key; or field then operator), no whitespace,
// shortest round-trip numbers.
std::string canonical_json(const Predicate& p);

// UnknownField for undeclared fields; TypeMismatch when a literal cannot be
// coerced to the field's measure or an ordering operator targets a nominal
// field.
std::vector<Diagnostic> typecheck(const Predicate& p,
                                  std::span<const FieldSpec> fields);

// MalformedRange for range leaves whose lower bound exceeds the upper bound.
std::vector<Diagnostic> check_ranges(const Predicate& p,
                                     std::span<const FieldSpec> fields);

// Literal coercions shared by evaluation, validation and rendering.
std::optional<double> literal_as_number(const Literal& lit);
std::optional<Timestamp> literal_as_timestamp(const Literal& lit,
                                              std::string_view field_name);
std::string literal_as_text(const Literal& lit);
std::string display_literal(const Literal& lit);

// Total boolean semantics: comparisons against null are false, range is
// inclusive, And([]) is true, Or([]) is false. Fields absent from the record
// behave as null.
bool evaluate(const Predicate& p, const Record& record);

struct Selection {
  std::string dataset_id;
  std::vector<std::size_t> row_indices;
  std::size_t count = 0;

  bool operator==(const Selection&) const = default;
};

// strict: throw UnknownFieldError when the predicate names an undeclared
// field instead of evaluating those leaves as null.
Selection select(const Predicate& p, const Dataset& d, bool strict = false);

std::set<std::string> referenced_fields(const Predicate& p);

}  // namespace scaffolding
