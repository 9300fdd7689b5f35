#include "scaffolding/predicate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace scaffolding {
namespace {

constexpr std::array<std::pair<Op, std::string_view>, 8> kOps{{
    {Op::kEqual, "equal"},
    {Op::kLt, "lt"},
    {Op::kLte, "lte"},
    {Op::kGt, "gt"},
    {Op::kGte, "gte"},
    {Op::kRange, "range"},
    {Op::kOneOf, "oneOf"},
    {Op::kValid, "valid"},
}};

std::optional<Op> op_from_key(std::string_view key) {
  for (const auto& [op, name] : kOps) {
    if (name == key) return op;
  }
  return std::nullopt;
}

bool is_ordering(Op op) {
  return op == Op::kLt || op == Op::kLte || op == Op::kGt || op == Op::kGte ||
         op == Op::kRange;
}

using ParseKind = PredicateParseError::Kind;

[[noreturn]] void fail(ParseKind kind, const std::string& msg) {
  throw PredicateParseError(kind, msg);
}

Literal literal_from_json(const Json& v, std::string_view field, Op op) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  fail(ParseKind::kInvalidOperand,
       "operand of \"" + std::string(to_string(op)) + "\" on field \"" +
           std::string(field) + "\" must be a number or a string");
}

FieldPredicate leaf_from_json(const Json& j) {
  std::optional<Op> op;
  std::string op_key;
  for (const auto& [key, _] : j.items()) {
    if (key == "field") continue;
    const auto parsed = op_from_key(key);
    if (!parsed) {
      fail(ParseKind::kUnknownOperator,
           "unknown key \"" + key + "\" in field predicate");
    }
  }
  if (!j.contains("field")) {
    fail(ParseKind::kMissingField, "field predicate " + j.dump() +
                                       " has no \"field\" key");
  }
  const Json& field_json = j.at("field");
  if (!field_json.is_string() || field_json.get<std::string>().empty()) {
    fail(ParseKind::kInvalidOperand, "\"field\" must be a non-empty string");
  }
  FieldPredicate fp;
  fp.field = field_json.get<std::string>();
  for (const auto& [key, _] : j.items()) {
    if (key == "field") continue;
    if (op) {
      fail(ParseKind::kMultipleOperators,
           "field predicate on \"" + fp.field + "\" has both \"" + op_key +
               "\" and \"" + key + "\"");
    }
    op = op_from_key(key);
    op_key = key;
  }
  if (!op) {
    fail(ParseKind::kMissingOperator,
         "field predicate on \"" + fp.field + "\" has no operator");
  }
  fp.op = *op;
  const Json& operand = j.at(op_key);
  switch (fp.op) {
    case Op::kEqual:
    case Op::kLt:
    case Op::kLte:
    case Op::kGt:
    case Op::kGte:
      fp.operands.push_back(literal_from_json(operand, fp.field, fp.op));
      break;
    case Op::kRange:
      if (!operand.is_array() || operand.size() != 2) {
        fail(ParseKind::kInvalidOperand,
             "\"range\" on field \"" + fp.field +
                 "\" must be an array of two bounds");
      }
      for (const auto& b : operand)
        fp.operands.push_back(literal_from_json(b, fp.field, fp.op));
      break;
    case Op::kOneOf:
      if (!operand.is_array()) {
        fail(ParseKind::kInvalidOperand,
             "\"oneOf\" on field \"" + fp.field + "\" must be an array");
      }
      for (const auto& b : operand)
        fp.operands.push_back(literal_from_json(b, fp.field, fp.op));
      break;
    case Op::kValid:
      if (!operand.is_boolean()) {
        fail(ParseKind::kInvalidOperand,
             "\"valid\" on field \"" + fp.field + "\" must be a boolean");
      }
      fp.valid = operand.get<bool>();
      break;
  }
  return fp;
}

Json literal_json(const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) return *d;
  return std::get<std::string>(lit);
}

const FieldSpec* find(std::span<const FieldSpec> fields, std::string_view name) {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

template <typename Fn>
void for_each_leaf(const Predicate& p, Fn&& fn) {
  if (p.kind() == Predicate::Kind::kLeaf) {
    fn(p.field_predicate());
    return;
  }
  for (const auto& c : p.children()) for_each_leaf(c, fn);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

template <typename T>
bool compare(Op op, const T& cell, const T& lit) {
  switch (op) {
    case Op::kEqual:
      return cell == lit;
    case Op::kLt:
      return cell < lit;
    case Op::kLte:
      return cell <= lit;
    case Op::kGt:
      return cell > lit;
    case Op::kGte:
      return cell >= lit;
    default:
      return false;
  }
}

// Applies op to a cell whose values have been mapped to a comparable key by
// coerce; literals that do not coerce never match.
template <typename Key, typename Coerce>
bool apply_op(const FieldPredicate& fp, const Key& cell, Coerce&& coerce) {
  switch (fp.op) {
    case Op::kEqual:
    case Op::kLt:
    case Op::kLte:
    case Op::kGt:
    case Op::kGte: {
      const std::optional<Key> lit = coerce(fp.operands[0]);
      return lit && compare(fp.op, cell, *lit);
    }
    case Op::kRange: {
      const std::optional<Key> lo = coerce(fp.operands[0]);
      const std::optional<Key> hi = coerce(fp.operands[1]);
      return lo && hi && *lo <= cell && cell <= *hi;
    }
    case Op::kOneOf:
      return std::any_of(fp.operands.begin(), fp.operands.end(),
                         [&](const Literal& l) {
                           const std::optional<Key> k = coerce(l);
                           return k && *k == cell;
                         });
    case Op::kValid:
      return fp.valid;
  }
  return false;
}

bool evaluate_leaf(const FieldPredicate& fp, const DataValue& cell) {
  if (fp.op == Op::kValid) return is_null(cell) != fp.valid;
  if (const auto* x = std::get_if<double>(&cell)) {
    return apply_op(fp, *x, [](const Literal& l) { return literal_as_number(l); });
  }
  if (const auto* t = std::get_if<Timestamp>(&cell)) {
    return apply_op(fp, t->epoch_ms, [&fp](const Literal& l) {
      const auto ts = literal_as_timestamp(l, fp.field);
      return ts ? std::optional<std::int64_t>(ts->epoch_ms) : std::nullopt;
    });
  }
  if (const auto* s = std::get_if<std::string>(&cell)) {
    if (is_ordering(fp.op)) return false;
    return apply_op(fp, *s, [](const Literal& l) {
      return std::optional<std::string>(literal_as_text(l));
    });
  }
  return false;
}

}  // namespace

std::string_view to_string(Op op) {
  for (const auto& [o, name] : kOps) {
    if (o == op) return name;
  }
  return "equal";
}

std::string_view to_string(PredicateParseError::Kind kind) {
  switch (kind) {
    case ParseKind::kSyntax:
      return "SyntaxError";
    case ParseKind::kUnknownOperator:
      return "UnknownOperator";
    case ParseKind::kMultipleOperators:
      return "MultipleOperators";
    case ParseKind::kMissingField:
      return "MissingField";
    case ParseKind::kMissingOperator:
      return "MissingOperator";
    case ParseKind::kInvalidOperand:
      return "InvalidOperand";
  }
  return "SyntaxError";
}

Predicate Predicate::leaf(FieldPredicate fp) {
  Predicate p;
  p.kind_ = Kind::kLeaf;
  p.leaf_ = std::move(fp);
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  Predicate p;
  p.kind_ = Kind::kAnd;
  p.children_ = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  Predicate p;
  p.kind_ = Kind::kOr;
  p.children_ = std::move(children);
  return p;
}

Predicate Predicate::negate(Predicate child) {
  Predicate p;
  p.kind_ = Kind::kNot;
  p.children_.push_back(std::move(child));
  return p;
}

bool Predicate::operator==(const Predicate& other) const {
  return kind_ == other.kind_ && leaf_ == other.leaf_ &&
         children_ == other.children_;
}

Predicate predicate_from_json(const Json& j) {
  if (!j.is_object()) {
    fail(ParseKind::kInvalidOperand,
         "predicate must be a JSON object, got " + j.dump());
  }
  std::vector<std::string> compositions;
  for (const auto& key : {"and", "or", "not"}) {
    if (j.contains(key)) compositions.emplace_back(key);
  }
  if (compositions.empty()) return Predicate::leaf(leaf_from_json(j));

  if (compositions.size() > 1) {
    fail(ParseKind::kMultipleOperators,
         "predicate node combines \"" + compositions[0] + "\" and \"" +
             compositions[1] + "\"");
  }
  const std::string& key = compositions.front();
  for (const auto& [k, _] : j.items()) {
    if (k == key) continue;
    if (k == "field" || op_from_key(k)) {
      fail(ParseKind::kMultipleOperators,
           "predicate node mixes \"" + key + "\" with \"" + k + "\"");
    }
    fail(ParseKind::kUnknownOperator,
         "unknown key \"" + k + "\" next to \"" + key + "\"");
  }
  const Json& body = j.at(key);
  if (key == "not") {
    if (!body.is_object()) {
      fail(ParseKind::kInvalidOperand, "\"not\" must hold a predicate object");
    }
    return Predicate::negate(predicate_from_json(body));
  }
  if (!body.is_array()) {
    fail(ParseKind::kInvalidOperand,
         "\"" + key + "\" must hold an array of predicates");
  }
  std::vector<Predicate> children;
  children.reserve(body.size());
  for (const auto& c : body) children.push_back(predicate_from_json(c));
  return key == "and" ? Predicate::all_of(std::move(children))
                      : Predicate::any_of(std::move(children));
}

Predicate parse_predicate(std::string_view json) {
  Json j;
  try {
    j = Json::parse(json);
  } catch (const Json::parse_error& e) {
    fail(ParseKind::kSyntax, std::string("predicate is not valid JSON: ") + e.what());
  }
  return predicate_from_json(j);
}

Json predicate_to_json(const Predicate& p) {
  Json j = Json::object();
  switch (p.kind()) {
    case Predicate::Kind::kLeaf: {
      const auto& fp = p.field_predicate();
      j["field"] = fp.field;
      const std::string key(to_string(fp.op));
      switch (fp.op) {
        case Op::kRange:
        case Op::kOneOf: {
          Json arr = Json::array();
          for (const auto& l : fp.operands) arr.push_back(literal_json(l));
          j[key] = std::move(arr);
          break;
        }
        case Op::kValid:
          j[key] = fp.valid;
          break;
        default:
          j[key] = literal_json(fp.operands.at(0));
          break;
      }
      return j;
    }
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr: {
      Json arr = Json::array();
      for (const auto& c : p.children()) arr.push_back(predicate_to_json(c));
      j[p.kind() == Predicate::Kind::kAnd ? "and" : "or"] = std::move(arr);
      return j;
    }
    case Predicate::Kind::kNot:
      j["not"] = predicate_to_json(p.children().front());
      return j;
  }
  return j;
}

std::string canonical_json(const Predicate& p) {
  return canonical_dump(predicate_to_json(p));
}

std::optional<double> literal_as_number(const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) return *d;
  return parse_number(std::get<std::string>(lit));
}

std::optional<Timestamp> literal_as_timestamp(const Literal& lit,
                                              std::string_view field_name) {
  const bool bare_year = header_allows_bare_year(field_name);
  if (const auto* s = std::get_if<std::string>(&lit)) {
    return parse_timestamp(*s, bare_year);
  }
  const double d = std::get<double>(lit);
  if (bare_year && d == std::floor(d) && d >= 1000 && d <= 9999) {
    return parse_timestamp(format_number(d), true);
  }
  return std::nullopt;
}

std::string literal_as_text(const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) return format_number(*d);
  return std::get<std::string>(lit);
}

std::string display_literal(const Literal& lit) { return literal_as_text(lit); }

std::vector<Diagnostic> typecheck(const Predicate& p,
                                  std::span<const FieldSpec> fields) {
  std::vector<Diagnostic> out;
  for_each_leaf(p, [&](const FieldPredicate& fp) {
    const FieldSpec* spec = find(fields, fp.field);
    if (!spec) {
      std::string known;
      for (const auto& f : fields) {
        if (!known.empty()) known += ", ";
        known += f.name;
      }
      out.push_back(make_error(DiagnosticCode::kUnknownField,
                               "predicate references unknown field " +
                                   quoted(fp.field) + " (fields: " + known + ")"));
      return;
    }
    if (fp.op == Op::kValid) return;
    const std::string op(to_string(fp.op));
    if (spec->measure == Measure::kNominal) {
      if (is_ordering(fp.op)) {
        out.push_back(make_error(DiagnosticCode::kTypeMismatch,
                                 "operator " + quoted(op) +
                                     " cannot be applied to nominal field " +
                                     quoted(fp.field)));
      }
      return;
    }
    for (const auto& lit : fp.operands) {
      const bool ok = spec->measure == Measure::kQuantitative
                          ? literal_as_number(lit).has_value()
                          : literal_as_timestamp(lit, fp.field).has_value();
      if (!ok) {
        out.push_back(make_error(
            DiagnosticCode::kTypeMismatch,
            "literal " + quoted(literal_as_text(lit)) + " in " + quoted(op) +
                " is not a valid " +
                (spec->measure == Measure::kQuantitative ? "number" : "date") +
                " for " + std::string(to_string(spec->measure)) + " field " +
                quoted(fp.field)));
      }
    }
  });
  return out;
}

std::vector<Diagnostic> check_ranges(const Predicate& p,
                                     std::span<const FieldSpec> fields) {
  std::vector<Diagnostic> out;
  for_each_leaf(p, [&](const FieldPredicate& fp) {
    if (fp.op != Op::kRange) return;
    const FieldSpec* spec = find(fields, fp.field);
    bool reversed = false;
    if (spec && spec->measure == Measure::kTemporal) {
      const auto lo = literal_as_timestamp(fp.operands[0], fp.field);
      const auto hi = literal_as_timestamp(fp.operands[1], fp.field);
      reversed = lo && hi && lo->epoch_ms > hi->epoch_ms;
    } else if (!spec || spec->measure == Measure::kQuantitative) {
      const auto lo = literal_as_number(fp.operands[0]);
      const auto hi = literal_as_number(fp.operands[1]);
      reversed = lo && hi && *lo > *hi;
    }
    if (reversed) {
      out.push_back(make_error(
          DiagnosticCode::kMalformedRange,
          "range on field " + quoted(fp.field) + " has lower bound " +
              literal_as_text(fp.operands[0]) + " greater than upper bound " +
              literal_as_text(fp.operands[1]) + ", so it matches no records"));
    }
  });
  return out;
}

bool evaluate(const Predicate& p, const Record& record) {
  switch (p.kind()) {
    case Predicate::Kind::kLeaf: {
      const auto& fp = p.field_predicate();
      const auto it = record.find(fp.field);
      static const DataValue kNull{};
      return evaluate_leaf(fp, it == record.end() ? kNull : it->second);
    }
    case Predicate::Kind::kAnd:
      return std::all_of(p.children().begin(), p.children().end(),
                         [&](const Predicate& c) { return evaluate(c, record); });
    case Predicate::Kind::kOr:
      return std::any_of(p.children().begin(), p.children().end(),
                         [&](const Predicate& c) { return evaluate(c, record); });
    case Predicate::Kind::kNot:
      return !evaluate(p.children().front(), record);
  }
  return false;
}

Selection select(const Predicate& p, const Dataset& d, bool strict) {
  if (strict) {
    for (const auto& name : referenced_fields(p)) {
      if (!d.find_field(name)) {
        throw UnknownFieldError("predicate references unknown field \"" + name +
                                "\"");
      }
    }
  }
  Selection s;
  s.dataset_id = d.id();
  const auto& records = d.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (evaluate(p, records[i])) s.row_indices.push_back(i);
  }
  s.count = s.row_indices.size();
  return s;
}

std::set<std::string> referenced_fields(const Predicate& p) {
  std::set<std::string> out;
  for_each_leaf(p, [&](const FieldPredicate& fp) { out.insert(fp.field); });
  return out;
}

}  // namespace scaffolding
