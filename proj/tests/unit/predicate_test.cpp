#include <gtest/gtest.h>

#include "scaffolding/errors.hpp"
#include "scaffolding/predicate.hpp"

namespace scaffolding {
namespace {

const Dataset& table() {
  static const Dataset d = ingest(
      "name,mpg,origin,year\n"
      "a,30,Japan,1970\n"
      "b,15,USA,1975\n"
      "c,,Japan,1980\n"
      "d,25,Europe,\n",
      DataFormat::kCsv);
  return d;
}

Selection sel(std::string_view json) { return select(parse_predicate(json), table()); }

std::vector<std::size_t> rows(std::string_view json) { return sel(json).row_indices; }

PredicateParseError::Kind parse_error_kind(std::string_view json) {
  try {
    parse_predicate(json);
  } catch (const PredicateParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << json;
  return PredicateParseError::Kind::kSyntax;
}

TEST(ParsePredicate, CanonicalOrderAndNumbers) {
  EXPECT_EQ(canonical_json(parse_predicate(R"({"gte": 150.0, "field": "price"})")),
            R"({"field":"price","gte":150})");
  EXPECT_EQ(canonical_json(parse_predicate(R"({"not": {"field":"x","valid":true}})")),
            R"({"not":{"field":"x","valid":true}})");
  EXPECT_EQ(canonical_json(parse_predicate(R"({"or": []})")), R"({"or":[]})");
}

TEST(ParsePredicate, ErrorKinds) {
  using K = PredicateParseError::Kind;
  EXPECT_EQ(parse_error_kind("{"), K::kSyntax);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","greaterThan":1})"), K::kUnknownOperator);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","lt":1,"gt":0})"), K::kMultipleOperators);
  EXPECT_EQ(parse_error_kind(R"({"lt":1})"), K::kMissingField);
  EXPECT_EQ(parse_error_kind(R"({"field":"x"})"), K::kMissingOperator);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","range":[1]})"), K::kInvalidOperand);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","equal":true})"), K::kInvalidOperand);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","oneOf":3})"), K::kInvalidOperand);
  EXPECT_EQ(parse_error_kind(R"({"field":"x","valid":1})"), K::kInvalidOperand);
  EXPECT_EQ(parse_error_kind(R"({"and":{}})"), K::kInvalidOperand);
}

TEST(ParsePredicate, RoundTripsThroughJson) {
  const auto p = parse_predicate(
      R"({"and":[{"field":"symbol","equal":"AAPL"},{"field":"price","gte":150},)"
      R"({"field":"date","range":["2008-08-31","2012-12-31"]}]})");
  EXPECT_EQ(parse_predicate(canonical_json(p)), p);
  EXPECT_EQ(predicate_from_json(predicate_to_json(p)), p);
  EXPECT_EQ(canonical_json(p),
            R"({"and":[{"field":"symbol","equal":"AAPL"},{"field":"price","gte":150},)"
            R"({"field":"date","range":["2008-08-31","2012-12-31"]}]})");
}

TEST(Evaluate, ComparisonsAgainstNullAreFalse) {
  EXPECT_EQ(rows(R"({"field":"mpg","lt":100})"), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(rows(R"({"not":{"field":"mpg","lt":100}})"), (std::vector<std::size_t>{2}));
  EXPECT_EQ(rows(R"({"field":"mpg","valid":false})"), (std::vector<std::size_t>{2}));
  EXPECT_EQ(rows(R"({"field":"mpg","valid":true})"), (std::vector<std::size_t>{0, 1, 3}));
}

TEST(Evaluate, RangeIsInclusive) {
  EXPECT_EQ(rows(R"({"field":"mpg","range":[15,25]})"), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(rows(R"({"field":"mpg","range":[25,15]})"), (std::vector<std::size_t>{}));
}

TEST(Evaluate, EmptyCompositions) {
  EXPECT_EQ(sel(R"({"and":[]})").count, 4u);
  EXPECT_EQ(sel(R"({"or":[]})").count, 0u);
}

TEST(Evaluate, NominalEqualityAndOneOf) {
  EXPECT_EQ(rows(R"({"field":"origin","equal":"Japan"})"), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(rows(R"({"field":"origin","oneOf":["USA","Europe"]})"),
            (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(rows(R"({"field":"origin","oneOf":[]})"), (std::vector<std::size_t>{}));
  EXPECT_EQ(rows(R"({"field":"origin","lt":"Z"})"), (std::vector<std::size_t>{}));
}

TEST(Evaluate, StringNumbersAndBareYearsCoerce) {
  EXPECT_EQ(rows(R"({"field":"mpg","gte":"25"})"), (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(rows(R"({"field":"year","gte":1975})"), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(rows(R"({"field":"year","lt":"1975-01-01"})"), (std::vector<std::size_t>{0}));
  EXPECT_EQ(rows(R"({"field":"year","equal":"1980"})"), (std::vector<std::size_t>{2}));
}

TEST(Evaluate, UnknownFieldsBehaveAsNull) {
  EXPECT_EQ(sel(R"({"field":"nope","valid":false})").count, 4u);
  EXPECT_THROW(select(parse_predicate(R"({"field":"nope","valid":false})"), table(), true),
               UnknownFieldError);
}

TEST(Select, CarriesDatasetIdAndCount) {
  const auto s = sel(R"({"field":"origin","equal":"Japan"})");
  EXPECT_EQ(s.dataset_id, table().id());
  EXPECT_EQ(s.count, s.row_indices.size());
}

TEST(Typecheck, UnknownFieldAndTypeMismatch) {
  const auto& f = table().fields();
  auto codes = [&](std::string_view json) {
    std::vector<DiagnosticCode> out;
    for (const auto& d : typecheck(parse_predicate(json), f)) out.push_back(d.code);
    return out;
  };
  using C = DiagnosticCode;
  EXPECT_EQ(codes(R"({"field":"nope","gte":1})"), (std::vector{C::kUnknownField}));
  EXPECT_EQ(codes(R"({"field":"mpg","gte":"fast"})"), (std::vector{C::kTypeMismatch}));
  EXPECT_EQ(codes(R"({"field":"origin","gt":"A"})"), (std::vector{C::kTypeMismatch}));
  EXPECT_EQ(codes(R"({"field":"year","lt":"soon"})"), (std::vector{C::kTypeMismatch}));
  EXPECT_TRUE(codes(R"({"field":"mpg","gte":"25"})").empty());
  EXPECT_TRUE(codes(R"({"field":"origin","equal":"Mars"})").empty());
  EXPECT_TRUE(codes(R"({"field":"mpg","range":[30,10]})").empty());
}

TEST(CheckRanges, ReversedBoundsAreMalformed) {
  const auto& f = table().fields();
  const auto diags = check_ranges(parse_predicate(R"({"and":[{"field":"mpg","range":[30,10]}]})"), f);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].code, DiagnosticCode::kMalformedRange);
  EXPECT_EQ(diags[0].severity, Severity::kError);
  EXPECT_TRUE(check_ranges(parse_predicate(R"({"field":"mpg","range":[10,10]})"), f).empty());
}

TEST(ReferencedFields, CollectsLeaves) {
  EXPECT_EQ(referenced_fields(parse_predicate(
                R"({"or":[{"field":"b","equal":1},{"not":{"field":"a","valid":true}}]})")),
            (std::set<std::string>{"a", "b"}));
}

TEST(Literals, Coercions) {
  EXPECT_EQ(literal_as_number(Literal{std::string("2.5")}), 2.5);
  EXPECT_FALSE(literal_as_number(Literal{std::string("x")}));
  EXPECT_TRUE(literal_as_timestamp(Literal{1820.0}, "year"));
  EXPECT_FALSE(literal_as_timestamp(Literal{1820.0}, "price"));
  EXPECT_EQ(literal_as_text(Literal{3.0}), "3");
  EXPECT_EQ(display_literal(Literal{std::string("Japan")}), "Japan");
}

}  // namespace
}  // namespace scaffolding
