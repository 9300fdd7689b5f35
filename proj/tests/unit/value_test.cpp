#include <gtest/gtest.h>

#include "scaffolding/value.hpp"

namespace scaffolding {
namespace {

constexpr std::int64_t kDayMs = 86'400'000;

TEST(ParseNumber, AcceptsDecimalForms) {
  EXPECT_EQ(parse_number("12"), 12.0);
  EXPECT_EQ(parse_number("-3.5"), -3.5);
  EXPECT_EQ(parse_number("+7"), 7.0);
  EXPECT_EQ(parse_number("1e5"), 100000.0);
  EXPECT_EQ(parse_number(" 4 "), 4.0);
}

TEST(ParseNumber, RejectsGarbageAndNonFinite) {
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("12abc"));
  EXPECT_FALSE(parse_number("NaN"));
  EXPECT_FALSE(parse_number("inf"));
  EXPECT_FALSE(parse_number("1e999"));
  EXPECT_TRUE(is_non_finite_number("NaN"));
  EXPECT_TRUE(is_non_finite_number("-Infinity"));
  EXPECT_TRUE(is_non_finite_number("1e999"));
  EXPECT_FALSE(is_non_finite_number("12"));
}

TEST(ParseTimestamp, DateOnlyIsMidnightUtc) {
  const auto t = parse_timestamp("2000-01-01", false);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->epoch_ms, 10957 * kDayMs);
  EXPECT_EQ(t->lexical, "2000-01-01");
}

TEST(ParseTimestamp, OffsetsShiftToUtc) {
  const auto z = parse_timestamp("2000-01-01T08:00:00.000Z", false);
  const auto plus = parse_timestamp("2000-01-01T10:00:00+02:00", false);
  const auto compact = parse_timestamp("2000-01-01T10:00+0200", false);
  ASSERT_TRUE(z && plus && compact);
  EXPECT_EQ(z->epoch_ms, 10957 * kDayMs + 8 * 3'600'000);
  EXPECT_EQ(plus->epoch_ms, z->epoch_ms);
  EXPECT_EQ(compact->epoch_ms, z->epoch_ms);
}

TEST(ParseTimestamp, BareYearNeedsPermission) {
  EXPECT_FALSE(parse_timestamp("1820", false));
  const auto t = parse_timestamp("1820", true);
  ASSERT_TRUE(t);
  EXPECT_EQ(utc_year(t->epoch_ms), 1820);
}

TEST(ParseTimestamp, RejectsInvalidCalendarDates) {
  EXPECT_FALSE(parse_timestamp("2001-02-29", false));
  EXPECT_FALSE(parse_timestamp("2000-13-01", false));
  EXPECT_FALSE(parse_timestamp("2000-01-01T25:00", false));
  EXPECT_FALSE(parse_timestamp("yesterday", true));
  EXPECT_TRUE(parse_timestamp("2000-02-29", false));
}

TEST(HeaderAllowsBareYear, MatchesYearOrDate) {
  EXPECT_TRUE(header_allows_bare_year("year"));
  EXPECT_TRUE(header_allows_bare_year("Release_Date"));
  EXPECT_TRUE(header_allows_bare_year("YEAR"));
  EXPECT_FALSE(header_allows_bare_year("price"));
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(150.0), "150");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.5), "-2.5");
  EXPECT_EQ(format_number(46.6), "46.6");
}

TEST(FormatEpochMs, DayOrFullInstant) {
  EXPECT_EQ(format_epoch_ms(10957 * kDayMs), "2000-01-01");
  EXPECT_EQ(format_epoch_ms(10957 * kDayMs + 1500), "2000-01-01T00:00:01.500Z");
  EXPECT_EQ(format_epoch_ms(-kDayMs), "1969-12-31");
}

TEST(DaysFromCivil, KnownAnchors) {
  EXPECT_EQ(days_from_civil(1970, 1, 1), 0);
  EXPECT_EQ(days_from_civil(2000, 3, 1), 11017);
  EXPECT_EQ(days_from_civil(1600, 1, 1), -135140);
}

TEST(DisplayValue, RendersEachKind) {
  EXPECT_EQ(display_value(DataValue{}), "missing");
  EXPECT_EQ(display_value(DataValue{25.0}), "25");
  EXPECT_EQ(display_value(DataValue{std::string("Japan")}), "Japan");
  EXPECT_EQ(display_value(DataValue{Timestamp{0, "1970-01-01"}}), "1970-01-01");
}

}  // namespace
}  // namespace scaffolding
