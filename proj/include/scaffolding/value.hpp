#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace scaffolding {

// An instant with the exact text it was read from. Ordering and equality of
// instants go through epoch_ms; lexical is kept so serialization is lossless.
struct Timestamp {
  std::int64_t epoch_ms = 0;
  std::string lexical;

  bool operator==(const Timestamp&) const = default;
};

// One cell. monostate is the null cell.
using DataValue = std::variant<std::monostate, double, std::string, Timestamp>;

inline bool is_null(const DataValue& v) {
  return std::holds_alternative<std::monostate>(v);
}

std::string_view trim(std::string_view s);

// Finite decimal numbers only ("12", "-3.5", "1e5"). Rejects inf/nan spellings
// and anything with surrounding garbage.
std::optional<double> parse_number(std::string_view text);

// True for spellings that denote a non-finite number ("NaN", "inf", "1e999").
bool is_non_finite_number(std::string_view text);

// Accepted date grammar: YYYY-MM-DD, YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+HH:MM],
// and a bare four-digit year when allow_bare_year is set. Zone-less times are
// read as UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text,
                                         bool allow_bare_year);

// Header names containing "year" or "date" (any case) enable bare years.
bool header_allows_bare_year(std::string_view field_name);

// Shortest text that round-trips the double ("150", "0.1", "1e+21").
std::string format_number(double v);

// "YYYY-MM-DD" at midnight UTC, otherwise "YYYY-MM-DDTHH:MM:SS[.mmm]Z".
std::string format_epoch_ms(std::int64_t epoch_ms);

int utc_year(std::int64_t epoch_ms);

std::int64_t days_from_civil(int year, unsigned month, unsigned day);

// Human-readable cell text; null renders as "missing".
std::string display_value(const DataValue& v);

}  // namespace scaffolding
