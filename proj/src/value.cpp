#include "scaffolding/value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <system_error>

namespace scaffolding {
namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool numeric_charset(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.' ||
           c == 'e' || c == 'E';
  });
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::chrono::year_month_day civil_of(std::int64_t epoch_ms) {
  const std::int64_t days = floor_div(epoch_ms, kMsPerDay);
  return std::chrono::year_month_day{
      std::chrono::sys_days{std::chrono::days{days}}};
}

// Parses an offset suffix ("Z", "+05:30", "-0800", "+01") into minutes east.
std::optional<int> parse_zone(std::string_view z) {
  if (z.empty()) return 0;
  if (z == "Z" || z == "z") return 0;
  if (z[0] != '+' && z[0] != '-') return std::nullopt;
  const int sign = z[0] == '-' ? -1 : 1;
  z.remove_prefix(1);
  int hh = 0;
  int mm = 0;
  if (z.size() == 2 && all_digits(z)) {
    hh = to_int(z);
  } else if (z.size() == 4 && all_digits(z)) {
    hh = to_int(z.substr(0, 2));
    mm = to_int(z.substr(2, 2));
  } else if (z.size() == 5 && z[2] == ':' && all_digits(z.substr(0, 2)) &&
             all_digits(z.substr(3, 2))) {
    hh = to_int(z.substr(0, 2));
    mm = to_int(z.substr(3, 2));
  } else {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59) return std::nullopt;
  return sign * (hh * 60 + mm);
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty() || !numeric_charset(s)) return std::nullopt;
  if (s.front() == '+') {
    s.remove_prefix(1);
    if (s.empty() || s.front() == '-' || s.front() == '+') return std::nullopt;
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v,
                                   std::chars_format::general);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_non_finite_number(std::string_view text) {
  std::string s = lower(trim(text));
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.erase(0, 1);
  if (s == "nan" || s == "inf" || s == "infinity") return true;
  if (s.empty() || !numeric_charset(s)) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v,
                                   std::chars_format::general);
  return ec == std::errc::result_out_of_range && ptr == s.data() + s.size();
}

std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::optional<Timestamp> parse_timestamp(std::string_view text,
                                         bool allow_bare_year) {
  const std::string_view s = trim(text);
  if (allow_bare_year && s.size() == 4 && all_digits(s)) {
    return Timestamp{days_from_civil(to_int(s), 1, 1) * kMsPerDay,
                     std::string(s)};
  }
  if (s.size() < 10 || s[4] != '-' || s[7] != '-' ||
      !all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
      !all_digits(s.substr(8, 2))) {
    return std::nullopt;
  }
  const int year = to_int(s.substr(0, 4));
  const unsigned month = static_cast<unsigned>(to_int(s.substr(5, 2)));
  const unsigned day = static_cast<unsigned>(to_int(s.substr(8, 2)));
  const std::chrono::year_month_day ymd{
      std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) return std::nullopt;
  std::int64_t ms = days_from_civil(year, month, day) * kMsPerDay;
  if (s.size() == 10) return Timestamp{ms, std::string(s)};

  std::string_view rest = s.substr(10);
  if (rest[0] != 'T' && rest[0] != 't' && rest[0] != ' ') return std::nullopt;
  rest.remove_prefix(1);
  if (rest.size() < 5 || rest[2] != ':' || !all_digits(rest.substr(0, 2)) ||
      !all_digits(rest.substr(3, 2))) {
    return std::nullopt;
  }
  const int hh = to_int(rest.substr(0, 2));
  const int mi = to_int(rest.substr(3, 2));
  rest.remove_prefix(5);
  int ss = 0;
  int frac_ms = 0;
  if (!rest.empty() && rest[0] == ':') {
    if (rest.size() < 3 || !all_digits(rest.substr(1, 2))) return std::nullopt;
    ss = to_int(rest.substr(1, 2));
    rest.remove_prefix(3);
    if (!rest.empty() && rest[0] == '.') {
      std::size_t n = 1;
      while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n])))
        ++n;
      const std::string_view digits = rest.substr(1, n - 1);
      if (digits.empty() || digits.size() > 9) return std::nullopt;
      std::string three(digits.substr(0, 3));
      three.resize(3, '0');
      frac_ms = to_int(three);
      rest.remove_prefix(n);
    }
  }
  if (hh > 23 || mi > 59 || ss > 59) return std::nullopt;
  const auto zone = parse_zone(rest);
  if (!zone) return std::nullopt;
  ms += static_cast<std::int64_t>(hh) * 3'600'000 + mi * 60'000 + ss * 1000 +
        frac_ms - static_cast<std::int64_t>(*zone) * 60'000;
  return Timestamp{ms, std::string(s)};
}

bool header_allows_bare_year(std::string_view field_name) {
  const std::string l = lower(field_name);
  return l.find("year") != std::string::npos ||
         l.find("date") != std::string::npos;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "null";
  return std::string(buf, ptr);
}

std::string format_epoch_ms(std::int64_t epoch_ms) {
  const auto ymd = civil_of(epoch_ms);
  const std::int64_t in_day =
      epoch_ms - floor_div(epoch_ms, kMsPerDay) * kMsPerDay;
  char buf[64];
  const int y = static_cast<int>(ymd.year());
  const unsigned m = static_cast<unsigned>(ymd.month());
  const unsigned d = static_cast<unsigned>(ymd.day());
  if (in_day == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
  }
  const int hh = static_cast<int>(in_day / 3'600'000);
  const int mi = static_cast<int>(in_day / 60'000 % 60);
  const int ss = static_cast<int>(in_day / 1000 % 60);
  const int ms = static_cast<int>(in_day % 1000);
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", y, m, d,
                  hh, mi, ss);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, m,
                  d, hh, mi, ss, ms);
  }
  return buf;
}

int utc_year(std::int64_t epoch_ms) {
  return static_cast<int>(civil_of(epoch_ms).year());
}

std::string display_value(const DataValue& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "missing"; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Timestamp& t) const { return t.lexical; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace scaffolding
