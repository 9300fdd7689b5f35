#pragma once

// Reference interpreter for predicate JSON over plain rows. Shares no code
// with the library: cells are typed by the test, dates are compared as
// ISO-8601 day strings, and numbers are parsed with strtod.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace oracle {

enum class Type { kNumber, kDay, kText };

struct Cell {
  bool null = true;
  double number = 0;
  std::string text;  // day "YYYY-MM-DD" or category

  static Cell none() { return {}; }
  static Cell num(double v) { return {false, v, {}}; }
  static Cell str(std::string s) { return {false, 0, std::move(s)}; }
};

using Row = std::map<std::string, Cell>;
using Schema = std::map<std::string, Type>;

bool eval(const nlohmann::json& pred, const Row& row, const Schema& schema);
std::vector<std::size_t> select(const nlohmann::json& pred, const std::vector<Row>& rows,
                                const Schema& schema);

// Minimal RFC 4180 reader: header row plus records, quotes honoured.
std::vector<std::vector<std::string>> read_csv(const std::string& text);
std::string read_file(const std::string& path);

// Synthetic table: q (0..100 in halves), r (-50..50 ints), day (2001-2004
// dates), color (four words). Every column has roughly 10% nulls.
struct Synthetic {
  Schema schema;
  std::vector<Row> rows;
  std::string csv;
};
Synthetic synthetic_table(std::size_t n, std::mt19937_64& rng);

// Random predicate of depth <= max_depth using all eight operators over the
// synthetic schema, including empty and/or, reversed ranges and
// string-typed numbers.
nlohmann::json random_predicate(std::mt19937_64& rng, int max_depth);

// Bin-set cases. Continuous cases live on the extent [0, 1000] with integer
// boundaries, so every boundary is also a coverage-grid point.
struct Iv {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;
};

enum class BinClass { kPartition, kOverlap, kGap };

std::vector<Iv> random_interval_set(BinClass cls, std::mt19937_64& rng);
nlohmann::json interval_predicate(const Iv& iv, const std::string& field, std::mt19937_64& rng);
// Sweep over intervals sorted by lower end.
bool any_overlap(std::vector<Iv> ivs);
// Some grid point min + i*(max-min)/1000 lies in no interval.
bool grid_gap(const std::vector<Iv>& ivs, double min, double max);

enum class GroupClass { kPartition, kNonExclusive, kNonExhaustive };

struct CategoryCase {
  std::vector<std::string> categories;
  std::vector<std::vector<std::string>> groups;
};

CategoryCase random_category_case(GroupClass cls, std::mt19937_64& rng);
nlohmann::json category_predicate(const std::vector<std::string>& members, const std::string& field,
                                  std::mt19937_64& rng);
// Brute-force multiset count per category.
bool any_category_repeated(const CategoryCase& c);
bool any_category_missing(const CategoryCase& c);

}  // namespace oracle
