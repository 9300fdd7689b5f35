#include "scaffolding/scaffold.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "scaffolding/errors.hpp"

namespace scaffolding {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCoverageGridSteps = 1000;

std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

std::string group_label(const ScaffoldSet& set, std::size_t i) {
  return "group " + std::to_string(i) + " (" + quote(set.groups[i].name) + ")";
}

std::optional<double> coerce_continuous(const Literal& lit,
                                        const FieldSpec& field) {
  if (field.measure == Measure::kTemporal) {
    const auto ts = literal_as_timestamp(lit, field.name);
    if (!ts) return std::nullopt;
    return static_cast<double>(ts->epoch_ms);
  }
  return literal_as_number(lit);
}

std::string format_point(double v, const FieldSpec& field) {
  if (std::isinf(v)) return v < 0 ? "-infinity" : "infinity";
  if (field.measure == Measure::kTemporal) {
    return format_epoch_ms(static_cast<std::int64_t>(v));
  }
  return format_number(v);
}

std::pair<double, double> continuous_extent(const FieldSpec& field) {
  if (const auto* q = std::get_if<QuantitativeExtent>(&field.extent)) {
    return {q->min, q->max};
  }
  const auto& t = std::get<TemporalExtent>(field.extent);
  return {static_cast<double>(t.min.epoch_ms), static_cast<double>(t.max.epoch_ms)};
}

std::string format_extent(const FieldSpec& field) {
  if (const auto* t = std::get_if<TemporalExtent>(&field.extent)) {
    return "[" + t->min.lexical + ", " + t->max.lexical + "]";
  }
  const auto [lo, hi] = continuous_extent(field);
  return "[" + format_number(lo) + ", " + format_number(hi) + "]";
}

Interval intersect(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo > b.lo) {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    r.lo = b.lo;
    r.lo_closed = b.lo_closed;
  } else {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    r.hi = b.hi;
    r.hi_closed = b.hi_closed;
  } else {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed && b.hi_closed;
  }
  return r;
}

std::optional<Interval> leaf_interval(const FieldPredicate& fp,
                                      const FieldSpec& field) {
  auto bound = [&](std::size_t i) { return coerce_continuous(fp.operands[i], field); };
  switch (fp.op) {
    case Op::kRange: {
      const auto lo = bound(0);
      const auto hi = bound(1);
      if (!lo || !hi) return std::nullopt;
      return Interval{*lo, *hi, true, true};
    }
    case Op::kEqual: {
      const auto v = bound(0);
      if (!v) return std::nullopt;
      return Interval{*v, *v, true, true};
    }
    case Op::kGte:
    case Op::kGt: {
      const auto v = bound(0);
      if (!v) return std::nullopt;
      return Interval{*v, kInf, fp.op == Op::kGte, false};
    }
    case Op::kLte:
    case Op::kLt: {
      const auto v = bound(0);
      if (!v) return std::nullopt;
      return Interval{-kInf, *v, false, fp.op == Op::kLte};
    }
    default:
      return std::nullopt;
  }
}

// Category literals of a nominal bin: equal/oneOf leaves, possibly joined
// with "or".
std::optional<std::vector<std::string>> bin_categories(const Predicate& p) {
  std::vector<std::string> out;
  switch (p.kind()) {
    case Predicate::Kind::kLeaf: {
      const auto& fp = p.field_predicate();
      if (fp.op != Op::kEqual && fp.op != Op::kOneOf) return std::nullopt;
      for (const auto& l : fp.operands) out.push_back(literal_as_text(l));
      return out;
    }
    case Predicate::Kind::kOr:
      for (const auto& c : p.children()) {
        auto sub = bin_categories(c);
        if (!sub) return std::nullopt;
        out.insert(out.end(), sub->begin(), sub->end());
      }
      return out;
    default:
      return std::nullopt;
  }
}

template <typename Fn>
void for_each_leaf(const Predicate& p, Fn&& fn) {
  if (p.kind() == Predicate::Kind::kLeaf) {
    fn(p.field_predicate());
    return;
  }
  for (const auto& c : p.children()) for_each_leaf(c, fn);
}

std::vector<Diagnostic> out_of_extent_warnings(const Predicate& p,
                                               const Dataset& d,
                                               std::optional<int> group_index) {
  std::vector<Diagnostic> out;
  for_each_leaf(p, [&](const FieldPredicate& fp) {
    const FieldSpec* field = d.find_field(fp.field);
    if (!field || !field->is_continuous() || fp.op == Op::kValid) return;
    const auto [lo, hi] = continuous_extent(*field);
    for (const auto& lit : fp.operands) {
      const auto v = coerce_continuous(lit, *field);
      if (v && (*v < lo || *v > hi)) {
        out.push_back(make_warning(
            DiagnosticCode::kOutOfExtent,
            "literal " + literal_as_text(lit) + " on field " + quote(fp.field) +
                " lies outside the data extent " + format_extent(*field),
            group_index));
      }
    }
  });
  return out;
}

std::vector<Diagnostic> static_checks(const Predicate& p, const Dataset& d,
                                      std::optional<int> group_index) {
  auto out = typecheck(p, d.fields());
  auto ranges = check_ranges(p, d.fields());
  out.insert(out.end(), ranges.begin(), ranges.end());
  for (auto& diag : out) diag.group_index = group_index;
  return out;
}

std::vector<Diagnostic> validate_continuous_bins(const ScaffoldSet& set,
                                                 const Dataset& d,
                                                 const FieldSpec& field,
                                                 std::vector<bool> skip) {
  std::vector<Diagnostic> out;
  std::vector<std::pair<std::size_t, Interval>> intervals;
  for (std::size_t i = 0; i < set.groups.size(); ++i) {
    if (skip[i]) continue;
    const auto iv = bin_interval(set.groups[i].predicate, field);
    if (!iv) {
      throw NotABinPredicate(static_cast<int>(i),
                             group_label(set, i) +
                                 " is not a single interval over field " +
                                 quote(field.name));
    }
    if (iv->empty()) {
      out.push_back(make_error(DiagnosticCode::kMalformedRange,
                               group_label(set, i) + " bounds on " +
                                   quote(field.name) + " denote the empty interval " +
                                   format_interval(*iv, field),
                               static_cast<int>(i)));
      continue;
    }
    auto warnings = out_of_extent_warnings(set.groups[i].predicate, d,
                                           static_cast<int>(i));
    out.insert(out.end(), warnings.begin(), warnings.end());
    intervals.emplace_back(i, *iv);
  }

  for (std::size_t a = 0; a < intervals.size(); ++a) {
    for (std::size_t b = a + 1; b < intervals.size(); ++b) {
      const Interval common = intersect(intervals[a].second, intervals[b].second);
      if (common.empty()) continue;
      out.push_back(make_error(
          DiagnosticCode::kOverlappingBins,
          group_label(set, intervals[a].first) + " and " +
              group_label(set, intervals[b].first) + " overlap on " +
              format_interval(common, field),
          static_cast<int>(intervals[b].first)));
    }
  }

  // Probe points: the extent grid and every data value.
  const auto [min, max] = continuous_extent(field);
  std::vector<double> probes;
  probes.reserve(kCoverageGridSteps + 1 + d.row_count());
  for (int i = 0; i <= kCoverageGridSteps; ++i) {
    probes.push_back(i == kCoverageGridSteps
                         ? max
                         : min + i * (max - min) / kCoverageGridSteps);
  }
  for (const auto& v : d.column(field.name)) {
    if (const auto* x = std::get_if<double>(&v)) probes.push_back(*x);
    if (const auto* t = std::get_if<Timestamp>(&v))
      probes.push_back(static_cast<double>(t->epoch_ms));
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  std::vector<Interval> gaps;
  for (double x : probes) {
    const bool covered =
        std::any_of(intervals.begin(), intervals.end(),
                    [x](const auto& e) { return e.second.contains(x); });
    if (covered) continue;
    // Every interval lies entirely left or right of an uncovered point, so
    // the gap is bounded by the nearest ends on either side.
    Interval gap{min, max, true, true};
    for (const auto& [_, iv] : intervals) {
      if (iv.hi <= x && iv.hi >= gap.lo) {
        if (iv.hi > gap.lo || gap.lo_closed) {
          gap.lo = iv.hi;
          gap.lo_closed = !iv.hi_closed;
        }
      }
      if (iv.lo >= x && iv.lo <= gap.hi) {
        if (iv.lo < gap.hi || gap.hi_closed) {
          gap.hi = iv.lo;
          gap.hi_closed = !iv.lo_closed;
        }
      }
    }
    if (std::find(gaps.begin(), gaps.end(), gap) == gaps.end()) {
      gaps.push_back(gap);
    }
  }
  for (const auto& gap : gaps) {
    out.push_back(make_error(DiagnosticCode::kCoverageGap,
                             "values of " + quote(field.name) + " in " +
                                 format_interval(gap, field) +
                                 " are not covered by any bin"));
  }
  return out;
}

std::vector<Diagnostic> validate_nominal_bins(const ScaffoldSet& set,
                                              const FieldSpec& field,
                                              std::vector<bool> skip) {
  std::vector<Diagnostic> out;
  const auto& categories = std::get<NominalExtent>(field.extent).categories;
  std::set<std::string, std::less<>> known;
  for (const auto& c : categories) known.insert(c.category);

  std::map<std::string, std::vector<std::size_t>, std::less<>> owners;
  for (std::size_t i = 0; i < set.groups.size(); ++i) {
    if (skip[i]) continue;
    const auto cats = bin_categories(set.groups[i].predicate);
    if (!cats) {
      throw NotABinPredicate(static_cast<int>(i),
                             group_label(set, i) +
                                 " must list categories of " + quote(field.name) +
                                 " with equal or oneOf");
    }
    std::set<std::string> in_group;
    for (const auto& c : *cats) {
      if (!in_group.insert(c).second) continue;
      if (!known.contains(c)) {
        out.push_back(make_warning(DiagnosticCode::kOutOfExtent,
                                   group_label(set, i) + " lists " + quote(c) +
                                       ", which is not a category of " +
                                       quote(field.name),
                                   static_cast<int>(i)));
        continue;
      }
      owners[c].push_back(i);
    }
  }

  std::vector<std::string> missing;
  for (const auto& c : categories) {
    const auto it = owners.find(c.category);
    if (it == owners.end()) {
      missing.push_back(c.category);
      continue;
    }
    if (it->second.size() > 1) {
      std::string groups;
      for (std::size_t k = 0; k < it->second.size(); ++k) {
        if (k > 0) groups += k + 1 == it->second.size() ? " and " : ", ";
        groups += group_label(set, it->second[k]);
      }
      out.push_back(make_error(DiagnosticCode::kNonExclusiveGroups,
                               "category " + quote(c.category) + " of " +
                                   quote(field.name) + " appears in " + groups,
                               static_cast<int>(it->second[1])));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) {
      if (!list.empty()) list += ", ";
      list += quote(m);
    }
    out.push_back(make_error(DiagnosticCode::kNonExhaustiveGroups,
                             "categories of " + quote(field.name) +
                                 " not covered by any group: " + list));
  }
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Standalone 4-digit tokens in [1000, 2999]; digits glued to letters or part
// of a decimal/grouped number are ignored.
std::vector<int> year_tokens(std::string_view text) {
  std::vector<int> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_digit(text[j])) ++j;
    const bool before_ok =
        i == 0 || (!is_word_char(text[i - 1]) &&
                   !((text[i - 1] == '.' || text[i - 1] == ',') && i >= 2 &&
                     is_digit(text[i - 2])));
    const bool after_ok =
        j == text.size() ||
        (!is_word_char(text[j]) &&
         !((text[j] == '.' || text[j] == ',') && j + 1 < text.size() &&
           is_digit(text[j + 1])));
    if (j - i == 4 && before_ok && after_ok) {
      const int y = std::stoi(std::string(text.substr(i, 4)));
      if (y >= 1000 && y <= 2999 &&
          std::find(out.begin(), out.end(), y) == out.end()) {
        out.push_back(y);
      }
    }
    i = j;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(ScaffoldKind kind) {
  return kind == ScaffoldKind::kBins ? "bins" : "highlights";
}

bool Interval::empty() const {
  return lo > hi || (lo == hi && !(lo_closed && hi_closed));
}

bool Interval::contains(double x) const {
  return (x > lo || (x == lo && lo_closed)) && (x < hi || (x == hi && hi_closed));
}

std::optional<Interval> bin_interval(const Predicate& p, const FieldSpec& field) {
  switch (p.kind()) {
    case Predicate::Kind::kLeaf:
      if (p.field_predicate().field != field.name) return std::nullopt;
      return leaf_interval(p.field_predicate(), field);
    case Predicate::Kind::kAnd: {
      if (p.children().empty()) return std::nullopt;
      Interval acc{-kInf, kInf, false, false};
      for (const auto& c : p.children()) {
        const auto iv = bin_interval(c, field);
        if (!iv) return std::nullopt;
        acc = intersect(acc, *iv);
      }
      return acc;
    }
    default:
      return std::nullopt;
  }
}

std::string format_interval(const Interval& iv, const FieldSpec& field) {
  return std::string(iv.lo_closed ? "[" : "(") + format_point(iv.lo, field) +
         ", " + format_point(iv.hi, field) + (iv.hi_closed ? "]" : ")");
}

std::vector<Diagnostic> validate_highlight(const SemanticScaffold& s,
                                           const Dataset& d,
                                           std::optional<int> group_index) {
  auto out = static_checks(s.predicate, d, group_index);
  if (has_errors(out)) return out;

  const Selection sel = select(s.predicate, d);
  if (sel.count == 0) {
    out.push_back(make_error(DiagnosticCode::kEmptySelection,
                             quote(s.name) + " selects no records (criteria: " +
                                 canonical_json(s.predicate) + ")",
                             group_index));
  } else if (sel.count == d.row_count()) {
    out.push_back(make_warning(DiagnosticCode::kUniversalSelection,
                               quote(s.name) + " selects all " +
                                   std::to_string(d.row_count()) + " records",
                               group_index));
  }
  auto extent = out_of_extent_warnings(s.predicate, d, group_index);
  out.insert(out.end(), extent.begin(), extent.end());
  return out;
}

std::vector<Diagnostic> validate_bin_set(const ScaffoldSet& set,
                                         const Dataset& d) {
  const FieldSpec& field = d.field(set.field);
  std::vector<Diagnostic> out;
  std::vector<bool> skip(set.groups.size(), false);
  for (std::size_t i = 0; i < set.groups.size(); ++i) {
    const auto refs = referenced_fields(set.groups[i].predicate);
    if (refs.size() != 1 || *refs.begin() != field.name) {
      std::string names;
      for (const auto& r : refs) {
        if (!names.empty()) names += ", ";
        names += quote(r);
      }
      throw NotABinPredicate(static_cast<int>(i),
                             group_label(set, i) + " references {" + names +
                                 "} instead of only " + quote(field.name));
    }
    auto diags = static_checks(set.groups[i].predicate, d, static_cast<int>(i));
    skip[i] = has_errors(diags);
    out.insert(out.end(), diags.begin(), diags.end());
  }
  auto rest = field.is_continuous()
                  ? validate_continuous_bins(set, d, field, std::move(skip))
                  : validate_nominal_bins(set, field, std::move(skip));
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<Diagnostic> scan_explanation_context(const SemanticScaffold& s,
                                                 const Dataset& d,
                                                 std::optional<int> group_index) {
  struct Span {
    std::string field;
    int from;
    int to;
  };
  std::vector<Span> spans;
  for (const auto& f : d.fields()) {
    if (const auto* t = std::get_if<TemporalExtent>(&f.extent);
        t && f.measure == Measure::kTemporal) {
      spans.push_back({f.name, utc_year(t->min.epoch_ms), utc_year(t->max.epoch_ms)});
    }
  }
  std::vector<Diagnostic> out;
  if (spans.empty()) return out;
  for (int year : year_tokens(s.name + "\n" + s.explanation)) {
    const bool inside = std::any_of(spans.begin(), spans.end(), [year](const Span& sp) {
      return sp.from <= year && year <= sp.to;
    });
    if (inside) continue;
    std::string extents;
    for (const auto& sp : spans) {
      if (!extents.empty()) extents += "; ";
      extents += quote(sp.field) + " covers " + std::to_string(sp.from) + " to " +
                 std::to_string(sp.to);
    }
    out.push_back(make_warning(DiagnosticCode::kTemporalOutOfScope,
                               quote(s.name) + " mentions " + std::to_string(year) +
                                   ", outside the time span of the data (" +
                                   extents + ")",
                               group_index));
  }
  return out;
}

bool is_generic_field_name(std::string_view name) {
  static const std::set<std::string, std::less<>> kExact{
      "category", "value", "field", "data", "x", "y", "a", "b", "c"};
  const std::string l = lower(trim(name));
  if (kExact.contains(l)) return true;
  for (std::string_view stem : {"column", "col", "var"}) {
    if (l.rfind(stem, 0) != 0) continue;
    const std::string_view rest = std::string_view(l).substr(stem.size());
    if (std::all_of(rest.begin(), rest.end(), [](char c) {
          return is_digit(c) || c == '_' || c == '-' || c == ' ';
        })) {
      return true;
    }
  }
  return false;
}

std::vector<Diagnostic> schema_information_check(const Dataset& d) {
  std::vector<std::string> generic;
  for (const auto& f : d.fields()) {
    if (is_generic_field_name(f.name)) generic.push_back(f.name);
  }
  if (generic.empty() || generic.size() * 2 < d.fields().size()) return {};
  std::string names;
  for (const auto& g : generic) {
    if (!names.empty()) names += ", ";
    names += quote(g);
  }
  return {make_warning(DiagnosticCode::kLowInformationSchema,
                       std::to_string(generic.size()) + " of " +
                           std::to_string(d.fields().size()) +
                           " field names are generic (" + names +
                           "); generated groupings may invent a domain the data "
                           "does not describe")};
}

ScaffoldSet equal_width_bins(const Dataset& d, std::string_view field_name,
                             int k) {
  const FieldSpec& field = d.field(field_name);
  if (!field.is_continuous()) {
    throw FieldNotContinuous("field \"" + field.name + "\" is " +
                             std::string(to_string(field.measure)) +
                             "; equal-width bins need a continuous field");
  }
  if (k < 1) throw Error("bin count must be at least 1");

  ScaffoldSet set;
  set.kind = ScaffoldKind::kBins;
  set.field = field.name;
  set.provenance.source = Provenance::Source::kFallback;

  auto make_leaf = [&](Op op, std::vector<Literal> operands) {
    FieldPredicate fp;
    fp.field = field.name;
    fp.op = op;
    fp.operands = std::move(operands);
    return Predicate::leaf(std::move(fp));
  };

  // Boundaries as literals plus their numeric position for ordering.
  std::vector<Literal> bounds;
  if (const auto* q = std::get_if<QuantitativeExtent>(&field.extent)) {
    bounds.emplace_back(q->min);
    if (q->max > q->min) {
      for (int i = 1; i < k; ++i) {
        const double b = q->min + i * (q->max - q->min) / k;
        if (b > std::get<double>(bounds.back()) && b < q->max) bounds.emplace_back(b);
      }
      bounds.emplace_back(q->max);
    }
  } else {
    const auto& t = std::get<TemporalExtent>(field.extent);
    constexpr std::int64_t kDay = 86'400'000;
    const std::int64_t span = t.max.epoch_ms - t.min.epoch_ms;
    bounds.emplace_back(t.min.lexical);
    if (span > 0) {
      std::int64_t prev = t.min.epoch_ms;
      for (int i = 1; i < k; ++i) {
        std::int64_t b = t.min.epoch_ms + span / k * i + span % k * i / k;
        if (span >= static_cast<std::int64_t>(k) * kDay) {
          b -= ((b % kDay) + kDay) % kDay;
        }
        if (b > prev && b < t.max.epoch_ms) {
          bounds.emplace_back(format_epoch_ms(b));
          prev = b;
        }
      }
      bounds.emplace_back(t.max.lexical);
    }
  }

  if (bounds.size() == 1) {
    set.groups.push_back(
        {literal_as_text(bounds[0]) + " to " + literal_as_text(bounds[0]), "",
         make_leaf(Op::kRange, {bounds[0], bounds[0]})});
    return set;
  }
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const bool last = i + 2 == bounds.size();
    SemanticScaffold s;
    s.name = literal_as_text(bounds[i]) + " to " + literal_as_text(bounds[i + 1]);
    s.predicate = last ? make_leaf(Op::kRange, {bounds[i], bounds[i + 1]})
                       : Predicate::all_of({make_leaf(Op::kGte, {bounds[i]}),
                                            make_leaf(Op::kLt, {bounds[i + 1]})});
    set.groups.push_back(std::move(s));
  }
  return set;
}

std::vector<Diagnostic> validate_scaffold_set(const ScaffoldSet& set,
                                              const Dataset& d) {
  std::vector<Diagnostic> out = schema_information_check(d);
  auto append = [&out](std::vector<Diagnostic> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  if (set.kind == ScaffoldKind::kBins) {
    append(validate_bin_set(set, d));
  } else {
    for (std::size_t i = 0; i < set.groups.size(); ++i) {
      append(validate_highlight(set.groups[i], d, static_cast<int>(i)));
    }
  }
  for (std::size_t i = 0; i < set.groups.size(); ++i) {
    append(scan_explanation_context(set.groups[i], d, static_cast<int>(i)));
  }
  return out;
}

Json scaffold_to_json(const SemanticScaffold& s) {
  Json j = Json::object();
  j["name"] = s.name;
  j["explanation"] = s.explanation;
  j["predicate"] = predicate_to_json(s.predicate);
  return j;
}

Json to_json(const ScaffoldSet& set) {
  Json j = Json::object();
  j["kind"] = to_string(set.kind);
  if (set.kind == ScaffoldKind::kBins) j["field"] = set.field;
  Json groups = Json::array();
  for (const auto& g : set.groups) groups.push_back(scaffold_to_json(g));
  j["groups"] = std::move(groups);
  Json prov = Json::object();
  switch (set.provenance.source) {
    case Provenance::Source::kLlm:
      prov["source"] = "llm";
      prov["model"] = set.provenance.model;
      prov["attempts"] = set.provenance.attempts;
      break;
    case Provenance::Source::kFallback:
      prov["source"] = "fallback";
      break;
    case Provenance::Source::kManual:
      prov["source"] = "manual";
      break;
  }
  j["provenance"] = std::move(prov);
  return j;
}

std::vector<SemanticScaffold> groups_from_json(const Json& groups,
                                               bool require_explanation) {
  if (!groups.is_array()) throw SchemaViolation("\"groups\" must be an array");
  if (groups.empty()) throw SchemaViolation("\"groups\" must not be empty");
  std::vector<SemanticScaffold> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Json& g = groups[i];
    const std::string where = "group " + std::to_string(i);
    if (!g.is_object()) throw SchemaViolation(where + " is not an object");
    for (const auto& [key, _] : g.items()) {
      if (key != "name" && key != "explanation" && key != "predicate") {
        throw SchemaViolation(where + " has unexpected key \"" + key + "\"");
      }
    }
    for (const char* key : {"name", "explanation", "predicate"}) {
      if (!g.contains(key) && (require_explanation || std::string(key) != "explanation")) {
        throw SchemaViolation(where + " is missing \"" + std::string(key) + "\"");
      }
    }
    if (!g.at("name").is_string() || g.at("name").get<std::string>().empty()) {
      throw SchemaViolation(where + " \"name\" must be a non-empty string");
    }
    const Json explanation = g.value("explanation", Json(""));
    if (!explanation.is_string() || (require_explanation && explanation.get<std::string>().empty())) {
      throw SchemaViolation(where + " \"explanation\" must be a non-empty string");
    }
    SemanticScaffold s;
    s.name = g.at("name").get<std::string>();
    s.explanation = explanation.get<std::string>();
    try {
      s.predicate = predicate_from_json(g.at("predicate"));
    } catch (const PredicateParseError& e) {
      throw GroupPredicateError(static_cast<int>(i), e);
    }
    out.push_back(std::move(s));
  }
  return out;
}

ScaffoldSet scaffold_set_from_json(const Json& j,
                                   std::optional<std::string> default_bin_field) {
  if (!j.is_object()) throw SchemaViolation("scaffold document must be an object");
  if (!j.contains("groups")) throw SchemaViolation("scaffold document has no \"groups\"");
  ScaffoldSet set;
  std::string kind = default_bin_field ? "bins" : "highlights";
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw SchemaViolation("\"kind\" must be a string");
    kind = j.at("kind").get<std::string>();
  }
  if (kind == "bins") {
    set.kind = ScaffoldKind::kBins;
    if (j.contains("field") && j.at("field").is_string()) {
      set.field = j.at("field").get<std::string>();
    } else if (default_bin_field) {
      set.field = *default_bin_field;
    } else {
      throw SchemaViolation("bin scaffold set needs a \"field\"");
    }
  } else if (kind == "highlights") {
    set.kind = ScaffoldKind::kHighlights;
  } else {
    throw SchemaViolation("unknown scaffold kind \"" + kind + "\"");
  }
  set.provenance.source = Provenance::Source::kManual;
  if (j.contains("provenance") && j.at("provenance").is_object()) {
    const Json& p = j.at("provenance");
    const std::string source = p.value("source", "manual");
    if (source == "llm") {
      set.provenance.source = Provenance::Source::kLlm;
      set.provenance.model = p.value("model", "");
      set.provenance.attempts = p.value("attempts", 0);
    } else if (source == "fallback") {
      set.provenance.source = Provenance::Source::kFallback;
    }
  }
  const bool require_explanation =
      set.provenance.source != Provenance::Source::kFallback;
  set.groups = groups_from_json(j.at("groups"), require_explanation);
  return set;
}

}  // namespace scaffolding
