#include "scaffolding/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "scaffolding/errors.hpp"

namespace scaffolding {
namespace {

using RawCell = std::optional<std::string>;

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<RawCell>> rows;
};

constexpr double kInferenceThreshold = 0.95;

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

RawCell cell_from_text(std::string text) {
  if (trim(text).empty()) return std::nullopt;
  return text;
}

// RFC 4180 records. Blank lines are skipped; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool line_has_content = false;
  std::size_t i = 0;
  std::size_t line = 1;

  auto end_row = [&] {
    if (line_has_content) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    line_has_content = false;
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' && field.empty()) {
      line_has_content = true;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field += text[i++];
      }
      if (!closed) {
        throw DecodeError("csv: unterminated quoted field starting on line " +
                          std::to_string(line));
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' &&
          text[i] != '\r') {
        throw DecodeError("csv: unexpected character after closing quote on line " +
                          std::to_string(line));
      }
      continue;
    }
    if (c == ',') {
      line_has_content = true;
      row.push_back(std::move(field));
      field.clear();
      ++i;
      continue;
    }
    if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      ++i;
      continue;
    }
    if (c == '\n') {
      end_row();
      ++line;
      ++i;
      continue;
    }
    line_has_content = true;
    field += c;
    ++i;
  }
  end_row();
  return rows;
}

RawTable read_csv(std::string_view text) {
  auto rows = parse_csv_rows(text);
  if (rows.empty()) throw DecodeError("csv: missing header row");
  RawTable table;
  table.header = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& cells = rows[r];
    if (cells.size() > table.header.size()) {
      throw DecodeError("csv: row " + std::to_string(r) + " has " +
                        std::to_string(cells.size()) + " cells but the header has " +
                        std::to_string(table.header.size()));
    }
    std::vector<RawCell> out;
    out.reserve(table.header.size());
    for (auto& cell : cells) out.push_back(cell_from_text(std::move(cell)));
    out.resize(table.header.size());
    table.rows.push_back(std::move(out));
  }
  return table;
}

RawCell cell_from_json(const Json& v, std::size_t row, const std::string& key) {
  switch (v.type()) {
    case Json::value_t::null:
      return std::nullopt;
    case Json::value_t::string:
      return cell_from_text(v.get<std::string>());
    case Json::value_t::boolean:
      return v.get<bool>() ? "true" : "false";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      return v.dump();
    case Json::value_t::number_float:
      return format_number(v.get<double>());
    default:
      throw DecodeError("json-records: record " + std::to_string(row) +
                        " field \"" + key + "\" is not a flat value");
  }
}

RawTable read_json_records(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("json-records: ") + e.what());
  }
  if (!doc.is_array()) {
    throw DecodeError("json-records: top level must be an array of objects");
  }
  RawTable table;
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const Json& obj = doc[r];
    if (!obj.is_object()) {
      throw DecodeError("json-records: element " + std::to_string(r) +
                        " is not an object");
    }
    if (r == 0) {
      for (const auto& [key, _] : obj.items()) table.header.push_back(key);
    }
    std::vector<RawCell> out(table.header.size());
    for (const auto& [key, value] : obj.items()) {
      const auto it = std::find(table.header.begin(), table.header.end(), key);
      if (it == table.header.end()) {
        throw InconsistentColumns("json-records: record " + std::to_string(r) +
                                  " has key \"" + key +
                                  "\" not present in the first record");
      }
      out[static_cast<std::size_t>(it - table.header.begin())] =
          cell_from_json(value, r, key);
    }
    table.rows.push_back(std::move(out));
  }
  return table;
}

std::string dataset_id(std::string_view bytes, DataFormat format) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (char c : to_string(format)) mix(static_cast<unsigned char>(c));
  mix(0);
  for (char c : bytes) mix(static_cast<unsigned char>(c));
  char buf[32];
  std::snprintf(buf, sizeof buf, "ds-%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Measure infer_raw(const std::vector<RawCell>& column, std::string_view header) {
  std::size_t base = 0;
  std::size_t temporal = 0;
  std::size_t numeric = 0;
  const bool bare_year = header_allows_bare_year(header);
  for (const auto& cell : column) {
    if (!cell) continue;
    ++base;
    if (parse_timestamp(*cell, bare_year)) ++temporal;
    if (parse_number(*cell)) ++numeric;
  }
  if (base == 0) return Measure::kNominal;
  const double b = static_cast<double>(base);
  if (static_cast<double>(temporal) >= kInferenceThreshold * b)
    return Measure::kTemporal;
  if (static_cast<double>(numeric) >= kInferenceThreshold * b)
    return Measure::kQuantitative;
  return Measure::kNominal;
}

DataValue typed_cell(const RawCell& cell, Measure measure,
                     const std::string& field, bool bare_year) {
  if (!cell) return std::monostate{};
  switch (measure) {
    case Measure::kTemporal:
      if (auto ts = parse_timestamp(*cell, bare_year)) return *ts;
      return std::monostate{};
    case Measure::kQuantitative:
      if (auto n = parse_number(*cell)) return *n;
      if (is_non_finite_number(*cell)) {
        throw DecodeError("non-finite number \"" + *cell + "\" in field \"" +
                          field + "\"");
      }
      return std::monostate{};
    case Measure::kNominal:
      return *cell;
  }
  return std::monostate{};
}

FieldExtent compute_extent(const std::vector<Record>& records,
                           const std::string& field, Measure measure) {
  switch (measure) {
    case Measure::kQuantitative: {
      QuantitativeExtent e;
      bool first = true;
      for (const auto& r : records) {
        const auto* v = std::get_if<double>(&r.find(field)->second);
        if (!v) continue;
        if (first || *v < e.min) e.min = *v;
        if (first || *v > e.max) e.max = *v;
        first = false;
      }
      return e;
    }
    case Measure::kTemporal: {
      TemporalExtent e;
      bool first = true;
      for (const auto& r : records) {
        const auto* v = std::get_if<Timestamp>(&r.find(field)->second);
        if (!v) continue;
        if (first || v->epoch_ms < e.min.epoch_ms) e.min = *v;
        if (first || v->epoch_ms > e.max.epoch_ms) e.max = *v;
        first = false;
      }
      return e;
    }
    case Measure::kNominal: {
      NominalExtent e;
      std::map<std::string, std::size_t, std::less<>> index;
      for (const auto& r : records) {
        const auto* v = std::get_if<std::string>(&r.find(field)->second);
        if (!v) continue;
        auto [it, inserted] = index.try_emplace(*v, e.categories.size());
        if (inserted) e.categories.push_back({*v, 0});
        ++e.categories[it->second].count;
      }
      return e;
    }
  }
  return NominalExtent{};
}

}  // namespace

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::kNominal:
      return "nominal";
    case Measure::kQuantitative:
      return "quantitative";
    case Measure::kTemporal:
      return "temporal";
  }
  return "nominal";
}

std::string_view to_string(DataFormat f) {
  return f == DataFormat::kCsv ? "csv" : "json-records";
}

std::optional<DataFormat> data_format_from_string(std::string_view s) {
  if (s == "csv") return DataFormat::kCsv;
  if (s == "json-records" || s == "json") return DataFormat::kJsonRecords;
  return std::nullopt;
}

DataFormat data_format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? DataFormat::kJsonRecords
                                     : DataFormat::kCsv;
}

const FieldSpec* Dataset::find_field(std::string_view name) const {
  for (const auto& f : fields_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const FieldSpec& Dataset::field(std::string_view name) const {
  const FieldSpec* f = find_field(name);
  if (!f) throw UnknownFieldError("unknown field \"" + std::string(name) + "\"");
  return *f;
}

std::vector<DataValue> Dataset::column(std::string_view name) const {
  std::vector<DataValue> out;
  for (const auto& r : records_) {
    const auto it = r.find(name);
    if (it != r.end() && !is_null(it->second)) out.push_back(it->second);
  }
  return out;
}

Measure infer_measure(std::span<const std::string> column,
                      std::string_view header_name) {
  std::vector<RawCell> cells;
  cells.reserve(column.size());
  for (const auto& c : column) cells.push_back(cell_from_text(c));
  return infer_raw(cells, header_name);
}

Dataset ingest(std::string_view bytes, DataFormat format,
               const IngestOptions& options) {
  if (!valid_utf8(bytes)) throw DecodeError("input is not valid UTF-8");
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);

  RawTable table = format == DataFormat::kCsv ? read_csv(bytes)
                                              : read_json_records(bytes);
  if (table.header.empty()) throw DecodeError("dataset declares no fields");
  std::set<std::string, std::less<>> seen;
  for (const auto& name : table.header) {
    if (trim(name).empty()) throw DecodeError("empty field name in header");
    if (!seen.insert(name).second) {
      throw DecodeError("duplicate field name \"" + name + "\"");
    }
  }
  if (table.rows.empty()) throw EmptyDataset("dataset has no data rows");
  if (table.rows.size() > options.max_rows) {
    throw DatasetTooLarge("dataset has " + std::to_string(table.rows.size()) +
                          " rows; the limit is " +
                          std::to_string(options.max_rows));
  }

  Dataset d;
  d.id_ = dataset_id(bytes, format);
  d.name_ = options.name.empty() ? d.id_ : options.name;

  const std::size_t ncols = table.header.size();
  std::vector<Measure> measures(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    std::vector<RawCell> column;
    column.reserve(table.rows.size());
    for (const auto& row : table.rows) column.push_back(row[c]);
    measures[c] = infer_raw(column, table.header[c]);
  }

  d.records_.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Record rec;
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto& name = table.header[c];
      rec.emplace(name, typed_cell(row[c], measures[c], name,
                                   header_allows_bare_year(name)));
    }
    d.records_.push_back(std::move(rec));
  }
  for (std::size_t c = 0; c < ncols; ++c) {
    d.fields_.push_back(
        FieldSpec{table.header[c], measures[c],
                  compute_extent(d.records_, table.header[c], measures[c])});
  }
  return d;
}

Dataset ingest_file(const std::filesystem::path& path,
                    const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  IngestOptions opts = options;
  if (opts.name.empty()) opts.name = path.stem().string();
  return ingest(ss.str(), data_format_for_path(path), opts);
}

std::vector<std::size_t> sample_row_indices(const Dataset& d,
                                            std::size_t max_rows,
                                            std::uint64_t seed) {
  const std::size_t n = d.row_count();
  std::vector<std::size_t> out;
  if (n <= max_rows) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  // Selection sampling: each row is taken with probability needed/remaining.
  std::mt19937_64 rng(seed);
  std::size_t needed = max_rows;
  for (std::size_t i = 0; i < n && needed > 0; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (static_cast<double>(n - i) * u < static_cast<double>(needed)) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

std::vector<Record> sample_rows(const Dataset& d, std::size_t max_rows,
                                std::uint64_t seed) {
  std::vector<Record> out;
  for (std::size_t i : sample_row_indices(d, max_rows, seed))
    out.push_back(d.records()[i]);
  return out;
}

namespace {

Json cell_json(const DataValue& v) {
  struct Visitor {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(double d) const { return d; }
    Json operator()(const std::string& s) const { return s; }
    Json operator()(const Timestamp& t) const { return t.lexical; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

Json record_to_json(const Dataset& d, const Record& r) {
  Json obj = Json::object();
  for (const auto& f : d.fields()) obj[f.name] = cell_json(r.find(f.name)->second);
  return obj;
}

std::string to_json_records(const Dataset& d) {
  Json arr = Json::array();
  for (const auto& r : d.records()) arr.push_back(record_to_json(d, r));
  return canonical_dump(arr);
}

Json extent_to_json(const FieldExtent& extent) {
  Json j = Json::object();
  if (const auto* q = std::get_if<QuantitativeExtent>(&extent)) {
    j["min"] = q->min;
    j["max"] = q->max;
  } else if (const auto* t = std::get_if<TemporalExtent>(&extent)) {
    j["min"] = t->min.lexical;
    j["max"] = t->max.lexical;
  } else {
    Json cats = Json::array();
    for (const auto& c : std::get<NominalExtent>(extent).categories) {
      Json e = Json::object();
      e["category"] = c.category;
      e["count"] = c.count;
      cats.push_back(std::move(e));
    }
    j["categories"] = std::move(cats);
  }
  return j;
}

Json field_summary_json(const Dataset& d) {
  Json j = Json::object();
  j["datasetId"] = d.id();
  j["name"] = d.name();
  j["rowCount"] = d.row_count();
  Json fields = Json::array();
  for (const auto& f : d.fields()) {
    Json e = Json::object();
    e["name"] = f.name;
    e["measure"] = to_string(f.measure);
    e["extent"] = extent_to_json(f.extent);
    fields.push_back(std::move(e));
  }
  j["fields"] = std::move(fields);
  return j;
}

}  // namespace scaffolding
