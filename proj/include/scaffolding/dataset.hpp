#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scaffolding/json_util.hpp"
#include "scaffolding/value.hpp"

namespace scaffolding {

enum class Measure { kNominal, kQuantitative, kTemporal };

std::string_view to_string(Measure m);

struct CategoryCount {
  std::string category;
  std::size_t count = 0;

  bool operator==(const CategoryCount&) const = default;
};

struct QuantitativeExtent {
  double min = 0;
  double max = 0;

  bool operator==(const QuantitativeExtent&) const = default;
};

struct TemporalExtent {
  Timestamp min;
  Timestamp max;

  bool operator==(const TemporalExtent&) const = default;
};

// Distinct non-null values in order of first appearance.
struct NominalExtent {
  std::vector<CategoryCount> categories;

  bool operator==(const NominalExtent&) const = default;
};

using FieldExtent =
    std::variant<NominalExtent, QuantitativeExtent, TemporalExtent>;

struct FieldSpec {
  std::string name;
  Measure measure = Measure::kNominal;
  FieldExtent extent;

  bool is_continuous() const { return measure != Measure::kNominal; }
  bool operator==(const FieldSpec&) const = default;
};

// Every record holds exactly the dataset's declared field names; absent
// cells are stored as null.
using Record = std::map<std::string, DataValue, std::less<>>;

enum class DataFormat { kCsv, kJsonRecords };

std::string_view to_string(DataFormat f);
// "csv" / "json-records" (also "json").
std::optional<DataFormat> data_format_from_string(std::string_view s);
// Chooses by extension: .json is json-records, everything else csv.
DataFormat data_format_for_path(const std::filesystem::path& path);

struct IngestOptions {
  std::size_t max_rows = 50'000;
  // Display name; defaults to the dataset id.
  std::string name;
};

// Immutable table produced by ingest(). Cheap to copy relative to its use;
// share through const references or shared_ptr<const Dataset>.
class Dataset {
 public:
  const std::string& id() const { return id_; }
  const std::string& name() const { return name_; }
  const std::vector<FieldSpec>& fields() const { return fields_; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t row_count() const { return records_.size(); }

  const FieldSpec* find_field(std::string_view name) const;
  const FieldSpec& field(std::string_view name) const;  // UnknownFieldError

  // Non-null values of the field, row order.
  std::vector<DataValue> column(std::string_view name) const;

 private:
  friend Dataset ingest(std::string_view, DataFormat, const IngestOptions&);

  std::string id_;
  std::string name_;
  std::vector<FieldSpec> fields_;
  std::vector<Record> records_;
};

// Parses CSV (RFC 4180, mandatory header) or a JSON array of flat objects.
// Throws DecodeError, InconsistentColumns, EmptyDataset, DatasetTooLarge.
Dataset ingest(std::string_view bytes, DataFormat format,
               const IngestOptions& options = {});

Dataset ingest_file(const std::filesystem::path& path,
                    const IngestOptions& options = {});

// Classifies a column of raw cell texts. Empty cells are nulls and are left
// out of the percentage base.
Measure infer_measure(std::span<const std::string> column,
                      std::string_view header_name = {});

// All rows when row_count <= max_rows, else a seeded uniform sample without
// replacement kept in original row order.
std::vector<std::size_t> sample_row_indices(const Dataset& d,
                                            std::size_t max_rows,
                                            std::uint64_t seed);
std::vector<Record> sample_rows(const Dataset& d, std::size_t max_rows,
                                std::uint64_t seed);

// json-records serialization; timestamps keep their lexical form.
std::string to_json_records(const Dataset& d);
Json record_to_json(const Dataset& d, const Record& r);

Json extent_to_json(const FieldExtent& extent);
Json field_summary_json(const Dataset& d);

}  // namespace scaffolding
