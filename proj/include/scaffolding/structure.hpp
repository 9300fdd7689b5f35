#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scaffolding/dataset.hpp"
#include "scaffolding/diagnostic.hpp"
#include "scaffolding/predicate.hpp"
#include "scaffolding/scaffold.hpp"

namespace scaffolding {

enum class NodeKind { kRoot, kHighlightList, kHighlight, kField, kBin, kRecordPage };

std::string_view to_string(NodeKind kind);

// Node of the navigable text hierarchy:
//   root -> highlightList | field -> highlight | bin -> recordPage
struct StructureNode {
  std::string id;
  NodeKind kind = NodeKind::kRoot;
  std::string label;
  std::string description;
  std::optional<Predicate> predicate;
  std::optional<std::size_t> selection_count;
  std::vector<Diagnostic> diagnostics;
  std::vector<StructureNode> children;

  bool operator==(const StructureNode&) const = default;
};

struct StructureOptions {
  std::size_t page_size = 20;
  int fallback_bins = 10;
};

// Validates every scaffold set against d (InvalidScaffold on any
// error-severity finding) and assembles the tree. Fields without semantic
// bins get equal-width bins (continuous) or one bin per category (nominal);
// fields with nulls get a trailing "Missing values" bin.
StructureNode build_structure(const Dataset& d,
                              const std::map<std::string, ScaffoldSet>& bins,
                              const std::optional<ScaffoldSet>& highlights,
                              const StructureOptions& options = {});

// "Miles_per_Gallon is at least 25 and Origin is Japan".
std::string render_predicate_text(const Predicate& p);

// Two spaces per level, one node per line with label and description joined by
// U+2014. Nodes at max_depth that have children end with "… N more levels".
std::string render_outline(const StructureNode& root, std::size_t max_depth);

Json structure_to_json_value(const StructureNode& node);
std::string structure_to_json(const StructureNode& node);
StructureNode structure_from_json(std::string_view json);

std::size_t structure_height(const StructureNode& node);

}  // namespace scaffolding
