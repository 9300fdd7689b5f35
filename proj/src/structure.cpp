#include "scaffolding/structure.hpp"

#include <algorithm>

#include "scaffolding/errors.hpp"

namespace scaffolding {
namespace {

constexpr std::string_view kNodeKinds[] = {"root",  "highlightList", "highlight",
                                           "field", "bin",           "recordPage"};

std::string plural(std::size_t n, std::string_view word) {
  return std::to_string(n) + " " + std::string(word) + (n == 1 ? "" : "s");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string render_leaf(const FieldPredicate& fp) {
  const std::string& f = fp.field;
  auto v = [&fp](std::size_t i) { return display_literal(fp.operands.at(i)); };
  switch (fp.op) {
    case Op::kEqual:
      return f + " is " + v(0);
    case Op::kLt:
      return f + " is less than " + v(0);
    case Op::kLte:
      return f + " is at most " + v(0);
    case Op::kGt:
      return f + " is greater than " + v(0);
    case Op::kGte:
      return f + " is at least " + v(0);
    case Op::kRange:
      return f + " is between " + v(0) + " and " + v(1);
    case Op::kOneOf: {
      const std::size_t n = fp.operands.size();
      if (n == 0) return f + " is none of the listed values";
      if (n == 1) return f + " is " + v(0);
      if (n == 2) return f + " is " + v(0) + " or " + v(1);
      std::string out = f + " is one of ";
      for (std::size_t i = 0; i < n; ++i) {
        out += v(i);
        if (i + 2 < n) out += ", ";
        if (i + 2 == n) out += ", or ";
      }
      return out;
    }
    case Op::kValid:
      return f + (fp.valid ? " is present" : " is missing");
  }
  return f;
}

std::string render(const Predicate& p) {
  switch (p.kind()) {
    case Predicate::Kind::kLeaf:
      return render_leaf(p.field_predicate());
    case Predicate::Kind::kNot:
      return "not (" + render(p.children().front()) + ")";
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr: {
      if (p.children().empty()) {
        return p.kind() == Predicate::Kind::kAnd ? "all records" : "no records";
      }
      std::vector<std::string> parts;
      for (const auto& c : p.children()) {
        const bool ambiguous = (c.kind() == Predicate::Kind::kAnd ||
                                c.kind() == Predicate::Kind::kOr) &&
                               c.kind() != p.kind() && c.children().size() > 1;
        parts.push_back(ambiguous ? "(" + render(c) + ")" : render(c));
      }
      return join(parts, p.kind() == Predicate::Kind::kAnd ? " and " : " or ");
    }
  }
  return "";
}

std::string record_text(const Dataset& d, const Record& r) {
  std::vector<std::string> parts;
  for (const auto& f : d.fields()) {
    parts.push_back(f.name + ": " + display_value(r.find(f.name)->second));
  }
  return join(parts, ", ");
}

std::vector<StructureNode> record_pages(const Dataset& d, const std::string& parent_id,
                                        const std::vector<std::size_t>& rows,
                                        std::size_t page_size) {
  std::vector<StructureNode> pages;
  const std::size_t size = std::max<std::size_t>(page_size, 1);
  for (std::size_t start = 0; start < rows.size(); start += size) {
    const std::size_t end = std::min(rows.size(), start + size);
    StructureNode page;
    page.id = parent_id + "-page-" + std::to_string(pages.size());
    page.kind = NodeKind::kRecordPage;
    page.label = "Records " + std::to_string(start + 1) + " to " + std::to_string(end) +
                 " of " + std::to_string(rows.size());
    std::vector<std::string> lines;
    for (std::size_t i = start; i < end; ++i) {
      lines.push_back(record_text(d, d.records()[rows[i]]));
    }
    page.description = join(lines, "; ") + ".";
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<Diagnostic> diagnostics_for(const std::vector<Diagnostic>& all,
                                        std::optional<int> group_index) {
  std::vector<Diagnostic> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [&](const Diagnostic& d) { return d.group_index == group_index; });
  return out;
}

std::vector<Diagnostic> validated(const ScaffoldSet& set, const Dataset& d) {
  std::vector<Diagnostic> diagnostics;
  try {
    diagnostics = validate_scaffold_set(set, d);
  } catch (const NotABinPredicate& e) {
    throw InvalidScaffold(e.what());
  }
  if (has_errors(diagnostics)) {
    std::vector<std::string> errors;
    for (const auto& diag : diagnostics) {
      if (diag.severity == Severity::kError) errors.push_back(diag.message);
    }
    throw InvalidScaffold(std::string(to_string(set.kind)) +
                          " scaffold set failed validation: " + join(errors, "; "));
  }
  return diagnostics;
}

StructureNode grouping_node(const Dataset& d, NodeKind kind, std::string id,
                            const SemanticScaffold& g, std::vector<Diagnostic> diags,
                            std::size_t page_size) {
  StructureNode node;
  node.id = std::move(id);
  node.kind = kind;
  node.label = g.name;
  const Selection sel = select(g.predicate, d);
  std::string description = g.explanation;
  if (!description.empty()) description += " ";
  description += std::to_string(sel.count) + " of " + std::to_string(d.row_count()) +
                 " records. Criteria: " + render_predicate_text(g.predicate) + ".";
  node.description = std::move(description);
  node.predicate = g.predicate;
  node.selection_count = sel.count;
  node.diagnostics = std::move(diags);
  node.children = record_pages(d, node.id, sel.row_indices, page_size);
  return node;
}

std::string field_description(const FieldSpec& f, std::size_t bins,
                              std::string_view bin_kind) {
  std::string out;
  if (const auto* q = std::get_if<QuantitativeExtent>(&f.extent)) {
    out = "Quantitative field ranging from " + format_number(q->min) + " to " +
          format_number(q->max) + ".";
  } else if (const auto* t = std::get_if<TemporalExtent>(&f.extent)) {
    out = "Temporal field ranging from " + t->min.lexical + " to " + t->max.lexical + ".";
  } else {
    out = "Nominal field with " +
          plural(std::get<NominalExtent>(f.extent).categories.size(), "category") + ".";
    if (out.find("categorys") != std::string::npos) {
      out.replace(out.find("categorys"), 9, "categories");
    }
  }
  if (bin_kind == "category") return out + " One bin per category.";
  return out + " " + plural(bins, std::string(bin_kind) + " bin") + ".";
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  return kNodeKinds[static_cast<int>(kind)];
}

std::string render_predicate_text(const Predicate& p) { return render(p); }

StructureNode build_structure(const Dataset& d,
                              const std::map<std::string, ScaffoldSet>& bins,
                              const std::optional<ScaffoldSet>& highlights,
                              const StructureOptions& options) {
  for (const auto& [field, set] : bins) {
    if (set.kind != ScaffoldKind::kBins || set.field != field) {
      throw InvalidScaffold("bin set registered under \"" + field +
                            "\" is not a bin set for that field");
    }
    d.field(field);
  }
  if (highlights && highlights->kind != ScaffoldKind::kHighlights) {
    throw InvalidScaffold("highlights argument holds a bin set");
  }

  StructureNode root;
  root.id = "root";
  root.kind = NodeKind::kRoot;
  root.label = d.name();
  std::vector<std::string> names;
  for (const auto& f : d.fields()) names.push_back(f.name);
  root.description = "Dataset with " + std::to_string(d.row_count()) + " records and " +
                     std::to_string(d.fields().size()) + " fields: " + join(names, ", ") +
                     ".";

  StructureNode list;
  list.id = "highlights";
  list.kind = NodeKind::kHighlightList;
  list.label = "Data highlights";
  if (highlights) {
    const auto diags = validated(*highlights, d);
    list.diagnostics = diagnostics_for(diags, std::nullopt);
    for (std::size_t i = 0; i < highlights->groups.size(); ++i) {
      list.children.push_back(grouping_node(
          d, NodeKind::kHighlight, "highlight-" + std::to_string(i),
          highlights->groups[i], diagnostics_for(diags, static_cast<int>(i)),
          options.page_size));
    }
  }
  list.description = list.children.empty()
                         ? "No data highlights."
                         : plural(list.children.size(), "data highlight") + ".";
  root.children.push_back(std::move(list));

  for (std::size_t fi = 0; fi < d.fields().size(); ++fi) {
    const FieldSpec& f = d.fields()[fi];
    StructureNode node;
    node.id = "field-" + std::to_string(fi);
    node.kind = NodeKind::kField;
    node.label = f.name;

    ScaffoldSet set;
    std::vector<Diagnostic> diags;
    std::string_view bin_kind;
    if (const auto it = bins.find(f.name); it != bins.end()) {
      set = it->second;
      diags = validated(set, d);
      bin_kind = set.provenance.source == Provenance::Source::kFallback ? "equal-width"
                                                                         : "semantic";
    } else if (f.is_continuous()) {
      set = equal_width_bins(d, f.name, options.fallback_bins);
      bin_kind = "equal-width";
    } else {
      set.kind = ScaffoldKind::kBins;
      set.field = f.name;
      set.provenance.source = Provenance::Source::kFallback;
      for (const auto& c : std::get<NominalExtent>(f.extent).categories) {
        FieldPredicate fp;
        fp.field = f.name;
        fp.op = Op::kEqual;
        fp.operands = {c.category};
        set.groups.push_back({c.category, "", Predicate::leaf(std::move(fp))});
      }
      bin_kind = "category";
    }
    node.diagnostics = diagnostics_for(diags, std::nullopt);
    for (std::size_t j = 0; j < set.groups.size(); ++j) {
      node.children.push_back(grouping_node(
          d, NodeKind::kBin, node.id + "-bin-" + std::to_string(j), set.groups[j],
          diagnostics_for(diags, static_cast<int>(j)), options.page_size));
    }
    const std::size_t nulls = d.row_count() - d.column(f.name).size();
    if (nulls > 0) {
      FieldPredicate fp;
      fp.field = f.name;
      fp.op = Op::kValid;
      fp.valid = false;
      StructureNode missing = grouping_node(
          d, NodeKind::kBin, node.id + "-bin-missing",
          {"Missing values", "Records with no " + f.name + " value.",
           Predicate::leaf(std::move(fp))},
          {}, options.page_size);
      node.children.push_back(std::move(missing));
    }
    node.description = field_description(f, set.groups.size(), bin_kind);
    if (nulls > 0) node.description += " " + plural(nulls, "record") + " missing a value.";
    root.children.push_back(std::move(node));
  }
  return root;
}

std::size_t structure_height(const StructureNode& node) {
  std::size_t h = 0;
  for (const auto& c : node.children) h = std::max(h, structure_height(c));
  return h + 1;
}

namespace {

void outline(const StructureNode& node, std::size_t depth, std::size_t max_depth,
             std::string& out) {
  out.append(2 * (depth - 1), ' ');
  out += node.label;
  out += " — ";
  out += node.description;
  if (depth == max_depth && !node.children.empty()) {
    const std::size_t below = structure_height(node) - 1;
    out += " … " + std::to_string(below) + (below == 1 ? " more level" : " more levels");
  }
  out += '\n';
  if (depth < max_depth) {
    for (const auto& c : node.children) outline(c, depth + 1, max_depth, out);
  }
}

}  // namespace

std::string render_outline(const StructureNode& root, std::size_t max_depth) {
  std::string out;
  outline(root, 1, std::max<std::size_t>(max_depth, 1), out);
  return out;
}

Json structure_to_json_value(const StructureNode& node) {
  Json j = Json::object();
  j["id"] = node.id;
  j["kind"] = to_string(node.kind);
  j["label"] = node.label;
  j["description"] = node.description;
  j["predicate"] = node.predicate ? predicate_to_json(*node.predicate) : Json(nullptr);
  j["selectionCount"] = node.selection_count ? Json(*node.selection_count) : Json(nullptr);
  j["diagnostics"] = to_json(node.diagnostics);
  Json children = Json::array();
  for (const auto& c : node.children) children.push_back(structure_to_json_value(c));
  j["children"] = std::move(children);
  return j;
}

std::string structure_to_json(const StructureNode& node) {
  return canonical_dump(structure_to_json_value(node));
}

namespace {

StructureNode node_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaViolation("structure node must be an object");
  StructureNode n;
  n.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  const auto* it = std::find(std::begin(kNodeKinds), std::end(kNodeKinds), kind);
  if (it == std::end(kNodeKinds)) throw SchemaViolation("unknown node kind " + kind);
  n.kind = static_cast<NodeKind>(it - std::begin(kNodeKinds));
  n.label = j.at("label").get<std::string>();
  n.description = j.at("description").get<std::string>();
  if (j.contains("predicate") && !j.at("predicate").is_null()) {
    n.predicate = predicate_from_json(j.at("predicate"));
  }
  if (j.contains("selectionCount") && !j.at("selectionCount").is_null()) {
    n.selection_count = j.at("selectionCount").get<std::size_t>();
  }
  for (const auto& d : j.at("diagnostics")) n.diagnostics.push_back(diagnostic_from_json(d));
  for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  return n;
}

}  // namespace

StructureNode structure_from_json(std::string_view json) {
  try {
    return node_from_json(Json::parse(json));
  } catch (const Json::exception& e) {
    throw SchemaViolation(std::string("malformed structure JSON: ") + e.what());
  }
}

}  // namespace scaffolding
