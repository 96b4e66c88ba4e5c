#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mmw/core/value.hpp"

namespace mmw {

// Position of a schema in the translation hierarchy.
enum class SchemaRole { LIS, LCS, LES, GCS, GES };

inline const char* to_string(SchemaRole r) {
  switch (r) {
    case SchemaRole::LIS: return "LIS";
    case SchemaRole::LCS: return "LCS";
    case SchemaRole::LES: return "LES";
    case SchemaRole::GCS: return "GCS";
    case SchemaRole::GES: return "GES";
  }
  return "?";
}

inline std::optional<SchemaRole> parse_schema_role(const std::string& s) {
  if (s == "LIS") return SchemaRole::LIS;
  if (s == "LCS") return SchemaRole::LCS;
  if (s == "LES") return SchemaRole::LES;
  if (s == "GCS") return SchemaRole::GCS;
  if (s == "GES") return SchemaRole::GES;
  return std::nullopt;
}

// The type field is kept as a raw string so that not-yet-valid schemas are
// representable; validate_schema reports unknown types as violations.
struct AttributeDef {
  std::string name;
  std::string type;
  bool nullable = true;

  std::optional<AttrType> typed() const { return parse_attr_type(type); }

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct RelationDef {
  std::string name;
  std::vector<AttributeDef> attributes;

  const AttributeDef* find_attribute(const std::string& attr) const {
    for (const auto& a : attributes)
      if (a.name == attr) return &a;
    return nullptr;
  }

  friend bool operator==(const RelationDef&, const RelationDef&) = default;
};

// A schema in the system format.
struct CanonicalSchema {
  std::string name;
  SchemaRole role = SchemaRole::LCS;
  std::vector<RelationDef> relations;
  std::vector<std::string> provenance;

  const RelationDef* find_relation(const std::string& rel) const {
    for (const auto& r : relations)
      if (r.name == rel) return &r;
    return nullptr;
  }

  friend bool operator==(const CanonicalSchema&, const CanonicalSchema&) = default;
};

// A rule/invariant violation reported as data.
struct Violation {
  std::string code;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::vector<Violation> validate_schema(const CanonicalSchema& schema) {
  std::vector<Violation> out;
  if (schema.name.empty())
    out.push_back({"empty-name", "schema has no name"});
  std::set<std::string> rel_names;
  for (const auto& rel : schema.relations) {
    if (rel.name.empty())
      out.push_back({"empty-name", "relation with empty name"});
    if (!rel_names.insert(rel.name).second)
      out.push_back({"duplicate-relation", "duplicate relation name '" + rel.name + "'"});
    std::set<std::string> attr_names;
    for (const auto& attr : rel.attributes) {
      if (attr.name.empty())
        out.push_back({"empty-name", "attribute with empty name in relation '" + rel.name + "'"});
      if (!attr_names.insert(attr.name).second)
        out.push_back({"duplicate-attribute",
                       "duplicate attribute '" + attr.name + "' in relation '" + rel.name + "'"});
      if (!attr.typed())
        out.push_back({"unknown-type",
                       "attribute '" + rel.name + "." + attr.name + "' has unknown type '" +
                           attr.type + "'"});
    }
  }
  if (schema.provenance.empty() && schema.role != SchemaRole::LIS)
    out.push_back({"missing-provenance",
                   std::string("schema of role ") + to_string(schema.role) +
                       " must record its source schemas"});
  return out;
}

}  // namespace mmw
