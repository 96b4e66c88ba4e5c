#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/mapping.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/result.hpp"
#include "mmw/core/schema.hpp"

// Canonical JSON encodings for the system-format types. Field names are the
// lowercase type-definition names; these documents are the wire payloads.

namespace mmw {

using json = nlohmann::json;

inline json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_string()) return v.as_string();
  if (v.is_integer()) return v.as_integer();
  if (v.is_float()) return v.as_float();
  return v.as_boolean();
}

// Integral JSON numbers decode as integers; typecheck widens them to float
// where the compared attribute requires it.
inline Value value_from_json(const json& j) {
  if (j.is_null()) return Value{};
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number_integer() || j.is_number_unsigned())
    return Value(j.get<std::int64_t>());
  if (j.is_number_float()) return Value(j.get<double>());
  throw Error("malformed-json", "unsupported value kind: " + j.dump());
}

// Decodes a value under a declared attribute type (integers widen to float).
inline Value value_from_json(const json& j, AttrType type) {
  Value v = value_from_json(j);
  if (type == AttrType::Float && v.is_integer())
    return Value(static_cast<double>(v.as_integer()));
  return v;
}

inline json schema_to_json(const CanonicalSchema& s) {
  json rels = json::array();
  for (const auto& r : s.relations) {
    json attrs = json::array();
    for (const auto& a : r.attributes)
      attrs.push_back({{"name", a.name}, {"type", a.type}, {"nullable", a.nullable}});
    rels.push_back({{"name", r.name}, {"attributes", std::move(attrs)}});
  }
  return {{"name", s.name},
          {"role", to_string(s.role)},
          {"relations", std::move(rels)},
          {"provenance", s.provenance}};
}

inline CanonicalSchema schema_from_json(const json& j) {
  try {
    CanonicalSchema s;
    s.name = j.at("name").get<std::string>();
    auto role = parse_schema_role(j.at("role").get<std::string>());
    if (!role) throw Error("malformed-json", "unknown schema role");
    s.role = *role;
    for (const auto& jr : j.at("relations")) {
      RelationDef r;
      r.name = jr.at("name").get<std::string>();
      for (const auto& ja : jr.at("attributes")) {
        AttributeDef a;
        a.name = ja.at("name").get<std::string>();
        a.type = ja.at("type").get<std::string>();
        a.nullable = ja.value("nullable", true);
        r.attributes.push_back(std::move(a));
      }
      s.relations.push_back(std::move(r));
    }
    if (j.contains("provenance"))
      s.provenance = j.at("provenance").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("schema: ") + e.what());
  }
}

inline json predicate_to_json(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Compare:
      return {{"op", to_string(p.op)},
              {"attribute", p.attribute},
              {"value", value_to_json(p.literal)}};
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
    case Predicate::Kind::Not: {
      json children = json::array();
      for (const auto& c : p.children) children.push_back(predicate_to_json(c));
      const char* op = p.kind == Predicate::Kind::And ? "and"
                       : p.kind == Predicate::Kind::Or ? "or"
                                                       : "not";
      return {{"op", op}, {"children", std::move(children)}};
    }
  }
  return nullptr;
}

inline Predicate predicate_from_json(const json& j) {
  try {
    std::string op = j.at("op").get<std::string>();
    if (op == "and" || op == "or" || op == "not") {
      std::vector<Predicate> children;
      for (const auto& c : j.at("children")) children.push_back(predicate_from_json(c));
      if (op == "not" && children.size() != 1)
        throw Error("malformed-json", "'not' takes exactly one child");
      return Predicate::combine(op == "and"  ? Predicate::Kind::And
                                : op == "or" ? Predicate::Kind::Or
                                             : Predicate::Kind::Not,
                                std::move(children));
    }
    auto cmp = parse_cmp_op(op);
    if (!cmp) throw Error("malformed-json", "unknown predicate op '" + op + "'");
    return Predicate::compare(j.at("attribute").get<std::string>(), *cmp,
                              value_from_json(j.at("value")));
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("predicate: ") + e.what());
  }
}

inline json query_to_json(const CanonicalQuery& q) {
  json j = {{"target", q.target}, {"projection", q.projection}};
  j["selection"] = q.selection ? predicate_to_json(*q.selection) : json(nullptr);
  j["limit"] = q.limit ? json(*q.limit) : json(nullptr);
  return j;
}

inline CanonicalQuery query_from_json(const json& j) {
  try {
    CanonicalQuery q;
    q.target = j.at("target").get<std::string>();
    if (j.contains("projection"))
      q.projection = j.at("projection").get<std::vector<std::string>>();
    if (j.contains("selection") && !j.at("selection").is_null())
      q.selection = predicate_from_json(j.at("selection"));
    if (j.contains("limit") && !j.at("limit").is_null())
      q.limit = j.at("limit").get<std::uint64_t>();
    return q;
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("query: ") + e.what());
  }
}

inline json result_to_json(const CanonicalResult& r) {
  json attrs = json::array();
  for (const auto& a : r.attributes) attrs.push_back({{"name", a.name}, {"type", a.type}});
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = json::array();
    for (const auto& v : row) jr.push_back(value_to_json(v));
    rows.push_back(std::move(jr));
  }
  return {{"attributes", std::move(attrs)}, {"rows", std::move(rows)}, {"origin", r.origin}};
}

inline CanonicalResult result_from_json(const json& j) {
  try {
    CanonicalResult r;
    for (const auto& ja : j.at("attributes")) {
      AttributeDef a;
      a.name = ja.at("name").get<std::string>();
      a.type = ja.at("type").get<std::string>();
      r.attributes.push_back(std::move(a));
    }
    for (const auto& jr : j.at("rows")) {
      Row row;
      for (std::size_t i = 0; i < jr.size(); ++i) {
        auto type = i < r.attributes.size() ? r.attributes[i].typed() : std::nullopt;
        row.push_back(type ? value_from_json(jr[i], *type) : value_from_json(jr[i]));
      }
      r.rows.push_back(std::move(row));
    }
    r.origin = j.value("origin", "");
    return r;
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("result: ") + e.what());
  }
}

inline json mapping_rule_to_json(const MappingRule& r) {
  switch (r.kind) {
    case MappingRule::Kind::RenameRelation:
      return {{"rule", "rename_relation"}, {"old", r.relation}, {"new", r.new_name}};
    case MappingRule::Kind::RenameAttribute:
      return {{"rule", "rename_attribute"},
              {"relation", r.relation},
              {"old", r.old_name},
              {"new", r.new_name}};
    case MappingRule::Kind::HideRelation:
      return {{"rule", "hide_relation"}, {"name", r.relation}};
    case MappingRule::Kind::HideAttribute:
      return {{"rule", "hide_attribute"}, {"relation", r.relation}, {"name", r.old_name}};
    case MappingRule::Kind::UnionRelations:
      return {{"rule", "union_relations"}, {"sources", r.sources}, {"target", r.target}};
    case MappingRule::Kind::JoinView:
      return {{"rule", "join_view"},
              {"left", r.left_relation + "." + r.left_attr},
              {"right", r.right_relation + "." + r.right_attr},
              {"target", r.target}};
  }
  return nullptr;
}

inline MappingRule mapping_rule_from_json(const json& j) {
  try {
    std::string kind = j.at("rule").get<std::string>();
    if (kind == "rename_relation")
      return MappingRule::rename_relation(j.at("old"), j.at("new"));
    if (kind == "rename_attribute")
      return MappingRule::rename_attribute(j.at("relation"), j.at("old"), j.at("new"));
    if (kind == "hide_relation") return MappingRule::hide_relation(j.at("name"));
    if (kind == "hide_attribute")
      return MappingRule::hide_attribute(j.at("relation"), j.at("name"));
    if (kind == "union_relations")
      return MappingRule::union_relations(j.at("sources").get<std::vector<std::string>>(),
                                          j.at("target"));
    if (kind == "join_view") {
      auto split = [](const std::string& s) -> std::pair<std::string, std::string> {
        auto dot = s.find('.');
        if (dot == std::string::npos)
          throw Error("malformed-json", "join endpoint '" + s + "' is not relation.attr");
        return {s.substr(0, dot), s.substr(dot + 1)};
      };
      auto [lr, la] = split(j.at("left").get<std::string>());
      auto [rr, ra] = split(j.at("right").get<std::string>());
      return MappingRule::join_view(lr, la, rr, ra, j.at("target"));
    }
    throw Error("malformed-json", "unknown mapping rule '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error("malformed-json", std::string("mapping rule: ") + e.what());
  }
}

inline json mapping_to_json(const SchemaMapping& m) {
  json rules = json::array();
  for (const auto& r : m.rules) rules.push_back(mapping_rule_to_json(r));
  return {{"rules", std::move(rules)}};
}

inline SchemaMapping mapping_from_json(const json& j) {
  SchemaMapping m;
  const json& rules = j.is_array() ? j : j.at("rules");
  for (const auto& r : rules) m.rules.push_back(mapping_rule_from_json(r));
  return m;
}

}  // namespace mmw
