#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/result.hpp"
#include "mmw/core/schema.hpp"

namespace mmw {

// One declarative schema transformation step.
struct MappingRule {
  enum class Kind {
    RenameRelation,   // relation(=old), new_name
    RenameAttribute,  // relation, old=attribute old name, new_name
    HideRelation,     // relation
    HideAttribute,    // relation, old
    UnionRelations,   // sources, target; consumes the sources
    JoinView          // left/right "relation.attr", target; inputs stay visible
  };

  Kind kind = Kind::RenameRelation;
  std::string relation;
  std::string old_name;
  std::string new_name;
  std::vector<std::string> sources;
  std::string target;
  std::string left_relation, left_attr;
  std::string right_relation, right_attr;

  static MappingRule rename_relation(std::string old, std::string nw) {
    MappingRule r;
    r.kind = Kind::RenameRelation;
    r.relation = std::move(old);
    r.new_name = std::move(nw);
    return r;
  }
  static MappingRule rename_attribute(std::string rel, std::string old, std::string nw) {
    MappingRule r;
    r.kind = Kind::RenameAttribute;
    r.relation = std::move(rel);
    r.old_name = std::move(old);
    r.new_name = std::move(nw);
    return r;
  }
  static MappingRule hide_relation(std::string rel) {
    MappingRule r;
    r.kind = Kind::HideRelation;
    r.relation = std::move(rel);
    return r;
  }
  static MappingRule hide_attribute(std::string rel, std::string attr) {
    MappingRule r;
    r.kind = Kind::HideAttribute;
    r.relation = std::move(rel);
    r.old_name = std::move(attr);
    return r;
  }
  static MappingRule union_relations(std::vector<std::string> sources, std::string target) {
    MappingRule r;
    r.kind = Kind::UnionRelations;
    r.sources = std::move(sources);
    r.target = std::move(target);
    return r;
  }
  static MappingRule join_view(std::string left_rel, std::string left_attr,
                               std::string right_rel, std::string right_attr,
                               std::string target) {
    MappingRule r;
    r.kind = Kind::JoinView;
    r.left_relation = std::move(left_rel);
    r.left_attr = std::move(left_attr);
    r.right_relation = std::move(right_rel);
    r.right_attr = std::move(right_attr);
    r.target = std::move(target);
    return r;
  }
};

struct SchemaMapping {
  std::vector<MappingRule> rules;
};

// Resolution of one visible relation back to a concrete input relation.
// `child` is empty when the correspondence is over a single schema; mediators
// fill it with the owning child's id. attrs lists (visible, native) pairs in
// attribute order.
struct BaseBinding {
  std::string child;
  std::string relation;
  std::vector<std::pair<std::string, std::string>> attrs;

  const std::string* native_attr(const std::string& visible) const {
    for (const auto& [vis, nat] : attrs)
      if (vis == visible) return &nat;
    return nullptr;
  }
  const std::string* visible_attr(const std::string& native) const {
    for (const auto& [vis, nat] : attrs)
      if (nat == native) return &vis;
    return nullptr;
  }
};

// How one visible relation resolves to input relations: directly, as a bag
// union of several inputs, or as an equi-join view of two inputs.
struct RelBinding {
  enum class Kind { Base, Union, Join };

  Kind kind = Kind::Base;
  std::vector<BaseBinding> bases;  // 1 for Base, >=2 for Union, 2 for Join
  // Join only: native key attribute name on each side.
  std::string left_key;
  std::string right_key;
};

// Total map from visible output names to input names.
struct NameCorrespondence {
  std::map<std::string, RelBinding> relations;

  const RelBinding* find(const std::string& visible_relation) const {
    auto it = relations.find(visible_relation);
    return it == relations.end() ? nullptr : &it->second;
  }
};

struct MappedSchema {
  CanonicalSchema schema;
  NameCorrespondence correspondence;
};

namespace detail {

inline RelationDef& require_relation(CanonicalSchema& s, const std::string& name) {
  for (auto& r : s.relations)
    if (r.name == name) return r;
  throw Error("dangling-name-reference", "no visible relation '" + name + "'");
}

inline void require_unused(const CanonicalSchema& s, const std::string& name) {
  if (s.find_relation(name))
    throw Error("name-collision", "relation name '" + name + "' already in use");
}

inline void erase_relation(CanonicalSchema& s, const std::string& name) {
  std::erase_if(s.relations, [&](const RelationDef& r) { return r.name == name; });
}

// Rename the visible side of an attribute across a binding.
inline void rename_visible_attr(RelBinding& b, const std::string& old_name,
                                const std::string& new_name) {
  for (auto& base : b.bases)
    for (auto& [vis, nat] : base.attrs)
      if (vis == old_name) vis = new_name;
}

}  // namespace detail

// Applies mapping rules in order. Throws Error on a rule referencing names
// not visible at its position (dangling-name-reference), unioning relations
// with differing attribute lists (union-incompatible-sources), colliding
// output names (name-collision), mismatched join key types or colliding view
// attributes (join-incompatible), or hiding a join key of a later JoinView
// target (the key must stay addressable for query decomposition).
inline MappedSchema apply_schema_mapping(const CanonicalSchema& input,
                                         const SchemaMapping& mapping) {
  MappedSchema out;
  out.schema = input;
  for (const auto& rel : input.relations) {
    RelBinding b;
    b.kind = RelBinding::Kind::Base;
    BaseBinding base;
    base.relation = rel.name;
    for (const auto& a : rel.attributes) base.attrs.emplace_back(a.name, a.name);
    b.bases.push_back(std::move(base));
    out.correspondence.relations.emplace(rel.name, std::move(b));
  }

  for (const auto& rule : mapping.rules) {
    switch (rule.kind) {
      case MappingRule::Kind::RenameRelation: {
        RelationDef& rel = detail::require_relation(out.schema, rule.relation);
        if (rule.new_name != rule.relation) detail::require_unused(out.schema, rule.new_name);
        auto node = out.correspondence.relations.extract(rule.relation);
        rel.name = rule.new_name;
        node.key() = rule.new_name;
        out.correspondence.relations.insert(std::move(node));
        break;
      }
      case MappingRule::Kind::RenameAttribute: {
        RelationDef& rel = detail::require_relation(out.schema, rule.relation);
        if (!rel.find_attribute(rule.old_name))
          throw Error("dangling-name-reference",
                      "relation '" + rule.relation + "' has no attribute '" + rule.old_name + "'");
        if (rule.new_name != rule.old_name && rel.find_attribute(rule.new_name))
          throw Error("name-collision",
                      "attribute '" + rule.new_name + "' already in relation '" + rule.relation + "'");
        for (auto& a : rel.attributes)
          if (a.name == rule.old_name) a.name = rule.new_name;
        detail::rename_visible_attr(out.correspondence.relations.at(rule.relation),
                                    rule.old_name, rule.new_name);
        break;
      }
      case MappingRule::Kind::HideRelation: {
        detail::require_relation(out.schema, rule.relation);
        detail::erase_relation(out.schema, rule.relation);
        out.correspondence.relations.erase(rule.relation);
        break;
      }
      case MappingRule::Kind::HideAttribute: {
        RelationDef& rel = detail::require_relation(out.schema, rule.relation);
        if (!rel.find_attribute(rule.old_name))
          throw Error("dangling-name-reference",
                      "relation '" + rule.relation + "' has no attribute '" + rule.old_name + "'");
        std::erase_if(rel.attributes,
                      [&](const AttributeDef& a) { return a.name == rule.old_name; });
        RelBinding& b = out.correspondence.relations.at(rule.relation);
        if (b.kind == RelBinding::Kind::Join) {
          const std::string* l = b.bases[0].visible_attr(b.left_key);
          const std::string* r = b.bases[1].visible_attr(b.right_key);
          if ((l && *l == rule.old_name) || (r && *r == rule.old_name))
            throw Error("join-incompatible",
                        "cannot hide join key '" + rule.old_name + "' of view '" +
                            rule.relation + "'");
        }
        for (auto& base : b.bases)
          std::erase_if(base.attrs, [&](const auto& p) { return p.first == rule.old_name; });
        break;
      }
      case MappingRule::Kind::UnionRelations: {
        if (rule.sources.size() < 2)
          throw Error("union-incompatible-sources", "union needs at least two sources");
        detail::require_unused(out.schema, rule.target);
        std::vector<const RelationDef*> rels;
        for (const auto& src : rule.sources)
          rels.push_back(&detail::require_relation(out.schema, src));
        for (std::size_t i = 1; i < rels.size(); ++i) {
          if (rels[i]->attributes.size() != rels[0]->attributes.size())
            throw Error("union-incompatible-sources",
                        "'" + rule.sources[i] + "' and '" + rule.sources[0] +
                            "' have different attribute counts");
          for (std::size_t j = 0; j < rels[0]->attributes.size(); ++j) {
            const auto& a = rels[0]->attributes[j];
            const auto& b = rels[i]->attributes[j];
            if (a.name != b.name || a.type != b.type)
              throw Error("union-incompatible-sources",
                          "attribute lists of '" + rule.sources[0] + "' and '" +
                              rule.sources[i] + "' differ at position " + std::to_string(j));
          }
        }
        RelBinding merged;
        merged.kind = RelBinding::Kind::Union;
        for (const auto& src : rule.sources) {
          RelBinding& b = out.correspondence.relations.at(src);
          if (b.kind != RelBinding::Kind::Base)
            throw Error("union-incompatible-sources",
                        "'" + src + "' is itself a derived view; union sources must be plain relations");
          merged.bases.push_back(b.bases[0]);
        }
        RelationDef target;
        target.name = rule.target;
        target.attributes = rels[0]->attributes;
        for (std::size_t j = 0; j < target.attributes.size(); ++j) {
          bool nullable = false;
          for (const auto* r : rels) nullable = nullable || r->attributes[j].nullable;
          target.attributes[j].nullable = nullable;
        }
        for (const auto& src : rule.sources) {
          detail::erase_relation(out.schema, src);
          out.correspondence.relations.erase(src);
        }
        out.schema.relations.push_back(std::move(target));
        out.correspondence.relations.emplace(rule.target, std::move(merged));
        break;
      }
      case MappingRule::Kind::JoinView: {
        detail::require_unused(out.schema, rule.target);
        const RelationDef& left = detail::require_relation(out.schema, rule.left_relation);
        const RelationDef& right = detail::require_relation(out.schema, rule.right_relation);
        if (rule.left_relation == rule.right_relation)
          throw Error("join-incompatible", "join view requires two distinct relations");
        const AttributeDef* lk = left.find_attribute(rule.left_attr);
        const AttributeDef* rk = right.find_attribute(rule.right_attr);
        if (!lk)
          throw Error("dangling-name-reference",
                      "relation '" + rule.left_relation + "' has no attribute '" + rule.left_attr + "'");
        if (!rk)
          throw Error("dangling-name-reference",
                      "relation '" + rule.right_relation + "' has no attribute '" + rule.right_attr + "'");
        if (lk->type != rk->type)
          throw Error("join-incompatible",
                      "join key types differ: " + lk->type + " vs " + rk->type);
        RelationDef target;
        target.name = rule.target;
        target.attributes = left.attributes;
        std::set<std::string> names;
        for (const auto& a : left.attributes) names.insert(a.name);
        for (const auto& a : right.attributes) {
          if (!names.insert(a.name).second)
            throw Error("join-incompatible",
                        "attribute '" + a.name + "' appears on both sides of view '" +
                            rule.target + "'");
          target.attributes.push_back(a);
        }
        const RelBinding& lb = out.correspondence.relations.at(rule.left_relation);
        const RelBinding& rb = out.correspondence.relations.at(rule.right_relation);
        if (lb.kind != RelBinding::Kind::Base || rb.kind != RelBinding::Kind::Base)
          throw Error("join-incompatible", "join view inputs must be plain relations");
        RelBinding joined;
        joined.kind = RelBinding::Kind::Join;
        joined.bases = {lb.bases[0], rb.bases[0]};
        joined.left_key = *lb.bases[0].native_attr(rule.left_attr);
        joined.right_key = *rb.bases[0].native_attr(rule.right_attr);
        out.schema.relations.push_back(std::move(target));
        out.correspondence.relations.emplace(rule.target, std::move(joined));
        break;
      }
    }
  }
  return out;
}

// Rewrites a query against a mapped schema back to the names of one base
// binding. Only valid for Base bindings; unions and joins decompose into
// per-base queries at the mediator instead.
inline CanonicalQuery reverse_translate_query(const CanonicalQuery& query,
                                              const BaseBinding& base) {
  CanonicalQuery out = query;
  out.target = base.relation;
  for (auto& p : out.projection) {
    const std::string* nat = base.native_attr(p);
    if (!nat) throw Error("unresolvable-name", "attribute '" + p + "' has no source mapping");
    p = *nat;
  }
  if (out.selection) {
    auto rewrite = [&](auto&& self, Predicate& pred) -> void {
      if (pred.kind == Predicate::Kind::Compare) {
        const std::string* nat = base.native_attr(pred.attribute);
        if (!nat)
          throw Error("unresolvable-name",
                      "attribute '" + pred.attribute + "' has no source mapping");
        pred.attribute = *nat;
        return;
      }
      for (auto& c : pred.children) self(self, c);
    };
    rewrite(rewrite, *out.selection);
  }
  return out;
}

// Renames result attributes from native names back to the visible names of a
// base binding. Throws unmapped-attribute for columns the binding cannot name.
inline CanonicalResult forward_translate_result(const CanonicalResult& native,
                                                const BaseBinding& base) {
  CanonicalResult out = native;
  for (auto& attr : out.attributes) {
    const std::string* vis = base.visible_attr(attr.name);
    if (!vis)
      throw Error("unmapped-attribute",
                  "native attribute '" + attr.name + "' has no visible name");
    attr.name = *vis;
  }
  return out;
}

}  // namespace mmw
