#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mmw/core/schema.hpp"
#include "mmw/core/value.hpp"

namespace mmw {

enum class CmpOp { Eq, Neq, Lt, Lte, Gt, Gte, Like };

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "eq";
    case CmpOp::Neq: return "neq";
    case CmpOp::Lt: return "lt";
    case CmpOp::Lte: return "lte";
    case CmpOp::Gt: return "gt";
    case CmpOp::Gte: return "gte";
    case CmpOp::Like: return "like";
  }
  return "?";
}

inline std::optional<CmpOp> parse_cmp_op(const std::string& s) {
  if (s == "eq") return CmpOp::Eq;
  if (s == "neq") return CmpOp::Neq;
  if (s == "lt") return CmpOp::Lt;
  if (s == "lte") return CmpOp::Lte;
  if (s == "gt") return CmpOp::Gt;
  if (s == "gte") return CmpOp::Gte;
  if (s == "like") return CmpOp::Like;
  return std::nullopt;
}

// Selection predicate tree. Leaves compare an attribute with a literal;
// inner nodes combine children with AND/OR/NOT (NOT has one child).
struct Predicate {
  enum class Kind { Compare, And, Or, Not };

  Kind kind = Kind::Compare;
  // Kind::Compare only:
  std::string attribute;
  CmpOp op = CmpOp::Eq;
  Value literal;
  // Inner nodes only:
  std::vector<Predicate> children;

  static Predicate compare(std::string attr, CmpOp op, Value lit) {
    Predicate p;
    p.kind = Kind::Compare;
    p.attribute = std::move(attr);
    p.op = op;
    p.literal = std::move(lit);
    return p;
  }
  static Predicate combine(Kind k, std::vector<Predicate> cs) {
    Predicate p;
    p.kind = k;
    p.children = std::move(cs);
    return p;
  }
  static Predicate and_(std::vector<Predicate> cs) { return combine(Kind::And, std::move(cs)); }
  static Predicate or_(std::vector<Predicate> cs) { return combine(Kind::Or, std::move(cs)); }
  static Predicate not_(Predicate c) { return combine(Kind::Not, {std::move(c)}); }

  int depth() const {
    int d = 0;
    for (const auto& c : children) d = std::max(d, c.depth());
    return d + 1;
  }

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

inline constexpr int kMaxPredicateDepth = 32;

// A query in the system format. An empty projection means all attributes.
struct CanonicalQuery {
  std::string target;
  std::vector<std::string> projection;
  std::optional<Predicate> selection;
  std::optional<std::uint64_t> limit;

  friend bool operator==(const CanonicalQuery&, const CanonicalQuery&) = default;
};

struct TypeError {
  std::string code;
  std::string detail;

  friend bool operator==(const TypeError&, const TypeError&) = default;
};

// Result of typechecking: on success `query` holds the typed query, with
// integer literals widened to float where the compared attribute is float.
struct TypecheckResult {
  std::optional<CanonicalQuery> query;
  std::vector<TypeError> errors;

  bool ok() const { return query.has_value(); }
};

namespace detail {

// Flattens nested ANDs into a conjunct list; non-AND nodes are single conjuncts.
inline void collect_conjuncts(const Predicate& p, std::vector<Predicate>& out) {
  if (p.kind == Predicate::Kind::And) {
    for (const auto& c : p.children) collect_conjuncts(c, out);
    return;
  }
  out.push_back(p);
}

inline void collect_attributes(const Predicate& p, std::set<std::string>& out) {
  if (p.kind == Predicate::Kind::Compare) {
    out.insert(p.attribute);
    return;
  }
  for (const auto& c : p.children) collect_attributes(c, out);
}

inline std::optional<Predicate> conjoin(std::vector<Predicate> preds) {
  if (preds.empty()) return std::nullopt;
  if (preds.size() == 1) return std::move(preds.front());
  return Predicate::and_(std::move(preds));
}

inline void typecheck_predicate(Predicate& p, const RelationDef& rel,
                                std::vector<TypeError>& errors) {
  if (p.kind != Predicate::Kind::Compare) {
    for (auto& c : p.children) typecheck_predicate(c, rel, errors);
    return;
  }
  const AttributeDef* attr = rel.find_attribute(p.attribute);
  if (!attr) {
    errors.push_back({"unknown-attribute",
                      "relation '" + rel.name + "' has no attribute '" + p.attribute + "'"});
    return;
  }
  auto type = attr->typed();
  if (!type) {
    errors.push_back({"unknown-type", "attribute '" + p.attribute + "' has unknown type"});
    return;
  }
  if (p.op == CmpOp::Like) {
    if (*type != AttrType::String || !p.literal.is_string()) {
      errors.push_back({"operator-unsupported-for-type",
                        "'like' requires a string attribute and pattern; attribute '" +
                            p.attribute + "' is " + to_string(*type)});
    }
    return;
  }
  if (*type == AttrType::Boolean && p.op != CmpOp::Eq && p.op != CmpOp::Neq) {
    errors.push_back({"operator-unsupported-for-type",
                      std::string("ordering operator '") + to_string(p.op) +
                          "' not supported on boolean attribute '" + p.attribute + "'"});
    return;
  }
  // Integer literals widen against float attributes.
  if (*type == AttrType::Float && p.literal.is_integer())
    p.literal = Value(static_cast<double>(p.literal.as_integer()));
  if (p.literal.is_null() || !p.literal.matches(*type)) {
    errors.push_back({"type-mismatch",
                      "literal does not match " + std::string(to_string(*type)) +
                          " attribute '" + p.attribute + "'"});
  }
}

}  // namespace detail

inline TypecheckResult typecheck_query(const CanonicalQuery& query,
                                       const CanonicalSchema& schema) {
  TypecheckResult res;
  const RelationDef* rel = schema.find_relation(query.target);
  if (!rel) {
    res.errors.push_back({"unknown-relation",
                          "schema '" + schema.name + "' has no relation '" + query.target + "'"});
    return res;
  }
  CanonicalQuery typed = query;
  for (const auto& proj : typed.projection) {
    if (!rel->find_attribute(proj))
      res.errors.push_back({"unknown-attribute",
                            "relation '" + rel->name + "' has no attribute '" + proj + "'"});
  }
  if (typed.selection) {
    if (typed.selection->depth() > kMaxPredicateDepth) {
      res.errors.push_back({"predicate-too-deep",
                            "selection tree exceeds depth " + std::to_string(kMaxPredicateDepth)});
    } else {
      detail::typecheck_predicate(*typed.selection, *rel, res.errors);
    }
  }
  if (res.errors.empty()) res.query = std::move(typed);
  return res;
}

}  // namespace mmw
