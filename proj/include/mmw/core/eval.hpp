#pragma once

#include <string>
#include <vector>

#include "mmw/core/query.hpp"
#include "mmw/core/result.hpp"
#include "mmw/core/schema.hpp"
#include "mmw/core/value.hpp"

namespace mmw {

// One relation's contents: its definition plus ordered rows.
struct RelationData {
  RelationDef schema;
  std::vector<Row> rows;
};

namespace detail {

// SQL-style pattern match: '%' any sequence, '_' one character. Case-sensitive.
inline bool like_match(const std::string& text, const std::string& pattern,
                       std::size_t ti = 0, std::size_t pi = 0) {
  while (pi < pattern.size()) {
    char pc = pattern[pi];
    if (pc == '%') {
      // Collapse consecutive wildcards, then try every split point.
      while (pi + 1 < pattern.size() && pattern[pi + 1] == '%') ++pi;
      if (pi + 1 == pattern.size()) return true;
      for (std::size_t k = ti; k <= text.size(); ++k)
        if (like_match(text, pattern, k, pi + 1)) return true;
      return false;
    }
    if (ti >= text.size()) return false;
    if (pc != '_' && pc != text[ti]) return false;
    ++ti;
    ++pi;
  }
  return ti == text.size();
}

inline int compare_values(const Value& a, const Value& b) {
  if (a.is_string()) {
    const auto& x = a.as_string();
    const auto& y = b.as_string();
    return x < y ? -1 : (x == y ? 0 : 1);
  }
  if (a.is_integer()) {
    auto x = a.as_integer(), y = b.as_integer();
    return x < y ? -1 : (x == y ? 0 : 1);
  }
  if (a.is_float()) {
    auto x = a.as_float(), y = b.as_float();
    return x < y ? -1 : (x == y ? 0 : 1);
  }
  // booleans: only used for eq/neq
  return a.as_boolean() == b.as_boolean() ? 0 : 1;
}

// Comparison with null is false; NOT is plain two-valued negation.
inline bool eval_predicate(const Predicate& p, const RelationDef& rel, const Row& row) {
  switch (p.kind) {
    case Predicate::Kind::And: {
      for (const auto& c : p.children)
        if (!eval_predicate(c, rel, row)) return false;
      return true;
    }
    case Predicate::Kind::Or: {
      for (const auto& c : p.children)
        if (eval_predicate(c, rel, row)) return true;
      return false;
    }
    case Predicate::Kind::Not:
      return !eval_predicate(p.children.front(), rel, row);
    case Predicate::Kind::Compare:
      break;
  }
  std::size_t idx = 0;
  for (; idx < rel.attributes.size(); ++idx)
    if (rel.attributes[idx].name == p.attribute) break;
  const Value& v = row[idx];
  if (v.is_null()) return false;
  if (p.op == CmpOp::Like) return like_match(v.as_string(), p.literal.as_string());
  int c = compare_values(v, p.literal);
  switch (p.op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Neq: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Lte: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Gte: return c >= 0;
    case CmpOp::Like: break;
  }
  return false;
}

}  // namespace detail

// Reference brute-force evaluator: filter in source order, project, truncate.
// Pure; serves as the correctness oracle for pushdown/decomposition tests and
// as the residual-step evaluator in result merging.
//
// Precondition: `query` typechecks against `data.schema`.
inline CanonicalResult evaluate_query_oracle(const CanonicalQuery& query,
                                             const RelationData& data,
                                             const std::string& origin = "oracle") {
  CanonicalResult out;
  out.origin = origin;

  std::vector<std::size_t> proj_idx;
  if (query.projection.empty()) {
    for (std::size_t i = 0; i < data.schema.attributes.size(); ++i) proj_idx.push_back(i);
  } else {
    for (const auto& name : query.projection) {
      for (std::size_t i = 0; i < data.schema.attributes.size(); ++i)
        if (data.schema.attributes[i].name == name) {
          proj_idx.push_back(i);
          break;
        }
    }
  }
  for (std::size_t i : proj_idx) out.attributes.push_back(data.schema.attributes[i]);

  for (const Row& row : data.rows) {
    if (query.limit && out.rows.size() >= *query.limit) break;
    if (query.selection && !detail::eval_predicate(*query.selection, data.schema, row)) continue;
    Row projected;
    projected.reserve(proj_idx.size());
    for (std::size_t i : proj_idx) projected.push_back(row[i]);
    out.rows.push_back(std::move(projected));
  }
  return out;
}

}  // namespace mmw
