#pragma once

#include <string>
#include <vector>

#include "mmw/core/schema.hpp"
#include "mmw/core/value.hpp"

namespace mmw {

// A query result in the system format. Rows are ordered.
struct CanonicalResult {
  std::vector<AttributeDef> attributes;
  std::vector<Row> rows;
  std::string origin;

  friend bool operator==(const CanonicalResult&, const CanonicalResult&) = default;
};

inline std::vector<Violation> validate_result(const CanonicalResult& result) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const Row& row = result.rows[i];
    if (row.size() != result.attributes.size()) {
      out.push_back({"row-arity-mismatch",
                     "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                         " values, expected " + std::to_string(result.attributes.size())});
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto type = result.attributes[j].typed();
      if (!type) {
        out.push_back({"unknown-type", "attribute '" + result.attributes[j].name + "'"});
        continue;
      }
      if (!row[j].matches(*type))
        out.push_back({"value-type-mismatch",
                       "row " + std::to_string(i) + ", attribute '" +
                           result.attributes[j].name + "'"});
    }
  }
  return out;
}

}  // namespace mmw
