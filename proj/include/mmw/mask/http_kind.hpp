#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mmw/core/json_codec.hpp"
#include "mmw/mask/mask.hpp"

// The HTTP/JSON mask kind: resources addressed as URL path segments, queries
// as `select` / `where` / `limit` parameters, results as JSON arrays.
//
// Grammar: GET /{resource}?select=f1,f2&where=field.op.literal[&where=...]&limit=n
// Multiple where parameters conjoin with AND; op is one of eq,neq,lt,lte,gt,
// gte,like. OR/NOT are not expressible in this kind.

namespace mmw {

inline constexpr const char* kHttpMaskKind = "http-json";

namespace detail {

inline std::string url_decode(const std::string& in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '+') {
      out.push_back(' ');
    } else if (in[i] == '%' && i + 2 < in.size()) {
      auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      int hi = hex(in[i + 1]), lo = hex(in[i + 2]);
      if (hi < 0 || lo < 0) throw Error("malformed-masked-query", "bad percent escape");
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 2;
    } else {
      out.push_back(in[i]);
    }
  }
  return out;
}

inline Value typed_literal(const std::string& raw, AttrType type) {
  try {
    switch (type) {
      case AttrType::String: return Value(raw);
      case AttrType::Integer: {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return Value(v);
      }
      case AttrType::Float: {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return Value(v);
      }
      case AttrType::Boolean:
        if (raw == "true") return Value(true);
        if (raw == "false") return Value(false);
        throw std::invalid_argument(raw);
    }
  } catch (const std::exception&) {
    throw Error("malformed-masked-query",
                "literal '" + raw + "' is not a valid " + to_string(type));
  }
  return Value{};
}

}  // namespace detail

class HttpSchemaTranslator : public SchemaTranslator {
public:
  std::string kind() const override { return kHttpMaskKind; }

  MaskedBlob render_schema(const CanonicalSchema& view) override {
    json resources = json::array();
    for (const auto& rel : view.relations) {
      json fields = json::array();
      for (const auto& attr : rel.attributes)
        fields.push_back(
            {{"name", attr.name}, {"type", attr.type}, {"nullable", attr.nullable}});
      resources.push_back({{"path", "/" + rel.name}, {"fields", std::move(fields)}});
    }
    return {kHttpMaskKind, "application/json", json{{"resources", resources}}.dump(2)};
  }
};

class HttpQueryTranslator : public QueryTranslator {
public:
  // blob.bytes holds the request target, e.g. "/persons?select=name&where=age.gte.18".
  CanonicalQuery parse_query(const MaskedBlob& query, const CanonicalSchema& view) override {
    const std::string& target = query.bytes;
    if (target.empty() || target[0] != '/')
      throw Error("malformed-masked-query", "expected a /resource path");
    std::size_t qmark = target.find('?');
    std::string resource = target.substr(1, qmark == std::string::npos ? qmark : qmark - 1);
    const RelationDef* rel = view.find_relation(resource);
    if (!rel) throw Error("unknown-masked-resource", "no resource '/" + resource + "'");

    CanonicalQuery out;
    out.target = resource;
    std::vector<Predicate> conjuncts;
    if (qmark != std::string::npos) {
      std::string params = target.substr(qmark + 1);
      std::size_t start = 0;
      while (start <= params.size()) {
        std::size_t amp = params.find('&', start);
        std::string param =
            params.substr(start, amp == std::string::npos ? amp : amp - start);
        if (!param.empty()) parse_param(param, *rel, out, conjuncts);
        if (amp == std::string::npos) break;
        start = amp + 1;
      }
    }
    out.selection = detail::conjoin(std::move(conjuncts));
    return out;
  }

private:
  static void parse_param(const std::string& param, const RelationDef& rel, CanonicalQuery& out,
                          std::vector<Predicate>& conjuncts) {
    std::size_t eq = param.find('=');
    if (eq == std::string::npos)
      throw Error("malformed-masked-query", "parameter '" + param + "' has no value");
    std::string key = param.substr(0, eq);
    std::string value = detail::url_decode(param.substr(eq + 1));

    if (key == "select") {
      std::size_t start = 0;
      while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        std::string field =
            value.substr(start, comma == std::string::npos ? comma : comma - start);
        if (field.empty()) throw Error("malformed-masked-query", "empty select field");
        if (!rel.find_attribute(field))
          throw Error("unknown-masked-field",
                      "resource '/" + rel.name + "' has no field '" + field + "'");
        out.projection.push_back(field);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else if (key == "where") {
      std::size_t d1 = value.find('.');
      std::size_t d2 = d1 == std::string::npos ? std::string::npos : value.find('.', d1 + 1);
      if (d1 == std::string::npos || d2 == std::string::npos)
        throw Error("malformed-masked-query",
                    "where clause '" + value + "' is not field.op.literal");
      std::string field = value.substr(0, d1);
      std::string op_token = value.substr(d1 + 1, d2 - d1 - 1);
      std::string literal = value.substr(d2 + 1);
      const AttributeDef* attr = rel.find_attribute(field);
      if (!attr)
        throw Error("unknown-masked-field",
                    "resource '/" + rel.name + "' has no field '" + field + "'");
      auto op = parse_cmp_op(op_token);
      if (!op)
        throw Error("malformed-masked-query", "unsupported operator '" + op_token + "'");
      conjuncts.push_back(
          Predicate::compare(field, *op, detail::typed_literal(literal, *attr->typed())));
    } else if (key == "limit") {
      try {
        std::size_t pos = 0;
        long long n = std::stoll(value, &pos);
        if (pos != value.size() || n < 0) throw std::invalid_argument(value);
        out.limit = static_cast<std::uint64_t>(n);
      } catch (const std::exception&) {
        throw Error("malformed-masked-query", "limit '" + value + "' is not a non-negative integer");
      }
    } else {
      throw Error("malformed-masked-query", "unknown parameter '" + key + "'");
    }
  }
};

class HttpResultTranslator : public ResultTranslator {
public:
  MaskedBlob render_result(const CanonicalResult& view_result) override {
    json rows = json::array();
    for (const auto& row : view_result.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size(); ++i)
        obj[view_result.attributes[i].name] = value_to_json(row[i]);
      rows.push_back(std::move(obj));
    }
    return {kHttpMaskKind, "application/json", rows.dump(2)};
  }
};

inline MaskedBlob http_masked_query(const std::string& request_target) {
  return {kHttpMaskKind, "application/x-www-form-urlencoded", request_target};
}

}  // namespace mmw
