#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "mmw/mask/mask.hpp"

// The tabular CLI mask kind: a plain-text catalog for schemas, a minimal
// select statement for queries, and aligned-text or CSV tables for results.
//
// Query grammar:
//   select <field[,field...]|*> from <resource>
//     [where <field> <op> <literal> [and ...]] [limit <n>]
// with op in =, !=, <>, <, <=, >, >=, like. String literals are quoted with
// ' or ".

namespace mmw {

inline constexpr const char* kTabularMaskKind = "tabular";

class TabularSchemaTranslator : public SchemaTranslator {
public:
  std::string kind() const override { return kTabularMaskKind; }

  MaskedBlob render_schema(const CanonicalSchema& view) override {
    std::ostringstream out;
    for (const auto& rel : view.relations) {
      out << rel.name << "(";
      for (std::size_t i = 0; i < rel.attributes.size(); ++i) {
        if (i > 0) out << ", ";
        out << rel.attributes[i].name << ":" << rel.attributes[i].type;
        if (!rel.attributes[i].nullable) out << "!";
      }
      out << ")\n";
    }
    return {kTabularMaskKind, "text/plain", out.str()};
  }
};

namespace detail {

struct SqlToken {
  std::string text;
  bool quoted = false;
};

inline std::vector<SqlToken> tokenize_select(const std::string& input) {
  std::vector<SqlToken> out;
  std::size_t i = 0;
  auto is_sym = [](char c) {
    return c == '=' || c == '!' || c == '<' || c == '>' || c == ',';
  };
  while (i < input.size()) {
    char c = input[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      std::size_t end = input.find(c, i + 1);
      if (end == std::string::npos)
        throw Error("malformed-masked-query", "unterminated string literal");
      out.push_back({input.substr(i + 1, end - i - 1), true});
      i = end + 1;
    } else if (is_sym(c)) {
      std::size_t j = i;
      while (j < input.size() && is_sym(input[j]) && input[j] != ',') ++j;
      if (c == ',') j = i + 1;
      out.push_back({input.substr(i, j - i), false});
      i = j;
    } else {
      std::size_t j = i;
      while (j < input.size() && !std::isspace(static_cast<unsigned char>(input[j])) &&
             !is_sym(input[j]) && input[j] != '\'' && input[j] != '"')
        ++j;
      out.push_back({input.substr(i, j - i), false});
      i = j;
    }
  }
  return out;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::optional<CmpOp> sql_op(const std::string& tok) {
  if (tok == "=") return CmpOp::Eq;
  if (tok == "!=" || tok == "<>") return CmpOp::Neq;
  if (tok == "<") return CmpOp::Lt;
  if (tok == "<=") return CmpOp::Lte;
  if (tok == ">") return CmpOp::Gt;
  if (tok == ">=") return CmpOp::Gte;
  if (lower(tok) == "like") return CmpOp::Like;
  return std::nullopt;
}

inline Value sql_literal(const SqlToken& tok) {
  if (tok.quoted) return Value(tok.text);
  std::string low = lower(tok.text);
  if (low == "true") return Value(true);
  if (low == "false") return Value(false);
  try {
    if (tok.text.find('.') != std::string::npos) {
      std::size_t pos = 0;
      double d = std::stod(tok.text, &pos);
      if (pos == tok.text.size()) return Value(d);
    } else {
      std::size_t pos = 0;
      std::int64_t v = std::stoll(tok.text, &pos);
      if (pos == tok.text.size()) return Value(v);
    }
  } catch (const std::exception&) {
  }
  throw Error("malformed-masked-query", "cannot read literal '" + tok.text + "'");
}

inline std::string render_value(const Value& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.as_string();
  if (v.is_integer()) return std::to_string(v.as_integer());
  if (v.is_boolean()) return v.as_boolean() ? "true" : "false";
  std::ostringstream out;
  out << v.as_float();
  return out.str();
}

}  // namespace detail

class TabularQueryTranslator : public QueryTranslator {
public:
  CanonicalQuery parse_query(const MaskedBlob& query, const CanonicalSchema& view) override {
    std::vector<detail::SqlToken> toks = detail::tokenize_select(query.bytes);
    std::size_t pos = 0;
    auto peek = [&]() -> const detail::SqlToken* {
      return pos < toks.size() ? &toks[pos] : nullptr;
    };
    auto next = [&](const char* what) -> const detail::SqlToken& {
      if (pos >= toks.size())
        throw Error("malformed-masked-query", std::string("expected ") + what);
      return toks[pos++];
    };
    auto keyword = [&](const char* kw) {
      const detail::SqlToken& t = next(kw);
      if (t.quoted || detail::lower(t.text) != kw)
        throw Error("malformed-masked-query",
                    std::string("expected '") + kw + "', got '" + t.text + "'");
    };

    keyword("select");
    CanonicalQuery out;
    std::vector<std::string> fields;
    bool star = false;
    while (true) {
      const detail::SqlToken& t = next("field list");
      if (!t.quoted && t.text == "*" && fields.empty()) {
        star = true;
        break;
      }
      fields.push_back(t.text);
      const detail::SqlToken* sep = peek();
      if (sep && !sep->quoted && sep->text == ",") {
        ++pos;
        continue;
      }
      break;
    }
    keyword("from");
    out.target = next("resource name").text;
    const RelationDef* rel = view.find_relation(out.target);
    if (!rel) throw Error("unknown-masked-resource", "no resource '" + out.target + "'");
    if (!star) {
      for (const auto& f : fields) {
        if (!rel->find_attribute(f))
          throw Error("unknown-masked-field",
                      "resource '" + out.target + "' has no field '" + f + "'");
        out.projection.push_back(f);
      }
    }

    std::vector<Predicate> conjuncts;
    while (const detail::SqlToken* t = peek()) {
      std::string kw = detail::lower(t->text);
      if (!t->quoted && kw == "where" && conjuncts.empty()) {
        ++pos;
      } else if (!t->quoted && kw == "and" && !conjuncts.empty()) {
        ++pos;
      } else if (!t->quoted && kw == "limit") {
        ++pos;
        const detail::SqlToken& n = next("limit value");
        try {
          std::size_t p = 0;
          long long v = std::stoll(n.text, &p);
          if (p != n.text.size() || v < 0) throw std::invalid_argument(n.text);
          out.limit = static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
          throw Error("malformed-masked-query", "limit '" + n.text + "' is not a non-negative integer");
        }
        if (peek()) throw Error("malformed-masked-query", "trailing input after limit");
        break;
      } else {
        throw Error("malformed-masked-query", "unexpected token '" + t->text + "'");
      }
      const detail::SqlToken& field = next("field");
      if (!rel->find_attribute(field.text))
        throw Error("unknown-masked-field",
                    "resource '" + out.target + "' has no field '" + field.text + "'");
      auto op = detail::sql_op(next("operator").text);
      if (!op) throw Error("malformed-masked-query", "unknown operator");
      Value lit = detail::sql_literal(next("literal"));
      conjuncts.push_back(Predicate::compare(field.text, *op, std::move(lit)));
    }
    out.selection = detail::conjoin(std::move(conjuncts));
    return out;
  }
};

class TabularResultTranslator : public ResultTranslator {
public:
  enum class Format { Table, Csv };

  explicit TabularResultTranslator(Format format = Format::Table) : format_(format) {}

  MaskedBlob render_result(const CanonicalResult& view_result) override {
    return format_ == Format::Csv ? render_csv(view_result) : render_table(view_result);
  }

private:
  static MaskedBlob render_csv(const CanonicalResult& r) {
    std::ostringstream out;
    for (std::size_t i = 0; i < r.attributes.size(); ++i)
      out << (i ? "," : "") << r.attributes[i].name;
    out << "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << detail::render_value(row[i]);
      out << "\n";
    }
    return {kTabularMaskKind, "text/csv", out.str()};
  }

  static MaskedBlob render_table(const CanonicalResult& r) {
    std::vector<std::size_t> widths;
    for (const auto& a : r.attributes) widths.push_back(a.name.size());
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : r.rows) {
      std::vector<std::string> line;
      for (std::size_t i = 0; i < row.size(); ++i) {
        line.push_back(detail::render_value(row[i]));
        widths[i] = std::max(widths[i], line.back().size());
      }
      cells.push_back(std::move(line));
    }
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& line) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        out << (i ? " | " : "") << line[i]
            << std::string(widths[i] - line[i].size(), ' ');
      }
      out << "\n";
    };
    std::vector<std::string> header;
    for (const auto& a : r.attributes) header.push_back(a.name);
    emit_row(header);
    std::size_t total = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] + (i ? 3 : 0);
    out << std::string(total, '-') << "\n";
    for (const auto& line : cells) emit_row(line);
    return {kTabularMaskKind, "text/plain", out.str()};
  }

  Format format_;
};

}  // namespace mmw
