#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/core/json_codec.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/schema.hpp"
#include "mmw/core/value.hpp"

namespace mmw {

// What a wrapper may delegate to its native store.
struct WrapperCapabilities {
  bool supports_selection = false;
  std::set<CmpOp> supported_ops;
  bool supports_projection = false;
  bool supports_limit = false;

  static WrapperCapabilities all() {
    return {true, {CmpOp::Eq, CmpOp::Neq, CmpOp::Lt, CmpOp::Lte, CmpOp::Gt, CmpOp::Gte, CmpOp::Like},
            true, true};
  }
  static WrapperCapabilities none() { return {}; }
};

// The adapter contract a data-source kind must fill in: list collections,
// read schema hints, scan rows.
class SourceAdapter {
public:
  virtual ~SourceAdapter() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> collections() = 0;
  virtual RelationDef schema_hint(const std::string& collection) = 0;
  virtual std::vector<Row> scan(const std::string& collection) = 0;
  virtual WrapperCapabilities capabilities() const = 0;
};

// ---------------------------------------------------------------------------
// CSV directory: one relation per *.csv file, header line `name:type` per
// column. Comma-separated, UTF-8, no quoting of commas. Empty cell is null.
// Native capabilities: projection only.
class CsvAdapter : public SourceAdapter {
public:
  CsvAdapter(std::string id, std::filesystem::path dir)
      : id_(std::move(id)), dir_(std::move(dir)) {}

  std::string id() const override { return id_; }

  std::vector<std::string> collections() override {
    if (!std::filesystem::is_directory(dir_))
      throw Error("source-unreachable", "no such directory: " + dir_.string());
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
      if (entry.path().extension() == ".csv") out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  RelationDef schema_hint(const std::string& collection) override {
    std::ifstream in = open(collection);
    std::string header;
    if (!std::getline(in, header))
      throw Error("unmappable-type", "file for '" + collection + "' has no header line");
    RelationDef rel;
    rel.name = collection;
    for (const std::string& cell : split(header)) {
      auto colon = cell.find(':');
      if (colon == std::string::npos)
        throw Error("unmappable-type",
                    "header cell '" + cell + "' in '" + collection + "' is not name:type");
      AttributeDef attr;
      attr.name = cell.substr(0, colon);
      attr.type = cell.substr(colon + 1);
      if (!attr.typed())
        throw Error("unmappable-type",
                    "column '" + attr.name + "' in '" + collection + "' has unknown type '" +
                        attr.type + "'");
      rel.attributes.push_back(std::move(attr));
    }
    return rel;
  }

  std::vector<Row> scan(const std::string& collection) override {
    RelationDef rel = schema_hint(collection);
    std::ifstream in = open(collection);
    std::string line;
    std::getline(in, line);  // header
    std::vector<Row> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells = split(line);
      if (cells.size() != rel.attributes.size())
        throw Error("unmappable-type",
                    "row in '" + collection + "' has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(rel.attributes.size()));
      Row row;
      for (std::size_t i = 0; i < cells.size(); ++i)
        row.push_back(parse_cell(cells[i], *rel.attributes[i].typed(), collection,
                                 rel.attributes[i].name));
      rows.push_back(std::move(row));
    }
    return rows;
  }

  WrapperCapabilities capabilities() const override {
    WrapperCapabilities caps;
    caps.supports_projection = true;
    return caps;
  }

private:
  std::ifstream open(const std::string& collection) {
    std::filesystem::path p = dir_ / (collection + ".csv");
    std::ifstream in(p);
    if (!in) throw Error("source-unreachable", "cannot read " + p.string());
    return in;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        out.push_back(line.substr(start));
        return out;
      }
      out.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
  }

  static Value parse_cell(const std::string& cell, AttrType type, const std::string& collection,
                          const std::string& attr) {
    if (cell.empty()) return Value{};
    try {
      switch (type) {
        case AttrType::String: return Value(cell);
        case AttrType::Integer: {
          std::size_t pos = 0;
          std::int64_t v = std::stoll(cell, &pos);
          if (pos != cell.size()) throw std::invalid_argument(cell);
          return Value(v);
        }
        case AttrType::Float: {
          std::size_t pos = 0;
          double v = std::stod(cell, &pos);
          if (pos != cell.size()) throw std::invalid_argument(cell);
          return Value(v);
        }
        case AttrType::Boolean:
          if (cell == "true") return Value(true);
          if (cell == "false") return Value(false);
          throw std::invalid_argument(cell);
      }
    } catch (const std::exception&) {
      throw Error("unmappable-type", "cell '" + cell + "' in '" + collection + "." + attr +
                                         "' is not a valid " + to_string(type));
    }
    return Value{};
  }

  std::string id_;
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// JSON-lines directory: one relation per *.jsonl file. Attribute set comes
// from the first row; types are inferred from the first non-null occurrence
// of each field. Integer/float mixes widen to float; any other kind conflict
// is unmappable-type. Missing fields read as null; fields absent from the
// first row are ignored. Native capabilities: selection {eq} + projection.
class JsonlAdapter : public SourceAdapter {
public:
  JsonlAdapter(std::string id, std::filesystem::path dir)
      : id_(std::move(id)), dir_(std::move(dir)) {}

  std::string id() const override { return id_; }

  std::vector<std::string> collections() override {
    if (!std::filesystem::is_directory(dir_))
      throw Error("source-unreachable", "no such directory: " + dir_.string());
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
      if (entry.path().extension() == ".jsonl") out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  RelationDef schema_hint(const std::string& collection) override {
    return load(collection).schema;
  }

  std::vector<Row> scan(const std::string& collection) override {
    return load(collection).rows;
  }

  WrapperCapabilities capabilities() const override {
    WrapperCapabilities caps;
    caps.supports_selection = true;
    caps.supported_ops = {CmpOp::Eq};
    caps.supports_projection = true;
    return caps;
  }

private:
  struct Loaded {
    RelationDef schema;
    std::vector<Row> rows;
  };

  Loaded load(const std::string& collection) {
    std::filesystem::path p = dir_ / (collection + ".jsonl");
    std::ifstream in(p);
    if (!in) throw Error("source-unreachable", "cannot read " + p.string());

    Loaded out;
    out.schema.name = collection;
    std::vector<json> docs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        docs.push_back(json::parse(line));
      } catch (const json::exception& e) {
        throw Error("unmappable-type", "bad JSON line in '" + collection + "': " + e.what());
      }
    }
    if (docs.empty()) return out;

    std::vector<std::string> fields;
    for (const auto& [key, _] : docs.front().items()) fields.push_back(key);

    for (const auto& field : fields) {
      std::string type;
      for (const auto& doc : docs) {
        if (!doc.contains(field) || doc.at(field).is_null()) continue;
        std::string t = json_kind(doc.at(field), collection, field);
        if (type.empty() || (type == "integer" && t == "float")) {
          type = t;
        } else if (type == "float" && t == "integer") {
          // widened already
        } else if (t != type) {
          throw Error("unmappable-type", "field '" + field + "' in '" + collection +
                                             "' is " + type + " in one row and " + t +
                                             " in another");
        }
      }
      AttributeDef attr;
      attr.name = field;
      attr.type = type.empty() ? "string" : type;
      out.schema.attributes.push_back(std::move(attr));
    }

    for (const auto& doc : docs) {
      Row row;
      for (const auto& attr : out.schema.attributes) {
        if (!doc.contains(attr.name) || doc.at(attr.name).is_null()) {
          row.push_back(Value{});
        } else {
          row.push_back(value_from_json(doc.at(attr.name), *attr.typed()));
        }
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  static std::string json_kind(const json& j, const std::string& collection,
                               const std::string& field) {
    if (j.is_string()) return "string";
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
    if (j.is_number_float()) return "float";
    throw Error("unmappable-type",
                "field '" + field + "' in '" + collection + "' holds a non-scalar value");
  }

  std::string id_;
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// In-memory store seeded from data. Native capabilities: all.
class MemAdapter : public SourceAdapter {
public:
  MemAdapter(std::string id, std::vector<RelationData> relations)
      : id_(std::move(id)), relations_(std::move(relations)) {}

  // Seed format: {"relations":[{"name":..,"attributes":[{name,type,nullable}],"rows":[[..]]}]}
  static std::unique_ptr<MemAdapter> from_seed(std::string id, const json& seed) {
    std::vector<RelationData> rels;
    try {
      for (const auto& jr : seed.at("relations")) {
        RelationData rd;
        rd.schema.name = jr.at("name").get<std::string>();
        for (const auto& ja : jr.at("attributes")) {
          AttributeDef a;
          a.name = ja.at("name").get<std::string>();
          a.type = ja.at("type").get<std::string>();
          a.nullable = ja.value("nullable", true);
          if (!a.typed())
            throw Error("unmappable-type", "seed attribute '" + a.name + "' has unknown type");
          rd.schema.attributes.push_back(std::move(a));
        }
        for (const auto& jrow : jr.value("rows", json::array())) {
          Row row;
          for (std::size_t i = 0; i < jrow.size(); ++i)
            row.push_back(value_from_json(jrow[i], *rd.schema.attributes.at(i).typed()));
          rd.rows.push_back(std::move(row));
        }
        rels.push_back(std::move(rd));
      }
    } catch (const json::exception& e) {
      throw Error("unmappable-type", std::string("bad seed: ") + e.what());
    }
    return std::make_unique<MemAdapter>(std::move(id), std::move(rels));
  }

  std::string id() const override { return id_; }

  std::vector<std::string> collections() override {
    std::vector<std::string> out;
    for (const auto& r : relations_) out.push_back(r.schema.name);
    return out;
  }

  RelationDef schema_hint(const std::string& collection) override {
    return find(collection).schema;
  }

  std::vector<Row> scan(const std::string& collection) override {
    return find(collection).rows;
  }

  WrapperCapabilities capabilities() const override { return WrapperCapabilities::all(); }

private:
  const RelationData& find(const std::string& collection) const {
    for (const auto& r : relations_)
      if (r.schema.name == collection) return r;
    throw Error("source-unreachable", "no collection '" + collection + "'");
  }

  std::string id_;
  std::vector<RelationData> relations_;
};

// Builds an adapter from config JSON: {"kind":"csv"|"jsonl"|"mem","path":..,"seed":..}.
inline std::unique_ptr<SourceAdapter> make_adapter(const std::string& id, const json& config) {
  std::string kind = config.value("kind", "");
  if (kind == "csv") return std::make_unique<CsvAdapter>(id, config.at("path").get<std::string>());
  if (kind == "jsonl")
    return std::make_unique<JsonlAdapter>(id, config.at("path").get<std::string>());
  if (kind == "mem") return MemAdapter::from_seed(id, config.value("seed", json{{"relations", json::array()}}));
  throw Error("unmappable-type", "unknown adapter kind '" + kind + "'");
}

}  // namespace mmw
