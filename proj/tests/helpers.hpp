#pragma once

// Shared test utilities: seeded random dataset/query generation, temp-dir
// source writers, a materialization oracle for name correspondences, result
// comparison that ignores wire-lossy attribute metadata, and a subprocess
// runner for CLI-level tests. Deliberately gtest-free so the acceptance
// binary can reuse everything.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmw/core/eval.hpp"
#include "mmw/core/mapping.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/result.hpp"
#include "mmw/core/schema.hpp"
#include "mmw/wrapper/adapter.hpp"

namespace mmwtest {

// ---------------------------------------------------------------------------
// Deterministic randomness. Every randomized test owns one Rng seeded from a
// constant so failures replay exactly.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}

  std::mt19937& engine() { return gen_; }

  int range(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_) < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
  }

 private:
  std::mt19937 gen_;
};

inline std::string random_word(Rng& rng, int min_len = 1, int max_len = 8) {
  int len = rng.range(min_len, max_len);
  std::string s;
  for (int i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.range(0, 25)));
  return s;
}

// Floats are generated as quarters so text round-trips (CSV) are exact.
inline double random_quarter(Rng& rng) { return rng.range(-200, 200) * 0.25; }

inline mmw::Value random_value(Rng& rng, mmw::AttrType type, bool allow_null) {
  if (allow_null && rng.chance(0.15)) return mmw::Value{};
  switch (type) {
    case mmw::AttrType::String: return mmw::Value(random_word(rng));
    case mmw::AttrType::Integer: return mmw::Value(rng.range(-50, 50));
    case mmw::AttrType::Float: return mmw::Value(random_quarter(rng));
    case mmw::AttrType::Boolean: return mmw::Value(rng.chance(0.5));
  }
  return mmw::Value{};
}

// ---------------------------------------------------------------------------
// Random datasets.
// ---------------------------------------------------------------------------

inline mmw::RelationDef random_relation(Rng& rng, const std::string& name) {
  static const std::vector<std::string> kTypes = {"string", "integer", "float", "boolean"};
  mmw::RelationDef rel;
  rel.name = name;
  int n_attrs = rng.range(2, 6);
  for (int i = 0; i < n_attrs; ++i) {
    mmw::AttributeDef attr;
    attr.name = "c" + std::to_string(i) + "_" + random_word(rng, 1, 4);
    attr.type = rng.pick(kTypes);
    attr.nullable = i != 0;  // keep one non-null column around
    rel.attributes.push_back(std::move(attr));
  }
  return rel;
}

inline std::vector<mmw::Row> random_rows(Rng& rng, const mmw::RelationDef& rel,
                                         int max_rows = 50) {
  std::vector<mmw::Row> rows;
  int n = rng.range(0, max_rows);
  for (int i = 0; i < n; ++i) {
    mmw::Row row;
    for (const auto& attr : rel.attributes)
      row.push_back(random_value(rng, *attr.typed(), attr.nullable));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline mmw::RelationData random_relation_data(Rng& rng, const std::string& name,
                                              int max_rows = 50) {
  mmw::RelationData data;
  data.schema = random_relation(rng, name);
  data.rows = random_rows(rng, data.schema, max_rows);
  return data;
}

// ---------------------------------------------------------------------------
// Random queries. Generated queries always typecheck against `rel`; literals
// are drawn from the data when possible so selections actually select.
// ---------------------------------------------------------------------------

inline mmw::Value literal_for(Rng& rng, const mmw::RelationDef& rel,
                              const std::vector<mmw::Row>& rows, std::size_t attr_idx) {
  mmw::AttrType type = *rel.attributes[attr_idx].typed();
  if (!rows.empty() && rng.chance(0.7)) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const mmw::Row& row = rng.pick(rows);
      if (!row[attr_idx].is_null()) return row[attr_idx];
    }
  }
  return random_value(rng, type, /*allow_null=*/false);
}

inline std::string like_pattern(Rng& rng, const std::string& sample) {
  std::string p = sample.empty() ? random_word(rng) : sample;
  switch (rng.range(0, 3)) {
    case 0: return "%" + p.substr(p.size() / 2);
    case 1: return p.substr(0, (p.size() + 1) / 2) + "%";
    case 2:
      if (!p.empty()) p[static_cast<std::size_t>(rng.range(0, static_cast<int>(p.size()) - 1))] = '_';
      return p;
    default: return "%" + random_word(rng, 1, 2) + "%";
  }
}

inline mmw::Predicate random_predicate(Rng& rng, const mmw::RelationDef& rel,
                                       const std::vector<mmw::Row>& rows, int depth_budget) {
  if (depth_budget <= 1 || rng.chance(0.55)) {
    std::size_t idx = static_cast<std::size_t>(
        rng.range(0, static_cast<int>(rel.attributes.size()) - 1));
    mmw::AttrType type = *rel.attributes[idx].typed();
    mmw::CmpOp op;
    switch (type) {
      case mmw::AttrType::Boolean:
        op = rng.chance(0.5) ? mmw::CmpOp::Eq : mmw::CmpOp::Neq;
        break;
      case mmw::AttrType::String: {
        static const std::vector<mmw::CmpOp> ops = {mmw::CmpOp::Eq,  mmw::CmpOp::Neq,
                                                    mmw::CmpOp::Lt,  mmw::CmpOp::Lte,
                                                    mmw::CmpOp::Gt,  mmw::CmpOp::Gte,
                                                    mmw::CmpOp::Like};
        op = rng.pick(ops);
        break;
      }
      default: {
        static const std::vector<mmw::CmpOp> ops = {mmw::CmpOp::Eq, mmw::CmpOp::Neq,
                                                    mmw::CmpOp::Lt, mmw::CmpOp::Lte,
                                                    mmw::CmpOp::Gt, mmw::CmpOp::Gte};
        op = rng.pick(ops);
        break;
      }
    }
    mmw::Value lit;
    if (op == mmw::CmpOp::Like) {
      mmw::Value sample = literal_for(rng, rel, rows, idx);
      lit = mmw::Value(like_pattern(rng, sample.is_string() ? sample.as_string() : ""));
    } else if (type == mmw::AttrType::Float && rng.chance(0.3)) {
      lit = mmw::Value(rng.range(-50, 50));  // integer literal against a float column
    } else {
      lit = literal_for(rng, rel, rows, idx);
    }
    return mmw::Predicate::compare(rel.attributes[idx].name, op, std::move(lit));
  }
  switch (rng.range(0, 2)) {
    case 0:
      return mmw::Predicate::not_(random_predicate(rng, rel, rows, depth_budget - 1));
    case 1: {
      std::vector<mmw::Predicate> cs;
      int n = rng.range(2, 3);
      for (int i = 0; i < n; ++i) cs.push_back(random_predicate(rng, rel, rows, depth_budget - 1));
      return mmw::Predicate::and_(std::move(cs));
    }
    default: {
      std::vector<mmw::Predicate> cs;
      int n = rng.range(2, 3);
      for (int i = 0; i < n; ++i) cs.push_back(random_predicate(rng, rel, rows, depth_budget - 1));
      return mmw::Predicate::or_(std::move(cs));
    }
  }
}

inline mmw::CanonicalQuery random_query(Rng& rng, const mmw::RelationDef& rel,
                                        const std::vector<mmw::Row>& rows) {
  mmw::CanonicalQuery q;
  q.target = rel.name;
  if (rng.chance(0.5)) {
    for (const auto& attr : rel.attributes)
      if (rng.chance(0.5)) q.projection.push_back(attr.name);
    if (q.projection.empty()) q.projection.push_back(rng.pick(rel.attributes).name);
  }
  if (rng.chance(0.75)) q.selection = random_predicate(rng, rel, rows, rng.range(1, 3));
  if (rng.chance(0.3)) q.limit = static_cast<std::uint64_t>(rng.range(0, 20));
  return q;
}

inline mmw::WrapperCapabilities random_caps(Rng& rng) {
  mmw::WrapperCapabilities caps;
  caps.supports_selection = rng.chance(0.7);
  static const std::vector<mmw::CmpOp> all_ops = {mmw::CmpOp::Eq,  mmw::CmpOp::Neq,
                                                  mmw::CmpOp::Lt,  mmw::CmpOp::Lte,
                                                  mmw::CmpOp::Gt,  mmw::CmpOp::Gte,
                                                  mmw::CmpOp::Like};
  for (auto op : all_ops)
    if (rng.chance(0.6)) caps.supported_ops.insert(op);
  caps.supports_projection = rng.chance(0.7);
  caps.supports_limit = rng.chance(0.5);
  return caps;
}

// ---------------------------------------------------------------------------
// Temp-dir source writers.
// ---------------------------------------------------------------------------

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "mmwtest-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!::mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string csv_cell(const mmw::Value& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.as_string();
  if (v.is_integer()) return std::to_string(v.as_integer());
  if (v.is_boolean()) return v.as_boolean() ? "true" : "false";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v.as_float());  // quarters render exactly
  return buf;
}

inline void write_csv(const std::filesystem::path& dir, const mmw::RelationData& data) {
  std::ofstream out(dir / (data.schema.name + ".csv"));
  for (std::size_t i = 0; i < data.schema.attributes.size(); ++i)
    out << (i ? "," : "") << data.schema.attributes[i].name << ":"
        << data.schema.attributes[i].type;
  out << "\n";
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\n";
  }
}

inline void write_jsonl(const std::filesystem::path& dir, const mmw::RelationData& data) {
  std::ofstream out(dir / (data.schema.name + ".jsonl"));
  for (const auto& row : data.rows) {
    mmw::json obj = mmw::json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      obj[data.schema.attributes[i].name] = mmw::value_to_json(row[i]);
    out << obj.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// Result comparison. The wire codec drops attribute nullability, so equality
// is over attribute names, types, and row values.
// ---------------------------------------------------------------------------

inline std::string describe_value(const mmw::Value& v) {
  if (v.is_null()) return "null";
  if (v.is_string()) return "'" + v.as_string() + "'";
  if (v.is_integer()) return std::to_string(v.as_integer());
  if (v.is_boolean()) return v.as_boolean() ? "true" : "false";
  std::ostringstream out;
  out.precision(17);
  out << v.as_float();
  return out.str();
}

inline std::string describe_result(const mmw::CanonicalResult& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.attributes.size(); ++i)
    out << (i ? "," : "") << r.attributes[i].name << ":" << r.attributes[i].type;
  out << " (" << r.rows.size() << " rows)";
  for (std::size_t i = 0; i < r.rows.size() && i < 8; ++i) {
    out << "\n  [";
    for (std::size_t j = 0; j < r.rows[i].size(); ++j)
      out << (j ? ", " : "") << describe_value(r.rows[i][j]);
    out << "]";
  }
  return out.str();
}

inline bool results_equal(const mmw::CanonicalResult& a, const mmw::CanonicalResult& b) {
  if (a.attributes.size() != b.attributes.size()) return false;
  for (std::size_t i = 0; i < a.attributes.size(); ++i)
    if (a.attributes[i].name != b.attributes[i].name ||
        a.attributes[i].type != b.attributes[i].type)
      return false;
  return a.rows == b.rows;
}

// ---------------------------------------------------------------------------
// Materialization oracle: resolves a RelBinding against raw per-child data,
// producing the visible relation the same way the component stack should.
//   Base  - project+rename the bound relation in binding attribute order
//   Union - concatenate base materializations in binding order
//   Join  - nested-loop inner join, left rows outer, null keys skipped
// ---------------------------------------------------------------------------

using ChildData = std::map<std::string, std::map<std::string, mmw::RelationData>>;

inline mmw::RelationData materialize_base(const mmw::BaseBinding& base, const ChildData& data,
                                          const std::string& visible_name) {
  const mmw::RelationData& src = data.at(base.child).at(base.relation);
  mmw::RelationData out;
  out.schema.name = visible_name;
  std::vector<std::size_t> idx;
  for (const auto& [vis, nat] : base.attrs) {
    for (std::size_t i = 0; i < src.schema.attributes.size(); ++i)
      if (src.schema.attributes[i].name == nat) {
        idx.push_back(i);
        mmw::AttributeDef attr = src.schema.attributes[i];
        attr.name = vis;
        out.schema.attributes.push_back(std::move(attr));
        break;
      }
  }
  for (const auto& row : src.rows) {
    mmw::Row projected;
    for (std::size_t i : idx) projected.push_back(row[i]);
    out.rows.push_back(std::move(projected));
  }
  return out;
}

inline mmw::RelationData materialize(const mmw::RelBinding& binding, const ChildData& data,
                                     const std::string& visible_name) {
  switch (binding.kind) {
    case mmw::RelBinding::Kind::Base:
      return materialize_base(binding.bases[0], data, visible_name);
    case mmw::RelBinding::Kind::Union: {
      mmw::RelationData out = materialize_base(binding.bases[0], data, visible_name);
      for (std::size_t i = 1; i < binding.bases.size(); ++i) {
        mmw::RelationData part = materialize_base(binding.bases[i], data, visible_name);
        for (auto& row : part.rows) out.rows.push_back(std::move(row));
      }
      return out;
    }
    case mmw::RelBinding::Kind::Join: {
      mmw::RelationData left = materialize_base(binding.bases[0], data, visible_name);
      mmw::RelationData right = materialize_base(binding.bases[1], data, visible_name);
      const std::string* lk = binding.bases[0].visible_attr(binding.left_key);
      const std::string* rk = binding.bases[1].visible_attr(binding.right_key);
      std::size_t li = 0, ri = 0;
      while (left.schema.attributes[li].name != *lk) ++li;
      while (right.schema.attributes[ri].name != *rk) ++ri;
      mmw::RelationData out;
      out.schema.name = visible_name;
      out.schema.attributes = left.schema.attributes;
      out.schema.attributes.insert(out.schema.attributes.end(), right.schema.attributes.begin(),
                                   right.schema.attributes.end());
      for (const auto& lrow : left.rows) {
        if (lrow[li].is_null()) continue;
        for (const auto& rrow : right.rows) {
          if (rrow[ri].is_null()) continue;
          if (!(lrow[li] == rrow[ri])) continue;
          mmw::Row joined = lrow;
          joined.insert(joined.end(), rrow.begin(), rrow.end());
          out.rows.push_back(std::move(joined));
        }
      }
      return out;
    }
  }
  throw std::runtime_error("unreachable binding kind");
}

// ---------------------------------------------------------------------------
// Subprocess capture for CLI-level assertions.
// ---------------------------------------------------------------------------

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

inline CmdResult run_cmd(const std::string& command) {
  CmdResult result;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
  int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string fixture_path(const std::string& rel) {
  return std::string(MMW_FIXTURE_DIR) + "/" + rel;
}

}  // namespace mmwtest
