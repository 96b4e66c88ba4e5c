#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mmw {

// The four scalar types of the system format.
enum class AttrType { String, Integer, Float, Boolean };

inline const char* to_string(AttrType t) {
  switch (t) {
    case AttrType::String: return "string";
    case AttrType::Integer: return "integer";
    case AttrType::Float: return "float";
    case AttrType::Boolean: return "boolean";
  }
  return "?";
}

inline std::optional<AttrType> parse_attr_type(const std::string& s) {
  if (s == "string") return AttrType::String;
  if (s == "integer") return AttrType::Integer;
  if (s == "float") return AttrType::Float;
  if (s == "boolean") return AttrType::Boolean;
  return std::nullopt;
}

// A typed scalar or null. monostate is null.
struct Value {
  std::variant<std::monostate, std::string, std::int64_t, double, bool> v;

  Value() = default;
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(double d) : v(d) {}
  Value(bool b) : v(b) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_boolean() const { return std::holds_alternative<bool>(v); }

  const std::string& as_string() const { return std::get<std::string>(v); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(v); }
  double as_float() const { return std::get<double>(v); }
  bool as_boolean() const { return std::get<bool>(v); }

  // Whether this value may be stored under the given attribute type.
  // Null is acceptable anywhere; nullability is checked separately.
  bool matches(AttrType t) const {
    if (is_null()) return true;
    switch (t) {
      case AttrType::String: return is_string();
      case AttrType::Integer: return is_integer();
      case AttrType::Float: return is_float();
      case AttrType::Boolean: return is_boolean();
    }
    return false;
  }

  friend bool operator==(const Value& a, const Value& b) { return a.v == b.v; }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
};

using Row = std::vector<Value>;

}  // namespace mmw
