#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace cftv {

class Value;

using Bytes = std::shared_ptr<const std::vector<std::uint8_t>>;
using List = std::vector<Value>;
using Record = std::map<std::string, Value>;

/// Structured payload carried by messages, state variables and trace
/// records: null, bool, integer, real, string, byte array, list or record.
class Value {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double,
                               std::string, Bytes, List, Record>;

  Value() = default;
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Bytes b) : v_(std::move(b)) {}
  Value(List l) : v_(std::move(l)) {}
  Value(Record r) : v_(std::move(r)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_number() const { return is_int() || is_real(); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_bytes() const { return std::holds_alternative<Bytes>(v_); }
  bool is_list() const { return std::holds_alternative<List>(v_); }
  bool is_record() const { return std::holds_alternative<Record>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_number() const {
    return is_int() ? static_cast<double>(as_int()) : std::get<double>(v_);
  }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const Bytes& as_bytes() const { return std::get<Bytes>(v_); }
  const List& as_list() const { return std::get<List>(v_); }
  const Record& as_record() const { return std::get<Record>(v_); }

  const Storage& storage() const { return v_; }

  /// Short type name for diagnostics.
  std::string type_name() const;

  /// Integers and reals compare by numeric value; byte arrays by content.
  friend bool operator==(const Value& a, const Value& b);

 private:
  Storage v_;
};

/// Canonical JSON form. Byte arrays become {"bytes":n,"digest":"<hex>"}.
nlohmann::json to_json(const Value& v);

/// Inverse of to_json for everything except byte arrays (which stay records).
Value from_json(const nlohmann::json& j);

/// Replaces byte arrays by their digest record, recursively. Trace records
/// hold only canonical values.
Value canonical(const Value& v);

/// Deterministic rendering used in text output.
std::string to_string(const Value& v);

}  // namespace cftv
