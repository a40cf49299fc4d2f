#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace floq {

// 17 significant digits, lowercase scientific; round-trips doubles exactly.
std::string format_double(double x);

// Minimal ordered JSON value: insertion order is preserved and numbers use
// format_double, so emitted artifacts are byte-stable.
class JsonValue {
 public:
  static JsonValue object() { return JsonValue(Kind::object); }
  static JsonValue array() { return JsonValue(Kind::array); }
  static JsonValue str(std::string s);
  static JsonValue num(double x);
  static JsonValue integer(std::int64_t i);
  static JsonValue boolean(bool b);

  JsonValue& set(const std::string& key, JsonValue v);  // object member
  JsonValue& push(JsonValue v);                          // array element

  std::string dump(int indent = 2) const;

 private:
  enum class Kind { object, array, string, number, integer, boolean };
  explicit JsonValue(Kind k) : kind_(k) {}

  void dump_to(std::string& out, int indent, int depth) const;

  Kind kind_;
  std::vector<std::pair<std::string, JsonValue>> members_;
  std::vector<JsonValue> elements_;
  std::string str_;
  double num_ = 0.0;
  std::int64_t int_ = 0;
  bool bool_ = false;
};

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_text(const std::string& path, const std::string& content);

// CSV with an exact header line; numeric cells must already be formatted.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace floq
