#include "floq/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "floq/errors.hpp"

namespace floq {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

JsonValue JsonValue::str(std::string s) {
  JsonValue v(Kind::string);
  v.str_ = std::move(s);
  return v;
}

JsonValue JsonValue::num(double x) {
  JsonValue v(Kind::number);
  v.num_ = x;
  return v;
}

JsonValue JsonValue::integer(std::int64_t i) {
  JsonValue v(Kind::integer);
  v.int_ = i;
  return v;
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v(Kind::boolean);
  v.bool_ = b;
  return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  members_.emplace_back(key, std::move(v));
  return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
  elements_.push_back(std::move(v));
  return *this;
}

namespace {

void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string closing(static_cast<std::size_t>(indent) * depth, ' ');
  switch (kind_) {
    case Kind::object: {
      if (members_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        out += pad;
        escape_into(out, members_[i].first);
        out += ": ";
        members_[i].second.dump_to(out, indent, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      out += closing + "}";
      return;
    }
    case Kind::array: {
      if (elements_.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < elements_.size(); ++i) {
        out += pad;
        elements_[i].dump_to(out, indent, depth + 1);
        if (i + 1 < elements_.size()) out += ',';
        out += '\n';
      }
      out += closing + "]";
      return;
    }
    case Kind::string: escape_into(out, str_); return;
    case Kind::number: out += format_double(num_); return;
    case Kind::integer: out += std::to_string(int_); return;
    case Kind::boolean: out += bool_ ? "true" : "false"; return;
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  out += '\n';
  return out;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::config_error, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string content = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      content += row[i];
      if (i + 1 < row.size()) content += ',';
    }
    content += '\n';
  }
  atomic_write_text(path, content);
}

}  // namespace floq
