#include "minlab/json_value.hpp"

#include <cmath>
#include <cstdio>

namespace minlab {

std::string format_double_17(double d) {
  if (std::isnan(d)) return "\"nan\"";
  if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

JsonValue JsonValue::from_vector(const Vec& x) {
  Array a;
  a.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) a.emplace_back(x[i]);
  return JsonValue(std::move(a));
}

JsonValue JsonValue::from_matrix(const Mat& m) {
  Array rows;
  rows.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Array row;
    row.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.emplace_back(m(i, j));
    rows.emplace_back(std::move(row));
  }
  return JsonValue(std::move(rows));
}

JsonValue& JsonValue::set(const std::string& key, JsonValue val) {
  if (!is_object()) v_ = Object{};
  std::get<Object>(v_).emplace_back(key, std::move(val));
  return *this;
}

JsonValue& JsonValue::push(JsonValue val) {
  if (!is_array()) v_ = Array{};
  std::get<Array>(v_).emplace_back(std::move(val));
  return *this;
}

namespace {

void escape_to(std::string& out, const std::string& s) {
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

void newline_indent(std::string& out, int indent, int depth) {
  if (indent <= 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent) * depth, ' ');
}

}  // namespace

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(v_)) {
    out += std::get<bool>(v_) ? "true" : "false";
  } else if (std::holds_alternative<std::int64_t>(v_)) {
    out += std::to_string(std::get<std::int64_t>(v_));
  } else if (std::holds_alternative<double>(v_)) {
    out += format_double_17(std::get<double>(v_));
  } else if (std::holds_alternative<std::string>(v_)) {
    escape_to(out, std::get<std::string>(v_));
  } else if (std::holds_alternative<Array>(v_)) {
    const auto& a = std::get<Array>(v_);
    if (a.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) out += ',';
      newline_indent(out, indent, depth + 1);
      a[i].dump_to(out, indent, depth + 1);
    }
    newline_indent(out, indent, depth);
    out += ']';
  } else {
    const auto& o = std::get<Object>(v_);
    if (o.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (i) out += ',';
      newline_indent(out, indent, depth + 1);
      escape_to(out, o[i].first);
      out += indent > 0 ? ": " : ":";
      o[i].second.dump_to(out, indent, depth + 1);
    }
    newline_indent(out, indent, depth);
    out += '}';
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  out += '\n';
  return out;
}

}  // namespace minlab
