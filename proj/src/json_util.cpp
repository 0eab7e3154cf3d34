#include "slp/json_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "slp/error.hpp"

namespace slp {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "validation failed";
  for (const auto& issue : issues) {
    out += "\n  - " + issue;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

namespace json_util {

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (text[i] == '\n') ++line;
    }
    std::string msg = e.what();
    // nlohmann prefixes "[json.exception.parse_error.101] parse error at line..."
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ParseError("line " + std::to_string(line), msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReferenceError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Json& field(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path.empty() ? "/" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(child(path, key), "missing field");
  return *it;
}

const Json* optional_field(const Json& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string get_string(const Json& obj, std::string_view key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_string()) throw ParseError(child(path, key), "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& obj, std::string_view key,
                                               const std::string& path) {
  const Json* v = optional_field(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) throw ParseError(child(path, key), "expected a string");
  return v->get<std::string>();
}

double get_number(const Json& obj, std::string_view key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError(child(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t get_int(const Json& obj, std::string_view key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number_integer()) throw ParseError(child(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const Json& obj, std::string_view key, const std::string& path, bool fallback) {
  const Json* v = optional_field(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ParseError(child(path, key), "expected true or false");
  return v->get<bool>();
}

Point to_point(const Json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
    throw ParseError(path, "expected [x, y]");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

Rect to_rect(const Json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 4) {
    throw ParseError(path, "expected [x, y, width, height]");
  }
  for (const auto& v : value) {
    if (!v.is_number()) throw ParseError(path, "expected [x, y, width, height]");
  }
  Rect r{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
         value[3].get<double>()};
  if (!(r.width > 0.0) || !(r.height > 0.0)) {
    throw ParseError(path, "rectangle width and height must be positive");
  }
  return r;
}

double round_coord(double v) {
  double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in output
}

Json point_json(Point p) { return Json::array({round_coord(p.x), round_coord(p.y)}); }

Json rect_json(const Rect& r) {
  return Json::array(
      {round_coord(r.x), round_coord(r.y), round_coord(r.width), round_coord(r.height)});
}

}  // namespace json_util
}  // namespace slp
