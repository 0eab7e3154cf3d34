#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "slp/geometry.hpp"

namespace slp {

using Json = nlohmann::json;

namespace json_util {

/// Parses a document, mapping syntax errors to ParseError("line N").
Json parse_document(std::string_view text);
/// Reads a whole file; throws slp::Error when it cannot be opened.
std::string read_file(const std::string& path);

const Json& field(const Json& obj, std::string_view key, const std::string& path);
const Json* optional_field(const Json& obj, std::string_view key);

std::string get_string(const Json& obj, std::string_view key, const std::string& path);
std::optional<std::string> get_optional_string(const Json& obj, std::string_view key,
                                               const std::string& path);
double get_number(const Json& obj, std::string_view key, const std::string& path);
std::int64_t get_int(const Json& obj, std::string_view key, const std::string& path);
bool get_bool(const Json& obj, std::string_view key, const std::string& path, bool fallback);

Point to_point(const Json& value, const std::string& path);
Rect to_rect(const Json& value, const std::string& path);

/// Coordinates are written rounded to the micrometer so that traces are
/// stable text.
double round_coord(double v);
Json point_json(Point p);
Json rect_json(const Rect& r);

inline std::string child(const std::string& path, std::string_view key) {
  return path + "/" + std::string(key);
}
inline std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

}  // namespace json_util
}  // namespace slp
