#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace clara {

using Json = nlohmann::json;

/// Calls `fn(record, line_number)` for every non-blank line. Lines that are
/// not valid JSON objects raise ParseError with the 1-based line number; a
/// ParseError thrown by `fn` without a line number is re-raised with one.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

/// Typed field accessors that raise ParseError naming the missing key.
std::string require_string(const Json& record, const char* key, std::size_t line);
std::vector<std::string> require_string_array(const Json& record, const char* key,
                                              std::size_t line);

}  // namespace clara
