// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace teleclass {

using Json = nlohmann::json;

// Reads a whole file; throws ValidationError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Calls `fn(line_number, object)` for every non-blank line of JSON Lines text.
// Malformed lines raise ValidationError naming the 1-based line number.
void for_each_jsonl(std::string_view text,
                    const std::function<void(std::size_t, const Json&)>& fn);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace teleclass
