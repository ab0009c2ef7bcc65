// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace teleclass {

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace teleclass
