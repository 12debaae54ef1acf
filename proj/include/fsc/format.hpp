// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fsc {

/// Shortest decimal text that parses back to the same double.
std::string format_roundtrip(double value);

/// Value rounded to 9 significant digits, for deterministic reports.
double round9(double value);

/// Strict decimal parse; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);

} // namespace fsc
