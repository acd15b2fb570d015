// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace deis {

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Strict numeric parsing; throws kInvalidArgument naming `what`.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Appends each preamble entry as a `# ...` line.
void append_preamble(std::string& out, const std::vector<std::string>& preamble);

}  // namespace deis
