#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lcr::io {

/// Writes the whole file to a sibling temporary and renames it into place,
/// so readers never observe a partially written artifact.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Calls fn(line, line_number) for every non-empty line. line_number is
/// 1-based.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Tab-separated fields; tabs, newlines and backslashes inside a field are
/// escaped as \t, \n, \\.
std::string join_tsv(const std::vector<std::string>& fields);
std::vector<std::string> split_tsv(std::string_view line);

}  // namespace lcr::io
