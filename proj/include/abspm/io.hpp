#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace abspm {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames, so readers never observe
/// a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace abspm
