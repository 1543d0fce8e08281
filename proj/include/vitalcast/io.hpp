#pragma once

#include <filesystem>
#include <string_view>

namespace vitalcast {

/// Writes `contents` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace vitalcast
