#pragma once

#include <filesystem>
#include <string>

namespace scorecheck {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);

/// Write through a sibling temporary file and rename over `path`, so readers
/// never observe a partially written file.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace scorecheck
