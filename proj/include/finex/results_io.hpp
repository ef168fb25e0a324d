#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "finex/extraction.hpp"

namespace finex {

/// One JSON object per document (a single line, stable key order).
std::string to_json_line(const StructuredOutput& out);
/// Throws InputError on malformed lines.
StructuredOutput from_json_line(const std::string& line);

std::vector<StructuredOutput> read_results(const std::filesystem::path& path);

}  // namespace finex
