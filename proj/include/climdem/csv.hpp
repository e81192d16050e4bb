#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace climdem::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row
};

/// Reads a comma-separated file. Blank lines are skipped; a UTF-8 BOM is tolerated.
[[nodiscard]] Table read(const std::filesystem::path& path);
[[nodiscard]] Table parse(std::string_view text);

[[nodiscard]] double parse_number(std::string_view field, std::size_t line, std::string_view column);

/// Fixed 10-significant-digit formatting used by every emitted CSV.
[[nodiscard]] std::string format_number(double value);

/// Writes via a sibling temp file and rename, so readers never see partial output.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace climdem::csv
