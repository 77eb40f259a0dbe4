#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace demoscope {

/// RFC 4180 style table: quoted fields may contain separators, quotes ("") and newlines.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based source line of each row's first line, for error messages.
    std::vector<std::size_t> row_lines;

    std::optional<std::size_t> column(std::string_view name) const;
};

/// Lines whose first non-blank character is '#' are skipped when `allow_comments`.
CsvTable parse_csv(std::string_view source, bool allow_comments = false);
CsvTable read_csv(const std::filesystem::path& path, bool allow_comments = false);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace demoscope
