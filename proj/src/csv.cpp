#include "demoscope/csv.hpp"

#include <fstream>
#include <iterator>
#include <ostream>

#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (text::trim(header[i]) == name) return i;
    }
    return std::nullopt;
}

CsvTable parse_csv(std::string_view source, bool allow_comments) {
    if (source.starts_with("\xEF\xBB\xBF")) source.remove_prefix(3);

    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> lines;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool at_record_start = true;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        const bool blank = record.size() == 1 && text::trim(record[0]).empty();
        if (!blank) {
            records.push_back(std::move(record));
            lines.push_back(record_line);
        }
        record.clear();
        at_record_start = true;
    };

    for (std::size_t i = 0; i < source.size(); ++i) {
        const char c = source[i];
        if (at_record_start) {
            record_line = line;
            at_record_start = false;
            if (allow_comments && !in_quotes) {
                std::size_t j = i;
                while (j < source.size() && (source[j] == ' ' || source[j] == '\t')) ++j;
                if (j < source.size() && source[j] == '#') {
                    while (i < source.size() && source[i] != '\n') ++i;
                    ++line;
                    at_record_start = true;
                    continue;
                }
            }
        }
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < source.size() && source[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"': in_quotes = true; break;
            case ',':
                record.push_back(std::move(field));
                field.clear();
                break;
            case '\r': break;
            case '\n':
                end_record();
                ++line;
                break;
            default: field.push_back(c);
        }
    }
    if (in_quotes) throw Error(ErrorCode::Decode, "unterminated quoted CSV field at line " + std::to_string(record_line));
    if (!at_record_start) end_record();

    CsvTable table;
    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (auto& h : table.header) h = std::string(text::trim(h));
    for (std::size_t i = 1; i < records.size(); ++i) {
        table.rows.push_back(std::move(records[i]));
        table.row_lines.push_back(lines[i]);
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path, bool allow_comments) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(src, allow_comments);
}

std::string csv_escape(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                              (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

}  // namespace demoscope
