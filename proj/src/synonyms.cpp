#include "demoscope/synonyms.hpp"

#include <fstream>
#include <iterator>

#include "demoscope/csv.hpp"
#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

std::vector<SynonymRow> parse_synonym_rows(std::string_view csv_text) {
    const CsvTable table = parse_csv(csv_text, /*allow_comments=*/true);
    const auto pattern = table.column("pattern");
    const auto category = table.column("category");
    const auto dataset = table.column("dataset");
    const auto strength = table.column("strength");
    if (!pattern || !category || !dataset) {
        throw Error(ErrorCode::Decode, "synonym table needs pattern,category,dataset columns");
    }
    std::vector<SynonymRow> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto cell = [&](std::optional<std::size_t> c) -> std::string {
            return c && *c < row.size() ? std::string(text::trim(row[*c])) : std::string();
        };
        SynonymRow s;
        s.line = table.row_lines[r];
        s.pattern = text::normalize(cell(pattern));
        s.category = cell(category);
        s.dataset = cell(dataset);
        const std::string st = cell(strength);
        if (st == "weak") s.strength = SynonymStrength::Weak;
        else if (!st.empty() && st != "strong") {
            throw Error(ErrorCode::Decode, "synonym line " + std::to_string(s.line) + ": strength '" + st + "'");
        }
        if (s.pattern.empty() || s.category.empty() || s.dataset.empty()) {
            throw Error(ErrorCode::Decode, "synonym line " + std::to_string(s.line) + " has an empty field");
        }
        if (s.dataset != "*" && !dataset_from_string(s.dataset)) {
            throw Error(ErrorCode::Decode, "synonym line " + std::to_string(s.line) + ": unknown dataset " + s.dataset);
        }
        rows.push_back(std::move(s));
    }
    return rows;
}

std::vector<SynonymRow> load_synonym_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open synonym table " + path.string());
    std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_synonym_rows(src);
}

DatasetTaxonomies apply_synonyms(DatasetId id, const std::vector<SynonymRow>& rows) {
    DatasetTaxonomies tax = taxonomies_for(id);
    std::vector<Synonym> race, gender, age;
    for (const auto& row : rows) {
        const bool wildcard = row.dataset == "*";
        if (!wildcard && row.dataset != to_string(id)) continue;
        auto target = [&](const std::optional<Taxonomy>& t, std::vector<Synonym>& out) {
            if (!t) return false;
            auto i = t->index_of(row.category);
            if (!i) return false;
            out.push_back({row.pattern, *i, row.strength});
            return true;
        };
        const bool placed = target(tax.race, race) || target(tax.gender, gender) || target(tax.age_bins, age);
        if (!placed && !wildcard) {
            throw Error(ErrorCode::UnknownCategory, "synonym line " + std::to_string(row.line) + ": " +
                                                        std::string(to_string(id)) + " has no category '" +
                                                        row.category + "'");
        }
    }
    if (tax.race) tax.race = tax.race->with_synonyms(race);
    if (tax.gender) tax.gender = tax.gender->with_synonyms(gender);
    if (tax.age_bins) tax.age_bins = tax.age_bins->with_synonyms(age);
    return tax;
}

DatasetTaxonomies load_taxonomies(DatasetId id, const std::filesystem::path& synonyms_path) {
    return apply_synonyms(id, load_synonym_rows(synonyms_path));
}

}  // namespace demoscope
