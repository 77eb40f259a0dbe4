#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "demoscope/core.hpp"

namespace demoscope {

/// One row of a synonym table: `pattern,category,dataset[,strength]`.
/// dataset is a dataset id or "*" for every dataset that has the category;
/// strength is "strong" (default) or "weak".
struct SynonymRow {
    std::string pattern;
    std::string category;
    std::string dataset;
    SynonymStrength strength = SynonymStrength::Strong;
    std::size_t line = 0;
};

std::vector<SynonymRow> load_synonym_rows(const std::filesystem::path& path);
std::vector<SynonymRow> parse_synonym_rows(std::string_view csv_text);

/// Canonical taxonomies of `id` extended with the matching rows. Throws
/// UnknownCategory when a row names a category the dataset does not have.
DatasetTaxonomies apply_synonyms(DatasetId id, const std::vector<SynonymRow>& rows);

/// apply_synonyms over the table at `path`.
DatasetTaxonomies load_taxonomies(DatasetId id, const std::filesystem::path& synonyms_path);

}  // namespace demoscope
