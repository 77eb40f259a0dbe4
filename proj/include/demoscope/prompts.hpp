#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "demoscope/core.hpp"
#include "demoscope/kv_file.hpp"

namespace demoscope {

/// Prompt templates keyed by role:
///   macro, ffc, name, constraint,
///   cot.age, cot.age_binned, cot.gender, cot.race,
///   naive.age, naive.age_binned, naive.gender, naive.race
/// Placeholders: {DESCRIPTION}, {CATEGORIES}, {RANGE}.
class TemplateSet {
public:
    TemplateSet() = default;
    explicit TemplateSet(std::map<std::string, std::string> templates);

    static TemplateSet from_kv(const KvFile& kv);
    /// Loads and validates; throws UnresolvedPlaceholder / MissingTemplate / ConfigInvalid.
    static TemplateSet load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return templates_.count(key) != 0; }
    /// Throws MissingTemplate.
    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& templates() const { return templates_; }

    /// Problems with the set as a whole (unknown placeholders, missing
    /// required placeholders); empty when valid.
    std::vector<std::string> problems() const;
    std::string digest() const;

private:
    std::map<std::string, std::string> templates_;
};

/// Either a category taxonomy ({CATEGORIES}) or a continuous age span ({RANGE}).
using AttributeTarget = std::variant<const Taxonomy*, AgeRange>;

std::string render_ffc(const TemplateSet& set);
std::string render_name(const TemplateSet& set);

/// Labeled, fixed-order concatenation of the facial-feature text and the
/// suggested name. Throws EmptyInput if either is blank.
std::string compose_description(std::string_view ffc_text, std::string_view name_text);

/// Throws MissingDescription when mode is Cot without a description.
std::string render_attribute(const TemplateSet& set, AttributeKind kind, Mode mode,
                             const std::optional<std::string>& description, const AttributeTarget& target);

/// "between L and U"
std::string format_range(const AgeRange& range);
/// Display strings joined with ", " in taxonomy order.
std::string format_categories(const Taxonomy& taxonomy);

}  // namespace demoscope
