#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "demoscope/core.hpp"

// Free-text model replies to taxonomy values. A reply the parser cannot map
// to exactly one value is off-target; this module is the operational
// definition of "on-target" used everywhere else.
namespace demoscope {

template <typename T>
struct ParseOutcome {
    std::optional<T> value;
    OffTargetReason reason = OffTargetReason::NoMatch;  // meaningful only when value is empty

    static ParseOutcome of(T v) { return {std::move(v), OffTargetReason::NoMatch}; }
    static ParseOutcome off_target(OffTargetReason r) { return {std::nullopt, r}; }

    bool on_target() const { return value.has_value(); }
    bool operator==(const ParseOutcome&) const = default;
};

/// First numeric age construct in reading order: a range "A-B", "A to B" or
/// "between A and B" gives the rounded midpoint, a decade ("30s", "thirties")
/// its midpoint, otherwise the first standalone number in [0, 130], rounded
/// half away from zero.
ParseOutcome<Years> parse_age_years(std::string_view text);

/// Case-insensitive whole-word match over display strings and aliases.
/// Weak aliases (pronouns) only count when no strong alias matched.
ParseOutcome<std::size_t> parse_category(std::string_view text, const Taxonomy& taxonomy);

/// Bin label (or bin alias) match first, then parse_age_years + bin_of.
ParseOutcome<std::size_t> parse_bin(std::string_view text, const Taxonomy& taxonomy);

/// Dispatch on attribute kind using the dataset's taxonomies.
ParseOutcome<LabelValue> parse_attribute(std::string_view text, AttributeKind kind, const DatasetTaxonomies& tax);

/// Usable free text for the ffc and name steps: non-blank and not opening with a refusal.
ParseOutcome<std::string> check_free_text(std::string_view text);

bool contains_refusal(std::string_view text);
bool opens_with_refusal(std::string_view text);

}  // namespace demoscope
