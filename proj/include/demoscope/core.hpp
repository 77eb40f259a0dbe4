#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace demoscope {

enum class AttributeKind { Age, Gender, Race };

inline constexpr std::array<AttributeKind, 3> kAllAttributes{AttributeKind::Age, AttributeKind::Gender,
                                                              AttributeKind::Race};

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> attribute_from_string(std::string_view s);

/// Order matches the gender taxonomy: Male is index 0, Female index 1.
enum class Gender { Male, Female };

std::string_view to_string(Gender g);

enum class DatasetId { Utkface, Fairface, Cacd };

std::string_view to_string(DatasetId id);
std::optional<DatasetId> dataset_from_string(std::string_view s);

enum class Mode { Naive, Cot };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Taxonomies

/// Inclusive year range of one age group; `upper` empty for the open top group.
struct AgeBin {
    int lower = 0;
    std::optional<int> upper;

    bool contains(int years) const { return years >= lower && (!upper || years <= *upper); }
    bool operator==(const AgeBin&) const = default;
};

enum class SynonymStrength { Strong, Weak };

struct Synonym {
    std::string alias;  // lowercase
    std::size_t index = 0;
    SynonymStrength strength = SynonymStrength::Strong;
};

/// Ordered, dataset-scoped category set for one attribute. Display strings are
/// always resolvable as aliases of themselves. Immutable once built.
class Taxonomy {
public:
    Taxonomy(std::string name, std::vector<std::string> categories, std::vector<AgeBin> bins = {});

    const std::string& name() const { return name_; }
    std::size_t size() const { return categories_.size(); }
    std::span<const std::string> categories() const { return categories_; }
    const std::string& category(std::size_t index) const;

    /// Exact, case-sensitive display-string lookup.
    std::optional<std::size_t> index_of(std::string_view display) const;
    /// Case-insensitive lookup over display strings and declared aliases.
    std::optional<std::size_t> lookup(std::string_view alias) const;

    bool has_bins() const { return !bins_.empty(); }
    std::span<const AgeBin> bins() const { return bins_; }

    /// Display strings (strong) followed by declared aliases, sorted by alias.
    const std::vector<Synonym>& aliases() const { return aliases_; }

    /// Returns a copy extended with the given aliases. A later alias that
    /// conflicts with an existing one (same text, different target) is an error.
    Taxonomy with_synonyms(std::span<const Synonym> extra) const;

private:
    void add_alias(Synonym s);

    std::string name_;
    std::vector<std::string> categories_;
    std::vector<AgeBin> bins_;
    std::vector<Synonym> aliases_;
};

/// Documented age span of a continuous-age dataset.
struct AgeRange {
    int lower = 0;
    int upper = 130;

    int midpoint() const { return (lower + upper) / 2; }
    bool contains(int years) const { return years >= lower && years <= upper; }
};

inline constexpr int kMaxAgeYears = 130;

struct DatasetTaxonomies {
    DatasetId id = DatasetId::Utkface;
    std::optional<Taxonomy> race;
    std::optional<Taxonomy> gender;
    /// FairFace-style binned age labels.
    std::optional<Taxonomy> age_bins;
    /// Continuous-age datasets only.
    std::optional<AgeRange> age_range;

    /// Attributes this dataset labels, in Age, Gender, Race order.
    std::vector<AttributeKind> kinds() const;
    const Taxonomy* taxonomy_for(AttributeKind kind) const;
};

/// Built-in label sets for utkface, fairface and cacd (no synonyms beyond the
/// display strings; see load_synonyms). Deterministic across calls.
const std::map<DatasetId, DatasetTaxonomies>& canonical_taxonomies();
const DatasetTaxonomies& taxonomies_for(DatasetId id);

/// Index of the bin containing `age_years`. Throws NoBins or InvalidArgument.
std::size_t bin_of(int age_years, const Taxonomy& taxonomy);

// ---------------------------------------------------------------------------
// Labels and samples

struct Years {
    int value = 0;
    auto operator<=>(const Years&) const = default;
};

struct BinIndex {
    std::size_t value = 0;
    auto operator<=>(const BinIndex&) const = default;
};

struct CategoryIndex {
    std::size_t value = 0;
    auto operator<=>(const CategoryIndex&) const = default;
};

using AgeLabel = std::variant<Years, BinIndex>;

/// Resolved attribute value: continuous age, age bin, gender, or race category.
using LabelValue = std::variant<Years, BinIndex, Gender, CategoryIndex>;

struct Sample {
    std::string id;
    std::filesystem::path image_path;
    DatasetId dataset = DatasetId::Utkface;
    std::optional<AgeLabel> truth_age;
    std::optional<Gender> truth_gender;
    std::optional<std::size_t> truth_race;

    bool has_truth() const { return truth_age || truth_gender || truth_race; }
    std::optional<LabelValue> truth(AttributeKind kind) const;
};

/// Display string of a label under a dataset's taxonomies ("25", "Male", "20-29", "White").
std::string label_display(const LabelValue& value, const DatasetTaxonomies& tax);
/// Inverse of label_display for the given attribute; nullopt when not a valid label.
std::optional<LabelValue> label_from_display(std::string_view s, AttributeKind kind, const DatasetTaxonomies& tax);

// ---------------------------------------------------------------------------
// Transcripts and predictions

enum class StepType { Ffc, Name, Attribute };

struct StepId {
    StepType type = StepType::Ffc;
    AttributeKind attribute = AttributeKind::Age;  // meaningful for Attribute steps only

    static StepId ffc() { return {StepType::Ffc, AttributeKind::Age}; }
    static StepId name() { return {StepType::Name, AttributeKind::Age}; }
    static StepId of(AttributeKind kind) { return {StepType::Attribute, kind}; }

    bool operator==(const StepId& o) const {
        return type == o.type && (type != StepType::Attribute || attribute == o.attribute);
    }
};

/// "ffc", "name", "age", "gender", "race".
std::string to_string(StepId step);
std::optional<StepId> step_from_string(std::string_view s);

enum class OffTargetReason { NoMatch, Ambiguous, Empty, Refusal };

std::string_view to_string(OffTargetReason r);
std::optional<OffTargetReason> off_target_reason_from_string(std::string_view s);

enum class StepOutcome { Parsed, OffTarget, Error };

std::string_view to_string(StepOutcome o);

struct StepRecord {
    StepId step;
    int attempt = 1;
    std::string prompt_text;
    std::string raw_response;
    long long latency_ms = 0;
    StepOutcome outcome = StepOutcome::Parsed;
    /// Parsed display value, off-target reason name, or error message.
    std::string detail;
};

struct Transcript {
    std::string sample_id;
    Mode mode = Mode::Naive;
    /// Set when a cot chain fell back to naive attribute prompts.
    bool degraded = false;
    std::vector<StepRecord> steps;
    std::optional<std::string> composed_description;
};

enum class ResolutionPath { Parsed, EmbeddingFallback, Imputed, Unresolvable };

std::string_view to_string(ResolutionPath r);
std::optional<ResolutionPath> resolution_from_string(std::string_view s);

struct Prediction {
    std::string sample_id;
    AttributeKind kind = AttributeKind::Age;
    /// Empty only when resolution is Unresolvable.
    std::optional<LabelValue> value;
    ResolutionPath resolution = ResolutionPath::Unresolvable;
    /// Model calls made for this attribute; for Parsed this is the on-target attempt k.
    int attempts = 0;
    std::string final_raw_text;
    bool first_attempt_off_target = false;
    /// Cause for Unresolvable predictions.
    std::string error;
};

}  // namespace demoscope
