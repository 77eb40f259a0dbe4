#include "demoscope/core.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

std::string_view to_string(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::Age: return "age";
        case AttributeKind::Gender: return "gender";
        case AttributeKind::Race: return "race";
    }
    return "?";
}

std::optional<AttributeKind> attribute_from_string(std::string_view s) {
    for (auto k : kAllAttributes) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(Gender g) { return g == Gender::Male ? "Male" : "Female"; }

std::string_view to_string(DatasetId id) {
    switch (id) {
        case DatasetId::Utkface: return "utkface";
        case DatasetId::Fairface: return "fairface";
        case DatasetId::Cacd: return "cacd";
    }
    return "?";
}

std::optional<DatasetId> dataset_from_string(std::string_view s) {
    for (auto id : {DatasetId::Utkface, DatasetId::Fairface, DatasetId::Cacd}) {
        if (to_string(id) == s) return id;
    }
    return std::nullopt;
}

std::string_view to_string(Mode m) { return m == Mode::Naive ? "naive" : "cot"; }

std::optional<Mode> mode_from_string(std::string_view s) {
    if (s == "naive") return Mode::Naive;
    if (s == "cot") return Mode::Cot;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

Taxonomy::Taxonomy(std::string name, std::vector<std::string> categories, std::vector<AgeBin> bins)
    : name_(std::move(name)), categories_(std::move(categories)), bins_(std::move(bins)) {
    if (categories_.empty()) throw Error(ErrorCode::InvalidArgument, "taxonomy " + name_ + " has no categories");
    std::set<std::string> seen;
    for (const auto& c : categories_) {
        if (text::trim(c).empty()) throw Error(ErrorCode::InvalidArgument, "taxonomy " + name_ + ": blank category");
        if (!seen.insert(text::to_lower(c)).second) {
            throw Error(ErrorCode::InvalidArgument, "taxonomy " + name_ + ": duplicate category " + c);
        }
    }
    if (!bins_.empty()) {
        if (bins_.size() != categories_.size()) {
            throw Error(ErrorCode::InvalidArgument, "taxonomy " + name_ + ": one bin per category required");
        }
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            const auto& b = bins_[i];
            const bool last = i + 1 == bins_.size();
            if (!b.upper && !last) throw Error(ErrorCode::InvalidArgument, name_ + ": only the top bin may be open");
            if (b.upper && *b.upper < b.lower) throw Error(ErrorCode::InvalidArgument, name_ + ": inverted bin");
            if (!last && bins_[i + 1].lower != *b.upper + 1) {
                throw Error(ErrorCode::InvalidArgument, name_ + ": bins must be contiguous and ascending");
            }
        }
    }
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        add_alias({text::to_lower(categories_[i]), i, SynonymStrength::Strong});
    }
}

const std::string& Taxonomy::category(std::size_t index) const {
    if (index >= categories_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, name_ + ": category index " + std::to_string(index));
    }
    return categories_[index];
}

std::optional<std::size_t> Taxonomy::index_of(std::string_view display) const {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (categories_[i] == display) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Taxonomy::lookup(std::string_view alias) const {
    const std::string key = text::normalize(alias);
    auto it = std::lower_bound(aliases_.begin(), aliases_.end(), key,
                               [](const Synonym& s, const std::string& k) { return s.alias < k; });
    if (it != aliases_.end() && it->alias == key) return it->index;
    return std::nullopt;
}

void Taxonomy::add_alias(Synonym s) {
    s.alias = text::normalize(s.alias);
    if (s.alias.empty()) throw Error(ErrorCode::InvalidArgument, name_ + ": empty alias");
    if (s.index >= categories_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, name_ + ": alias '" + s.alias + "' targets an invalid index");
    }
    auto it = std::lower_bound(aliases_.begin(), aliases_.end(), s.alias,
                               [](const Synonym& a, const std::string& k) { return a.alias < k; });
    if (it != aliases_.end() && it->alias == s.alias) {
        if (it->index != s.index) {
            throw Error(ErrorCode::InvalidArgument,
                        name_ + ": alias '" + s.alias + "' maps to both " + categories_[it->index] + " and " +
                            categories_[s.index]);
        }
        return;
    }
    aliases_.insert(it, std::move(s));
}

Taxonomy Taxonomy::with_synonyms(std::span<const Synonym> extra) const {
    Taxonomy copy = *this;
    for (const auto& s : extra) copy.add_alias(s);
    return copy;
}

std::vector<AttributeKind> DatasetTaxonomies::kinds() const {
    std::vector<AttributeKind> out;
    if (age_bins || age_range) out.push_back(AttributeKind::Age);
    if (gender) out.push_back(AttributeKind::Gender);
    if (race) out.push_back(AttributeKind::Race);
    return out;
}

const Taxonomy* DatasetTaxonomies::taxonomy_for(AttributeKind kind) const {
    switch (kind) {
        case AttributeKind::Age: return age_bins ? &*age_bins : nullptr;
        case AttributeKind::Gender: return gender ? &*gender : nullptr;
        case AttributeKind::Race: return race ? &*race : nullptr;
    }
    return nullptr;
}

namespace {

Taxonomy gender_taxonomy(std::string_view dataset) {
    return Taxonomy(std::string(dataset) + ".gender", {"Male", "Female"});
}

std::map<DatasetId, DatasetTaxonomies> build_canonical() {
    std::map<DatasetId, DatasetTaxonomies> out;

    DatasetTaxonomies utk;
    utk.id = DatasetId::Utkface;
    utk.race = Taxonomy("utkface.race", {"White", "Black", "Asian", "Indian", "Others"});
    utk.gender = gender_taxonomy("utkface");
    utk.age_range = AgeRange{0, 116};
    out.emplace(DatasetId::Utkface, std::move(utk));

    // Age groups as published with the FairFace labels.
    DatasetTaxonomies ff;
    ff.id = DatasetId::Fairface;
    ff.race = Taxonomy("fairface.race",
                       {"White", "Black", "Indian", "East Asian", "Southeast Asian", "Middle Eastern", "Latino"});
    ff.gender = gender_taxonomy("fairface");
    ff.age_bins = Taxonomy("fairface.age", {"0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+"},
                           {{0, 2},
                            {3, 9},
                            {10, 19},
                            {20, 29},
                            {30, 39},
                            {40, 49},
                            {50, 59},
                            {60, 69},
                            {70, std::nullopt}});
    out.emplace(DatasetId::Fairface, std::move(ff));

    DatasetTaxonomies cacd;
    cacd.id = DatasetId::Cacd;
    cacd.age_range = AgeRange{14, 54};
    out.emplace(DatasetId::Cacd, std::move(cacd));

    return out;
}

}  // namespace

const std::map<DatasetId, DatasetTaxonomies>& canonical_taxonomies() {
    static const std::map<DatasetId, DatasetTaxonomies> kTaxonomies = build_canonical();
    return kTaxonomies;
}

const DatasetTaxonomies& taxonomies_for(DatasetId id) { return canonical_taxonomies().at(id); }

std::size_t bin_of(int age_years, const Taxonomy& taxonomy) {
    if (!taxonomy.has_bins()) throw Error(ErrorCode::NoBins, taxonomy.name() + " has no age bins");
    if (age_years < 0 || age_years > kMaxAgeYears) {
        throw Error(ErrorCode::InvalidArgument, "age " + std::to_string(age_years) + " outside [0, 130]");
    }
    const auto bins = taxonomy.bins();
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].contains(age_years)) return i;
    }
    throw Error(ErrorCode::InvalidArgument, "age " + std::to_string(age_years) + " not covered by " + taxonomy.name());
}

// ---------------------------------------------------------------------------

std::optional<LabelValue> Sample::truth(AttributeKind kind) const {
    switch (kind) {
        case AttributeKind::Age:
            if (!truth_age) return std::nullopt;
            return std::visit([](auto v) -> LabelValue { return v; }, *truth_age);
        case AttributeKind::Gender:
            if (!truth_gender) return std::nullopt;
            return LabelValue{*truth_gender};
        case AttributeKind::Race:
            if (!truth_race) return std::nullopt;
            return LabelValue{CategoryIndex{*truth_race}};
    }
    return std::nullopt;
}

std::string label_display(const LabelValue& value, const DatasetTaxonomies& tax) {
    if (auto* y = std::get_if<Years>(&value)) return std::to_string(y->value);
    if (auto* b = std::get_if<BinIndex>(&value)) {
        if (!tax.age_bins) throw Error(ErrorCode::NoBins, std::string(to_string(tax.id)) + " has no age bins");
        return tax.age_bins->category(b->value);
    }
    if (auto* g = std::get_if<Gender>(&value)) return std::string(to_string(*g));
    const auto c = std::get<CategoryIndex>(value);
    if (!tax.race) throw Error(ErrorCode::InvalidArgument, std::string(to_string(tax.id)) + " has no race labels");
    return tax.race->category(c.value);
}

std::optional<LabelValue> label_from_display(std::string_view s, AttributeKind kind, const DatasetTaxonomies& tax) {
    switch (kind) {
        case AttributeKind::Age: {
            if (tax.age_bins) {
                if (auto i = tax.age_bins->index_of(s)) return LabelValue{BinIndex{*i}};
                return std::nullopt;
            }
            int v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size() || v < 0 || v > kMaxAgeYears) return std::nullopt;
            return LabelValue{Years{v}};
        }
        case AttributeKind::Gender:
            if (s == "Male") return LabelValue{Gender::Male};
            if (s == "Female") return LabelValue{Gender::Female};
            return std::nullopt;
        case AttributeKind::Race:
            if (!tax.race) return std::nullopt;
            if (auto i = tax.race->index_of(s)) return LabelValue{CategoryIndex{*i}};
            return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string to_string(StepId step) {
    switch (step.type) {
        case StepType::Ffc: return "ffc";
        case StepType::Name: return "name";
        case StepType::Attribute: return std::string(to_string(step.attribute));
    }
    return "?";
}

std::optional<StepId> step_from_string(std::string_view s) {
    if (s == "ffc") return StepId::ffc();
    if (s == "name") return StepId::name();
    if (auto k = attribute_from_string(s)) return StepId::of(*k);
    return std::nullopt;
}

std::string_view to_string(OffTargetReason r) {
    switch (r) {
        case OffTargetReason::NoMatch: return "no_match";
        case OffTargetReason::Ambiguous: return "ambiguous";
        case OffTargetReason::Empty: return "empty";
        case OffTargetReason::Refusal: return "refusal";
    }
    return "?";
}

std::optional<OffTargetReason> off_target_reason_from_string(std::string_view s) {
    for (auto r : {OffTargetReason::NoMatch, OffTargetReason::Ambiguous, OffTargetReason::Empty,
                   OffTargetReason::Refusal}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::string_view to_string(StepOutcome o) {
    switch (o) {
        case StepOutcome::Parsed: return "parsed";
        case StepOutcome::OffTarget: return "off_target";
        case StepOutcome::Error: return "error";
    }
    return "?";
}

std::string_view to_string(ResolutionPath r) {
    switch (r) {
        case ResolutionPath::Parsed: return "parsed";
        case ResolutionPath::EmbeddingFallback: return "embedding_fallback";
        case ResolutionPath::Imputed: return "imputed";
        case ResolutionPath::Unresolvable: return "unresolvable";
    }
    return "?";
}

std::optional<ResolutionPath> resolution_from_string(std::string_view s) {
    for (auto r : {ResolutionPath::Parsed, ResolutionPath::EmbeddingFallback, ResolutionPath::Imputed,
                   ResolutionPath::Unresolvable}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

}  // namespace demoscope
