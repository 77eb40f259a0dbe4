#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "demoscope/artifacts.hpp"
#include "demoscope/config.hpp"
#include "demoscope/metrics.hpp"
#include "json.hpp"

namespace demoscope {

struct AttributeReport {
    AttributeKind kind = AttributeKind::Age;
    /// Continuous ages get regression scores, everything else classification scores.
    std::optional<RegressionScores> regression;
    std::optional<ClassificationScores> classification;
    std::size_t n_total = 0;
    std::size_t n_scored = 0;
    std::size_t n_unresolvable = 0;
    /// Imputed ages left out under UnresolvedAgePolicy::Exclude.
    std::size_t n_imputed_excluded = 0;
};

struct MetricsReport {
    std::string label;
    DatasetId dataset = DatasetId::Utkface;
    Mode mode = Mode::Cot;
    std::size_t n_samples = 0;
    std::vector<AttributeReport> attributes;
    OffTargetScores off_target;

    const AttributeReport* find(AttributeKind kind) const;
};

/// Scores one run. Attributes with too few scorable pairs are reported with
/// counts only.
MetricsReport compute_report(const std::string& label, DatasetId dataset, Mode mode,
                             std::span<const ScoredPrediction> rows, const DatasetTaxonomies& tax,
                             const MapeZeroHandling& mape_zero, UnresolvedAgePolicy unresolved_age);

nlohmann::ordered_json report_to_json(const MetricsReport& report);

/// One row per run; Age block, Gender block, Ethnicity block, off-target rates.
std::string comparison_markdown(std::span<const MetricsReport> reports);
std::string comparison_csv(std::span<const MetricsReport> reports);

}  // namespace demoscope
