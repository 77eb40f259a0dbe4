#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "demoscope/config.hpp"
#include "demoscope/core.hpp"

namespace demoscope {

struct RegressionScores {
    double mse = 0;
    double rmse = 0;
    double mae = 0;
    /// Empty when the truth has zero variance.
    std::optional<double> r2;
    /// Percent. Empty when every truth was excluded by the zero policy.
    std::optional<double> mape_percent;
    /// Pairs entering MAPE and pairs excluded from it; they sum to the input size.
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
};

/// Throws LengthMismatch, or InvalidArgument for fewer than two pairs or a
/// truth outside [0, 130].
RegressionScores regression_scores(std::span<const double> pred, std::span<const double> truth,
                                   const MapeZeroHandling& zero_policy = {});

struct ClassificationScores {
    double accuracy = 0;
    /// Unweighted Cohen's kappa; empty when chance agreement is 1 but observed agreement is not.
    std::optional<double> kappa;
    /// confusion[truth][pred]
    std::vector<std::vector<std::size_t>> confusion;
};

/// Throws LengthMismatch, IndexOutOfRange, or InvalidArgument for empty input.
ClassificationScores classification_scores(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                                           std::size_t num_classes);

struct OffTargetScores {
    /// Fraction whose first attempt was off-target.
    std::optional<double> first_attempt_rate;
    /// Fraction still off-target after the retry loop (embedding fallback or imputed).
    std::optional<double> post_retry_rate;
    std::size_t total = 0;
    std::size_t first_attempt_off_target = 0;
    std::size_t parsed = 0;
    std::size_t embedding_fallback = 0;
    std::size_t imputed = 0;
    std::size_t unresolvable = 0;
};

OffTargetScores off_target_scores(std::span<const Prediction> predictions);

}  // namespace demoscope
