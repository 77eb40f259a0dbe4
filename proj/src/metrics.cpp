#include "demoscope/metrics.hpp"

#include <cmath>

#include "demoscope/error.hpp"

namespace demoscope {

RegressionScores regression_scores(std::span<const double> pred, std::span<const double> truth,
                                   const MapeZeroHandling& zero_policy) {
    if (pred.size() != truth.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " truths");
    }
    if (truth.size() < 2) throw Error(ErrorCode::InvalidArgument, "regression scores need at least two pairs");
    for (double t : truth) {
        if (!(t >= 0 && t <= kMaxAgeYears)) throw Error(ErrorCode::InvalidArgument, "truth outside [0, 130]");
    }

    const double n = static_cast<double>(truth.size());
    double truth_mean = 0;
    for (double t : truth) truth_mean += t;
    truth_mean /= n;

    RegressionScores s;
    double ss_res = 0, ss_tot = 0, abs_sum = 0, pct_sum = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double err = pred[i] - truth[i];
        ss_res += err * err;
        abs_sum += std::abs(err);
        ss_tot += (truth[i] - truth_mean) * (truth[i] - truth_mean);

        double denom = truth[i];
        if (zero_policy.policy == MapeZeroPolicy::Epsilon) {
            denom = std::max(denom, zero_policy.epsilon);
        } else if (denom == 0) {
            ++s.n_excluded;
            continue;
        }
        pct_sum += std::abs(err) / denom;
        ++s.n_used;
    }
    s.mse = ss_res / n;
    s.rmse = std::sqrt(s.mse);
    s.mae = abs_sum / n;
    if (ss_tot > 0) s.r2 = 1.0 - ss_res / ss_tot;
    if (s.n_used > 0) s.mape_percent = 100.0 * pct_sum / static_cast<double>(s.n_used);
    return s;
}

ClassificationScores classification_scores(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                                           std::size_t num_classes) {
    if (pred.size() != truth.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " truths");
    }
    if (truth.empty()) throw Error(ErrorCode::InvalidArgument, "classification scores need at least one pair");

    ClassificationScores s;
    s.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= num_classes || pred[i] >= num_classes) {
            throw Error(ErrorCode::IndexOutOfRange, "label index at position " + std::to_string(i) +
                                                        " outside 0.." + std::to_string(num_classes - 1));
        }
        ++s.confusion[truth[i]][pred[i]];
    }

    const double n = static_cast<double>(truth.size());
    double diagonal = 0, chance = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        double row = 0, col = 0;
        for (std::size_t j = 0; j < num_classes; ++j) {
            row += static_cast<double>(s.confusion[c][j]);
            col += static_cast<double>(s.confusion[j][c]);
        }
        diagonal += static_cast<double>(s.confusion[c][c]);
        chance += (row / n) * (col / n);
    }
    const double observed = diagonal / n;
    s.accuracy = observed;
    if (chance == 1.0) {
        if (observed == 1.0) s.kappa = 1.0;
    } else {
        s.kappa = (observed - chance) / (1.0 - chance);
    }
    return s;
}

OffTargetScores off_target_scores(std::span<const Prediction> predictions) {
    OffTargetScores s;
    s.total = predictions.size();
    for (const auto& p : predictions) {
        if (p.first_attempt_off_target) ++s.first_attempt_off_target;
        switch (p.resolution) {
            case ResolutionPath::Parsed: ++s.parsed; break;
            case ResolutionPath::EmbeddingFallback: ++s.embedding_fallback; break;
            case ResolutionPath::Imputed: ++s.imputed; break;
            case ResolutionPath::Unresolvable: ++s.unresolvable; break;
        }
    }
    if (s.total > 0) {
        const double n = static_cast<double>(s.total);
        s.first_attempt_rate = static_cast<double>(s.first_attempt_off_target) / n;
        s.post_retry_rate = static_cast<double>(s.embedding_fallback + s.imputed) / n;
    }
    return s;
}

}  // namespace demoscope
