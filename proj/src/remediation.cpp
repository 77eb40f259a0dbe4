#include "demoscope/remediation.hpp"

#include <cmath>

#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

Prediction resolve(const AttemptFn& attempt_fn, const ParseFn& parse, const FallbackFn& fallback,
                   const ResolutionPolicy& policy) {
    if (policy.retries_n < 1) throw Error(ErrorCode::InvalidArgument, "retries_n must be >= 1");

    Prediction p;
    for (int attempt = 1; attempt <= policy.retries_n; ++attempt) {
        std::string raw;
        try {
            raw = attempt_fn(attempt);
        } catch (const Error& e) {
            p.attempts = attempt;
            p.resolution = ResolutionPath::Unresolvable;
            p.error = e.what();
            return p;
        }
        p.attempts = attempt;
        p.final_raw_text = raw;
        const auto outcome = parse(raw);
        if (attempt == 1) p.first_attempt_off_target = !outcome.on_target();
        if (outcome.on_target()) {
            p.value = *outcome.value;
            p.resolution = ResolutionPath::Parsed;
            return p;
        }
    }

    if (policy.fallback == FallbackKind::Fail) {
        p.resolution = ResolutionPath::Unresolvable;
        p.error = "off-target after " + std::to_string(policy.retries_n) + " attempts";
        return p;
    }
    try {
        const FallbackChoice choice = fallback(p.final_raw_text);
        p.value = choice.value;
        p.resolution = choice.path;
    } catch (const Error& e) {
        p.resolution = ResolutionPath::Unresolvable;
        p.error = e.what();
    }
    return p;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine of vectors sized " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    double dot = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u.values[i] * v.values[i];
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
    }
    if (uu == 0 || vv == 0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    return dot / (std::sqrt(uu) * std::sqrt(vv));
}

NearestCategory fallback_nearest(std::string_view raw_text, const Taxonomy& taxonomy, const Embedder& embedder) {
    if (text::trim(raw_text).empty()) return {0, ResolutionPath::Imputed};

    std::vector<std::string> batch;
    batch.reserve(taxonomy.size() + 1);
    batch.emplace_back(raw_text);
    for (const auto& c : taxonomy.categories()) batch.push_back(c);

    try {
        const auto vectors = embedder.embed(batch);
        if (vectors.size() != batch.size()) {
            throw Error(ErrorCode::Decode, "embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                                               std::to_string(batch.size()) + " texts");
        }
        std::size_t best = 0;
        double best_sim = cosine(vectors[0], vectors[1]);
        for (std::size_t i = 1; i < taxonomy.size(); ++i) {
            const double sim = cosine(vectors[0], vectors[i + 1]);
            if (sim > best_sim) {
                best_sim = sim;
                best = i;
            }
        }
        return {best, ResolutionPath::EmbeddingFallback};
    } catch (const Error& e) {
        throw Error(ErrorCode::Unresolvable, std::string("embedding fallback failed: ") + e.what());
    }
}

}  // namespace demoscope
