#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "demoscope/config.hpp"
#include "demoscope/core.hpp"
#include "demoscope/model_client.hpp"
#include "demoscope/parsing.hpp"

namespace demoscope {

struct ResolutionPolicy {
    int retries_n = 5;
    FallbackKind fallback = FallbackKind::Embedding;
};

/// Produces the raw reply for attempt k (1-based). May throw demoscope::Error.
using AttemptFn = std::function<std::string(int attempt)>;
using ParseFn = std::function<ParseOutcome<LabelValue>(std::string_view raw)>;

struct FallbackChoice {
    LabelValue value;
    ResolutionPath path = ResolutionPath::EmbeddingFallback;  // or Imputed
};

/// Invoked once, with the final raw reply, after N off-target attempts. May throw.
using FallbackFn = std::function<FallbackChoice(std::string_view final_raw_text)>;

/// Repeats the attempt until the first on-target reply or N attempts, then
/// applies the fallback exactly once. Never throws: client failures, a
/// failing fallback, and FallbackKind::Fail all yield an Unresolvable
/// prediction with `error` set. sample_id and kind are left for the caller.
Prediction resolve(const AttemptFn& attempt_fn, const ParseFn& parse, const FallbackFn& fallback,
                   const ResolutionPolicy& policy);

/// Cosine similarity. Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

struct NearestCategory {
    std::size_t index = 0;
    ResolutionPath path = ResolutionPath::EmbeddingFallback;
};

/// Embeds [raw_text] followed by every category display string in a single
/// call and returns the most similar category (ties: lowest index). Blank raw
/// text skips the embedding and yields index 0 marked Imputed. Embedding
/// failures are rethrown as Unresolvable.
NearestCategory fallback_nearest(std::string_view raw_text, const Taxonomy& taxonomy, const Embedder& embedder);

}  // namespace demoscope
