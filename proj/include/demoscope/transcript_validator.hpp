#pragma once

#include <span>
#include <string>
#include <vector>

#include "demoscope/core.hpp"

namespace demoscope {

/// Checks the structural invariants of a transcript and of the predictions
/// made from it (step ordering, attempt counters, resolution paths, and the
/// composed description wiring). Returns one message per violation.
std::vector<std::string> validate_transcript(const Transcript& transcript, std::span<const Prediction> predictions,
                                             int retries_n);

}  // namespace demoscope
