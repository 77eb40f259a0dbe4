#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demoscope/core.hpp"
#include "demoscope/pipeline.hpp"
#include "json.hpp"

namespace demoscope {

/// A prediction joined with the sample's ground truth, as stored in predictions.csv.
struct ScoredPrediction {
    Prediction prediction;
    std::optional<LabelValue> truth;
};

// Transcripts: JSONL, one object per step record.
std::string transcript_jsonl(const Transcript& transcript);
/// Groups consecutive lines by sample id. The description of a non-degraded
/// cot transcript is recomposed from its final ffc and name replies.
std::vector<Transcript> parse_transcripts_jsonl(std::string_view text);

// Predictions: CSV with a header row.
std::string predictions_csv_header();
std::string prediction_csv_row(const ScoredPrediction& row, const DatasetTaxonomies& tax);
std::vector<ScoredPrediction> parse_predictions_csv(std::string_view text, const DatasetTaxonomies& tax);

// Checkpoint: one JSON line per finished sample, appended in completion order.
nlohmann::ordered_json outcome_to_json(const SampleOutcome& outcome, const DatasetTaxonomies& tax);
SampleOutcome outcome_from_json(const nlohmann::json& j, const DatasetTaxonomies& tax);
/// Malformed lines (such as a torn final line after a crash) are skipped.
std::vector<SampleOutcome> read_checkpoint(const std::filesystem::path& path, const DatasetTaxonomies& tax);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace demoscope
