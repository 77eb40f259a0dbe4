#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "demoscope/config.hpp"
#include "demoscope/model_client.hpp"
#include "demoscope/report.hpp"

namespace demoscope {

struct RunOptions {
    /// Scripted fixtures replacing both endpoints.
    std::optional<std::filesystem::path> mock_fixtures;
    /// Keep samples already recorded in the run directory's checkpoint.
    bool resume = false;
    /// Progress lines; null for silence.
    std::ostream* log = nullptr;
};

struct RunArtifacts {
    std::filesystem::path dir;
    std::filesystem::path manifest;
    std::filesystem::path transcripts;
    std::filesystem::path predictions;
    std::filesystem::path report_json;
    std::filesystem::path report_md;
    MetricsReport report;
    std::size_t resumed_samples = 0;
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTranscriptsFile = "transcripts.jsonl";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.jsonl";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportMdFile = "report.md";

/// Indexes the dataset, runs every selected sample through the pipeline and
/// writes the run directory. Throws ConfigInvalid, DatasetMissing, or
/// HealthGuard when more than half of the samples end with every attribute
/// unresolvable.
RunArtifacts run(const RunConfig& config, const RunOptions& options = {});

/// As run(), with caller-supplied clients. `embedder` may be null when no
/// embedding fallback is needed.
RunArtifacts run_with_clients(const RunConfig& config, const ChatClient& client, const Embedder* embedder,
                              const RunOptions& options, const std::string& fixtures_digest = "");

/// Recomputes a run's metrics from its manifest and predictions file.
MetricsReport load_run_report(const std::filesystem::path& run_dir);

enum class ReportFormat { Markdown, Csv };

/// Comparison document over several run directories. Throws SchemaMismatch
/// when the runs evaluated different datasets, unless `force`.
std::string report_runs(std::span<const std::filesystem::path> run_dirs, bool force, ReportFormat format);

/// Prints index size, per-attribute label histograms and the skip report.
/// Throws EmptyDataset like the indexers.
void validate_dataset(DatasetId id, const std::filesystem::path& root, const std::filesystem::path& labels,
                      std::ostream& out);

}  // namespace demoscope
