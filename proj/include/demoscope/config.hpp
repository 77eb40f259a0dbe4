#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "demoscope/core.hpp"
#include "demoscope/kv_file.hpp"

namespace demoscope {

enum class MapeZeroPolicy { Exclude, Epsilon };

struct MapeZeroHandling {
    MapeZeroPolicy policy = MapeZeroPolicy::Exclude;
    double epsilon = 1.0;
};

enum class UnresolvedAgePolicy { ImputeMidpoint, Exclude };

/// What to do with a categorical attribute after N off-target attempts.
enum class FallbackKind { Embedding, Impute, Fail };

std::string_view to_string(FallbackKind f);

struct EndpointSettings {
    std::string base_url = "http://127.0.0.1:8000";
    std::string chat_path = "/v1/chat/completions";
    /// Empty means same host as base_url.
    std::string embeddings_base_url;
    std::string embeddings_path = "/v1/embeddings";
    std::string model = "llava";
    std::string embedding_model = "clip";
    /// Name of the environment variable holding the API key; empty for none.
    std::string api_key_env;
    int max_tokens = 512;
    double timeout_seconds = 120.0;
    /// Transport-level retries, independent of the off-target retry budget.
    int transport_retries = 3;
    int backoff_initial_ms = 500;
};

std::filesystem::path default_templates_path();
std::filesystem::path default_synonyms_path();

struct RunConfig {
    /// Row label in comparison reports; defaults to "<model> (<mode>)".
    std::string label;
    DatasetId dataset = DatasetId::Utkface;
    /// Image directory (utkface: labelled filenames; fairface/cacd: image root).
    std::filesystem::path root;
    /// Label CSV for fairface/cacd.
    std::filesystem::path labels;
    int eval_count = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::Cot;
    int retries_n = 5;
    double temperature = 0.0;
    int concurrency_limit = 4;
    bool parallel_steps = true;
    EndpointSettings endpoint;
    std::filesystem::path templates = default_templates_path();
    std::filesystem::path synonyms = default_synonyms_path();
    std::filesystem::path output_dir = "run";
    MapeZeroHandling mape_zero;
    UnresolvedAgePolicy unresolved_age = UnresolvedAgePolicy::ImputeMidpoint;
    FallbackKind fallback = FallbackKind::Embedding;

    std::string display_label() const;
    /// Throws ConfigInvalid listing every violated constraint.
    void validate() const;
};

/// Relative paths in the file are resolved against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_kv(const KvFile& kv, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace demoscope
