#include "demoscope/config.hpp"

#include <set>

#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

std::string_view to_string(FallbackKind f) {
    switch (f) {
        case FallbackKind::Embedding: return "embedding";
        case FallbackKind::Impute: return "impute";
        case FallbackKind::Fail: return "fail";
    }
    return "?";
}

std::filesystem::path default_templates_path() {
    return std::filesystem::path(DEMOSCOPE_DATA_DIR) / "templates" / "default.toml";
}

std::filesystem::path default_synonyms_path() { return std::filesystem::path(DEMOSCOPE_DATA_DIR) / "synonyms.csv"; }

std::string RunConfig::display_label() const {
    if (!label.empty()) return label;
    return endpoint.model + (mode == Mode::Cot ? " w/ cot" : "");
}

void RunConfig::validate() const {
    std::vector<std::string> problems;
    if (eval_count < 0) problems.push_back("eval_count must be >= 0");
    if (retries_n < 1) problems.push_back("retries must be >= 1");
    if (concurrency_limit < 1) problems.push_back("concurrency must be >= 1");
    if (temperature < 0) problems.push_back("temperature must be >= 0");
    if (root.empty()) problems.push_back("root is required");
    if (dataset != DatasetId::Utkface && labels.empty()) problems.push_back("labels is required for this dataset");
    if (mape_zero.policy == MapeZeroPolicy::Epsilon && !(mape_zero.epsilon > 0)) {
        problems.push_back("mape_epsilon must be > 0");
    }
    if (endpoint.max_tokens < 1) problems.push_back("endpoint.max_tokens must be >= 1");
    if (endpoint.transport_retries < 0) problems.push_back("endpoint.transport_retries must be >= 0");
    if (!(endpoint.timeout_seconds > 0)) problems.push_back("endpoint.timeout_seconds must be > 0");
    if (!problems.empty()) throw Error(ErrorCode::ConfigInvalid, text::join(problems, "; "));
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "label", "dataset", "root", "labels", "eval_count", "seed", "mode", "retries", "temperature",
        "concurrency", "parallel_steps", "templates", "synonyms", "output_dir", "mape_zero_policy",
        "mape_epsilon", "unresolved_age_policy", "fallback", "endpoint.base_url", "endpoint.chat_path",
        "endpoint.embeddings_base_url", "endpoint.embeddings_path", "endpoint.model", "endpoint.embedding_model",
        "endpoint.api_key_env", "endpoint.max_tokens", "endpoint.timeout_seconds", "endpoint.transport_retries",
        "endpoint.backoff_initial_ms"};
    return keys;
}

int to_int(long long v, const std::string& key) {
    if (v < INT32_MIN || v > INT32_MAX) throw Error(ErrorCode::ConfigInvalid, key + " out of range");
    return static_cast<int>(v);
}

}  // namespace

RunConfig run_config_from_kv(const KvFile& kv, const std::filesystem::path& base_dir) {
    for (const auto& [key, _] : kv.values()) {
        if (!known_keys().count(key)) throw Error(ErrorCode::ConfigInvalid, kv.origin() + ": unknown key '" + key + "'");
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : (base_dir / path).lexically_normal();
    };

    RunConfig c;
    if (auto v = kv.get_string("label")) c.label = *v;
    auto ds = kv.get_string("dataset");
    if (!ds) throw Error(ErrorCode::ConfigInvalid, "dataset is required");
    auto id = dataset_from_string(*ds);
    if (!id) throw Error(ErrorCode::ConfigInvalid, "unknown dataset '" + *ds + "'");
    c.dataset = *id;
    if (auto v = kv.get_string("root")) c.root = resolve(*v);
    if (auto v = kv.get_string("labels")) c.labels = resolve(*v);
    if (auto v = kv.get_int("eval_count")) c.eval_count = to_int(*v, "eval_count");
    if (auto v = kv.get_int("seed")) {
        if (*v < 0) throw Error(ErrorCode::ConfigInvalid, "seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = kv.get_string("mode")) {
        auto m = mode_from_string(*v);
        if (!m) throw Error(ErrorCode::ConfigInvalid, "mode must be naive or cot");
        c.mode = *m;
    }
    if (auto v = kv.get_int("retries")) c.retries_n = to_int(*v, "retries");
    if (auto v = kv.get_number("temperature")) c.temperature = *v;
    if (auto v = kv.get_int("concurrency")) c.concurrency_limit = to_int(*v, "concurrency");
    if (auto v = kv.get_bool("parallel_steps")) c.parallel_steps = *v;
    if (auto v = kv.get_string("templates")) c.templates = resolve(*v);
    if (auto v = kv.get_string("synonyms")) c.synonyms = resolve(*v);
    if (auto v = kv.get_string("output_dir")) c.output_dir = resolve(*v);
    else c.output_dir = resolve("run");
    if (auto v = kv.get_string("mape_zero_policy")) {
        if (*v == "exclude") c.mape_zero.policy = MapeZeroPolicy::Exclude;
        else if (*v == "epsilon") c.mape_zero.policy = MapeZeroPolicy::Epsilon;
        else throw Error(ErrorCode::ConfigInvalid, "mape_zero_policy must be exclude or epsilon");
    }
    if (auto v = kv.get_number("mape_epsilon")) c.mape_zero.epsilon = *v;
    if (auto v = kv.get_string("unresolved_age_policy")) {
        if (*v == "impute_midpoint") c.unresolved_age = UnresolvedAgePolicy::ImputeMidpoint;
        else if (*v == "exclude") c.unresolved_age = UnresolvedAgePolicy::Exclude;
        else throw Error(ErrorCode::ConfigInvalid, "unresolved_age_policy must be impute_midpoint or exclude");
    }
    if (auto v = kv.get_string("fallback")) {
        if (*v == "embedding") c.fallback = FallbackKind::Embedding;
        else if (*v == "impute") c.fallback = FallbackKind::Impute;
        else if (*v == "fail") c.fallback = FallbackKind::Fail;
        else throw Error(ErrorCode::ConfigInvalid, "fallback must be embedding, impute or fail");
    }

    auto& e = c.endpoint;
    if (auto v = kv.get_string("endpoint.base_url")) e.base_url = *v;
    if (auto v = kv.get_string("endpoint.chat_path")) e.chat_path = *v;
    if (auto v = kv.get_string("endpoint.embeddings_base_url")) e.embeddings_base_url = *v;
    if (auto v = kv.get_string("endpoint.embeddings_path")) e.embeddings_path = *v;
    if (auto v = kv.get_string("endpoint.model")) e.model = *v;
    if (auto v = kv.get_string("endpoint.embedding_model")) e.embedding_model = *v;
    if (auto v = kv.get_string("endpoint.api_key_env")) e.api_key_env = *v;
    if (auto v = kv.get_int("endpoint.max_tokens")) e.max_tokens = to_int(*v, "endpoint.max_tokens");
    if (auto v = kv.get_number("endpoint.timeout_seconds")) e.timeout_seconds = *v;
    if (auto v = kv.get_int("endpoint.transport_retries")) e.transport_retries = to_int(*v, "endpoint.transport_retries");
    if (auto v = kv.get_int("endpoint.backoff_initial_ms")) e.backoff_initial_ms = to_int(*v, "endpoint.backoff_initial_ms");

    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const KvFile kv = KvFile::load(path);
    return run_config_from_kv(kv, std::filesystem::absolute(path).parent_path());
}

}  // namespace demoscope
