#include "demoscope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <ostream>
#include <thread>

#include "demoscope/datasets.hpp"
#include "demoscope/digest.hpp"
#include "demoscope/error.hpp"
#include "demoscope/pipeline.hpp"
#include "demoscope/prompts.hpp"
#include "demoscope/synonyms.hpp"
#include "demoscope/transcript_validator.hpp"

namespace demoscope {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kManifestFormat = "demoscope-run-v1";

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string_view to_string(MapeZeroPolicy p) { return p == MapeZeroPolicy::Exclude ? "exclude" : "epsilon"; }
std::string_view to_string(UnresolvedAgePolicy p) {
    return p == UnresolvedAgePolicy::ImputeMidpoint ? "impute_midpoint" : "exclude";
}

ordered_json config_snapshot(const RunConfig& c) {
    ordered_json j;
    j["label"] = c.display_label();
    j["dataset"] = std::string(demoscope::to_string(c.dataset));
    j["root"] = c.root.string();
    j["labels"] = c.labels.string();
    j["eval_count"] = c.eval_count;
    j["seed"] = c.seed;
    j["mode"] = std::string(demoscope::to_string(c.mode));
    j["retries"] = c.retries_n;
    j["temperature"] = c.temperature;
    j["concurrency"] = c.concurrency_limit;
    j["parallel_steps"] = c.parallel_steps;
    j["templates"] = c.templates.string();
    j["synonyms"] = c.synonyms.string();
    j["mape_zero_policy"] = std::string(to_string(c.mape_zero.policy));
    j["mape_epsilon"] = c.mape_zero.epsilon;
    j["unresolved_age_policy"] = std::string(to_string(c.unresolved_age));
    j["fallback"] = std::string(demoscope::to_string(c.fallback));
    const auto& e = c.endpoint;
    j["endpoint"] = {{"base_url", e.base_url},
                     {"chat_path", e.chat_path},
                     {"embeddings_base_url", e.embeddings_base_url},
                     {"embeddings_path", e.embeddings_path},
                     {"model", e.model},
                     {"embedding_model", e.embedding_model},
                     {"api_key_env", e.api_key_env},
                     {"max_tokens", e.max_tokens},
                     {"timeout_seconds", e.timeout_seconds},
                     {"transport_retries", e.transport_retries}};
    return j;
}

struct Inputs {
    DatasetIndex index;
    DatasetTaxonomies taxonomies;
    TemplateSet templates;
    std::vector<Sample> samples;
    std::string synonyms_digest;
};

Inputs load_inputs(const RunConfig& config) {
    if (config.root.empty() || !fs::exists(config.root)) {
        throw Error(ErrorCode::DatasetMissing, "dataset root '" + config.root.string() + "' does not exist");
    }
    if (config.dataset != DatasetId::Utkface && (config.labels.empty() || !fs::exists(config.labels))) {
        throw Error(ErrorCode::DatasetMissing, "label file '" + config.labels.string() + "' does not exist");
    }
    Inputs in;
    in.index = index_dataset(config.dataset, config.root, config.labels);
    in.taxonomies = load_taxonomies(config.dataset, config.synonyms);
    in.synonyms_digest = sha256_file(config.synonyms);
    in.templates = TemplateSet::load(config.templates);
    const std::size_t n = config.eval_count == 0 ? in.index.samples.size() : static_cast<std::size_t>(config.eval_count);
    in.samples = select_eval_set(in.index, n, config.seed);
    return in;
}

bool all_unresolvable(const SampleOutcome& o) {
    return !o.predictions.empty() && std::all_of(o.predictions.begin(), o.predictions.end(), [](const Prediction& p) {
        return p.resolution == ResolutionPath::Unresolvable;
    });
}

std::string first_error(const SampleOutcome& o) {
    for (const auto& p : o.predictions) {
        if (!p.error.empty()) return p.error;
    }
    return "unknown cause";
}

void check_resume_compatible(const fs::path& manifest_path, const ordered_json& fresh) {
    if (!fs::exists(manifest_path)) return;
    json old;
    try {
        old = json::parse(read_text_file(manifest_path));
    } catch (const json::exception&) {
        return;
    }
    for (const char* key : {"dataset_digest", "template_digest", "synonyms_digest", "fixtures_digest"}) {
        if (old.value(key, json()) != json(fresh[key])) {
            throw Error(ErrorCode::ConfigInvalid, std::string("cannot resume: ") + key + " differs from the earlier run");
        }
    }
    if (json(fresh["config"]["retries"]) != old["config"].value("retries", json()) ||
        json(fresh["config"]["mode"]) != old["config"].value("mode", json())) {
        throw Error(ErrorCode::ConfigInvalid, "cannot resume: mode or retries differ from the earlier run");
    }
}

}  // namespace

RunArtifacts run(const RunConfig& config, const RunOptions& options) {
    config.validate();
    if (options.mock_fixtures) {
        ScriptedMock mock = ScriptedMock::load(*options.mock_fixtures);
        return run_with_clients(config, mock, &mock, options, sha256_file(*options.mock_fixtures));
    }
    HttpModelClient client(config.endpoint, config.concurrency_limit);
    return run_with_clients(config, client, &client, options);
}

RunArtifacts run_with_clients(const RunConfig& config, const ChatClient& client, const Embedder* embedder,
                              const RunOptions& options, const std::string& fixtures_digest) {
    config.validate();
    const std::string started = utc_now();
    Inputs in = load_inputs(config);

    RunArtifacts art;
    art.dir = config.output_dir;
    art.manifest = art.dir / kManifestFile;
    art.transcripts = art.dir / kTranscriptsFile;
    art.predictions = art.dir / kPredictionsFile;
    art.report_json = art.dir / kReportJsonFile;
    art.report_md = art.dir / kReportMdFile;
    const fs::path checkpoint = art.dir / kCheckpointFile;
    fs::create_directories(art.dir);

    const ChainPlan plan = make_plan(in.taxonomies, config.mode, config.parallel_steps);
    ordered_json manifest;
    manifest["format"] = kManifestFormat;
    manifest["config"] = config_snapshot(config);
    manifest["kinds"] = ordered_json::array();
    for (auto k : plan.kinds) manifest["kinds"].push_back(std::string(to_string(k)));
    manifest["dataset_digest"] = in.index.manifest_digest;
    manifest["dataset_size"] = in.index.samples.size();
    manifest["dataset_skipped"] = in.index.skipped.size();
    manifest["template_digest"] = in.templates.digest();
    manifest["synonyms_digest"] = in.synonyms_digest;
    manifest["fixtures_digest"] = fixtures_digest.empty() ? ordered_json(nullptr) : ordered_json(fixtures_digest);
    manifest["samples"] = in.samples.size();

    std::map<std::string, SampleOutcome> done;
    if (options.resume) {
        check_resume_compatible(art.manifest, manifest);
        std::set<std::string> wanted;
        for (const auto& s : in.samples) wanted.insert(s.id);
        for (auto& o : read_checkpoint(checkpoint, in.taxonomies)) {
            if (wanted.count(o.transcript.sample_id) && o.predictions.size() == plan.kinds.size()) {
                done[o.transcript.sample_id] = std::move(o);
            }
        }
        art.resumed_samples = done.size();
    } else {
        fs::remove(checkpoint);
    }
    manifest["started_at"] = started;
    manifest["finished_at"] = nullptr;
    manifest["status"] = "running";
    write_text_file(art.manifest, manifest.dump(2) + "\n");
    write_text_file(art.dir / "skipped.txt", skip_report_text(in.index));

    std::vector<const Sample*> pending;
    for (const auto& s : in.samples) {
        if (!done.count(s.id)) pending.push_back(&s);
    }

    PipelineContext ctx;
    ctx.client = &client;
    ctx.embedder = embedder;
    ctx.templates = &in.templates;
    ctx.taxonomies = &in.taxonomies;
    ctx.policy = {config.retries_n, config.fallback};
    ctx.model_name = config.endpoint.model;
    ctx.temperature = config.temperature;
    ctx.max_tokens = config.endpoint.max_tokens;

    std::mutex mu;
    std::ofstream checkpoint_out(checkpoint, std::ios::binary | std::ios::app);
    if (!checkpoint_out) throw Error(ErrorCode::Io, "cannot write " + checkpoint.string());
    std::size_t unresolvable = 0;
    for (const auto& [id, o] : done) unresolvable += all_unresolvable(o) ? 1 : 0;
    std::string unresolvable_cause;
    std::exception_ptr failure;
    std::atomic<bool> abort{false};
    std::atomic<std::size_t> next{0};
    const std::size_t total = in.samples.size();

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            try {
                SampleOutcome o = run_sample(*pending[i], plan, ctx);
                const std::string line = outcome_to_json(o, in.taxonomies).dump() + "\n";
                std::lock_guard lock(mu);
                checkpoint_out << line << std::flush;
                if (all_unresolvable(o)) {
                    if (unresolvable_cause.empty()) unresolvable_cause = first_error(o);
                    if (++unresolvable * 2 > total) abort = true;
                }
                if (options.log) *options.log << "[" << done.size() + 1 << "/" << total << "] " << o.transcript.sample_id << "\n";
                done[o.transcript.sample_id] = std::move(o);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                abort = true;
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit),
                                                        std::max<std::size_t>(pending.size(), 1));
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
    checkpoint_out.close();

    if (failure) std::rethrow_exception(failure);
    if (unresolvable * 2 > total) {
        manifest["status"] = "aborted";
        manifest["finished_at"] = utc_now();
        write_text_file(art.manifest, manifest.dump(2) + "\n");
        throw Error(ErrorCode::HealthGuard, std::to_string(unresolvable) + " of " + std::to_string(total) +
                                                " samples unresolvable; first cause: " + unresolvable_cause);
    }

    std::map<std::string, const Sample*> by_id;
    for (const auto& s : in.samples) by_id[s.id] = &s;
    std::string transcripts, predictions = predictions_csv_header();
    std::vector<ScoredPrediction> rows;
    std::vector<std::string> violations;
    for (const auto& [id, o] : done) {
        for (auto& v : validate_transcript(o.transcript, o.predictions, config.retries_n)) violations.push_back(v);
        transcripts += transcript_jsonl(o.transcript);
        for (const auto& p : o.predictions) {
            ScoredPrediction row{p, by_id.at(id)->truth(p.kind)};
            predictions += prediction_csv_row(row, in.taxonomies);
            rows.push_back(std::move(row));
        }
    }
    if (!violations.empty()) {
        throw Error(ErrorCode::InvalidArgument, "transcript validation failed: " + violations.front());
    }
    write_text_file(art.transcripts, transcripts);
    write_text_file(art.predictions, predictions);

    art.report = compute_report(config.display_label(), config.dataset, config.mode, rows, in.taxonomies,
                                config.mape_zero, config.unresolved_age);
    write_text_file(art.report_json, report_to_json(art.report).dump(2) + "\n");
    write_text_file(art.report_md, comparison_markdown(std::span(&art.report, 1)));

    manifest["status"] = "complete";
    manifest["finished_at"] = utc_now();
    write_text_file(art.manifest, manifest.dump(2) + "\n");
    return art;
}

MetricsReport load_run_report(const fs::path& run_dir) {
    json manifest;
    try {
        manifest = json::parse(read_text_file(run_dir / kManifestFile));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, (run_dir / kManifestFile).string() + ": " + e.what());
    }
    if (manifest.value("format", "") != kManifestFormat) {
        throw Error(ErrorCode::SchemaMismatch, run_dir.string() + " is not a run directory");
    }
    if (manifest.value("status", "") != "complete") {
        throw Error(ErrorCode::SchemaMismatch, run_dir.string() + " holds an unfinished run");
    }
    try {
        const json& c = manifest.at("config");
        auto dataset = dataset_from_string(c.at("dataset").get<std::string>());
        auto mode = mode_from_string(c.at("mode").get<std::string>());
        if (!dataset || !mode) throw Error(ErrorCode::Decode, run_dir.string() + ": bad dataset or mode in manifest");
        MapeZeroHandling mape;
        mape.policy = c.at("mape_zero_policy").get<std::string>() == "epsilon" ? MapeZeroPolicy::Epsilon
                                                                              : MapeZeroPolicy::Exclude;
        mape.epsilon = c.at("mape_epsilon").get<double>();
        const UnresolvedAgePolicy age = c.at("unresolved_age_policy").get<std::string>() == "exclude"
                                            ? UnresolvedAgePolicy::Exclude
                                            : UnresolvedAgePolicy::ImputeMidpoint;
        const DatasetTaxonomies& tax = taxonomies_for(*dataset);
        const auto rows = parse_predictions_csv(read_text_file(run_dir / kPredictionsFile), tax);
        return compute_report(c.at("label").get<std::string>(), *dataset, *mode, rows, tax, mape, age);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, (run_dir / kManifestFile).string() + ": " + e.what());
    }
}

std::string report_runs(std::span<const fs::path> run_dirs, bool force, ReportFormat format) {
    if (run_dirs.empty()) throw Error(ErrorCode::InvalidArgument, "no run directories given");
    std::vector<MetricsReport> reports;
    for (const auto& dir : run_dirs) reports.push_back(load_run_report(dir));
    for (const auto& r : reports) {
        if (r.dataset != reports.front().dataset && !force) {
            throw Error(ErrorCode::SchemaMismatch, "runs evaluated " + std::string(to_string(reports.front().dataset)) +
                                                       " and " + std::string(to_string(r.dataset)) +
                                                       "; pass --force to compare anyway");
        }
    }
    return format == ReportFormat::Csv ? comparison_csv(reports) : comparison_markdown(reports);
}

void validate_dataset(DatasetId id, const fs::path& root, const fs::path& labels, std::ostream& out) {
    const DatasetIndex index = index_dataset(id, root, labels);
    out << "dataset: " << to_string(id) << "\n";
    out << "samples: " << index.samples.size() << "\n";
    out << "digest: " << index.manifest_digest << "\n";
    for (const auto& [kind, hist] : label_histograms(index)) {
        out << "\n" << to_string(kind) << ":\n";
        for (const auto& [label, count] : hist) out << "  " << label << "\t" << count << "\n";
    }
    out << "\nskipped: " << index.skipped.size() << "\n";
    if (!index.skipped.empty()) out << skip_report_text(index);
}

}  // namespace demoscope
