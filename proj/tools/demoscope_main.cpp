#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "demoscope/config.hpp"
#include "demoscope/datasets.hpp"
#include "demoscope/error.hpp"
#include "demoscope/harness.hpp"

namespace fs = std::filesystem;
using namespace demoscope;

namespace {

DatasetId parse_dataset(const std::string& s) {
    auto id = dataset_from_string(s);
    if (!id) throw Error(ErrorCode::ConfigInvalid, "unknown dataset '" + s + "' (utkface, fairface, cacd)");
    return *id;
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ConfigInvalid:
        case ErrorCode::UnresolvedPlaceholder:
        case ErrorCode::MissingTemplate:
            return 2;
        default:
            return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot demographic inference harness for image-capable chat endpoints"};
    app.require_subcommand(1);

    std::string dataset;
    fs::path root, labels, out_path;
    auto* ingest = app.add_subcommand("ingest", "Index a dataset and write its manifest");
    ingest->add_option("--dataset", dataset, "utkface, fairface or cacd")->required();
    ingest->add_option("--root", root, "Image directory")->required();
    ingest->add_option("--labels", labels, "Label CSV (fairface, cacd)");
    ingest->add_option("--out", out_path, "Manifest path")->default_val("index.json");

    fs::path config_path;
    std::optional<fs::path> mock;
    bool resume = false;
    auto* run_cmd = app.add_subcommand("run", "Evaluate a model as described by a run config");
    run_cmd->add_option("--config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--mock", mock, "Scripted fixture file replacing the endpoints")->check(CLI::ExistingFile);
    run_cmd->add_flag("--resume", resume, "Keep samples already finished in the output directory");

    std::vector<fs::path> run_dirs;
    bool force = false;
    std::string format = "md";
    auto* report = app.add_subcommand("report", "Compare finished runs");
    report->add_option("dirs", run_dirs, "Run directories")->required();
    report->add_flag("--force", force, "Allow runs over different datasets");
    report->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "csv"}));

    auto* validate = app.add_subcommand("validate", "Check a dataset directory and print label histograms");
    validate->add_option("--dataset", dataset, "utkface, fairface or cacd")->required();
    validate->add_option("--root", root, "Image directory")->required();
    validate->add_option("--labels", labels, "Label CSV (fairface, cacd)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            const DatasetIndex index = index_dataset(parse_dataset(dataset), root, labels);
            write_index_manifest(index, out_path);
            std::cout << index.samples.size() << " samples indexed, " << index.skipped.size() << " skipped\n"
                      << "manifest: " << out_path.string() << "\ndigest: " << index.manifest_digest << "\n";
            if (!index.skipped.empty()) std::cerr << skip_report_text(index);
        } else if (*run_cmd) {
            RunOptions options;
            options.mock_fixtures = mock;
            options.resume = resume;
            options.log = &std::cerr;
            const RunArtifacts art = run(load_run_config(config_path), options);
            std::cout << comparison_markdown(std::span(&art.report, 1));
            std::cout << "run directory: " << art.dir.string() << "\n";
        } else if (*report) {
            std::cout << report_runs(run_dirs, force, format == "csv" ? ReportFormat::Csv : ReportFormat::Markdown);
        } else if (*validate) {
            validate_dataset(parse_dataset(dataset), root, labels, std::cout);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
