#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "demoscope/config.hpp"
#include "demoscope/core.hpp"
#include "json.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

void write_file(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);
/// A few bytes with a JPEG magic number; the harness never decodes images.
void write_fake_image(const fs::path& path);

/// Writes `names` as fake images into `dir`.
void make_utkface_dir(const fs::path& dir, const std::vector<std::string>& names);

/// Ten well-formed UTKFace names with distinct ids.
std::vector<std::string> utkface_names(int count);

fs::path data_dir();

/// Mock fixture map with the given replies: key "sid/step/attempt".
nlohmann::json fixtures(std::initializer_list<std::pair<std::string, nlohmann::json>> entries);

struct CorpusCase {
    std::size_t line = 0;
    demoscope::DatasetId dataset = demoscope::DatasetId::Utkface;
    demoscope::AttributeKind kind = demoscope::AttributeKind::Age;
    std::string response;
    /// Label display string, or "off_target:<reason>".
    std::string expected;
};

std::vector<CorpusCase> load_parser_corpus();

/// The parser verdict in corpus notation.
std::string corpus_verdict(const CorpusCase& c, const demoscope::DatasetTaxonomies& tax);

/// Unit vector along `axis` of dimension `dim`.
std::vector<double> axis(std::size_t dim, std::size_t axis_index);

}  // namespace testsupport

namespace testsupport {

/// Adds first-attempt replies for one sample to `fx`. Empty strings are
/// skipped so callers can script those steps themselves.
void add_chain_replies(nlohmann::json& fx, const std::string& sid, demoscope::Mode mode, const std::string& age,
                       const std::string& gender, const std::string& race);

}  // namespace testsupport

namespace testsupport {

/// A UTKFace run over `names` in `dir`: images under dir/img, fixtures in
/// dir/fixtures.json (first-attempt replies echoing the truth), output in
/// dir/<out>.
struct MockRun {
    demoscope::RunConfig config;
    fs::path fixtures_path;
    nlohmann::json fx;
};

MockRun utkface_mock_run(const fs::path& dir, const std::vector<std::string>& names, demoscope::Mode mode,
                         const std::string& out);

/// Writes `run.fx` to `run.fixtures_path`.
void save_fixtures(const MockRun& run);

}  // namespace testsupport
