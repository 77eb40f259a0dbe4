#include "support.hpp"

#include "demoscope/csv.hpp"
#include "demoscope/parsing.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace testsupport {

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("demoscope-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_fake_image(const fs::path& path) { write_file(path, std::string("\xFF\xD8\xFF\xE0" "fake", 8)); }

void make_utkface_dir(const fs::path& dir, const std::vector<std::string>& names) {
    fs::create_directories(dir);
    for (const auto& n : names) write_fake_image(dir / n);
}

std::vector<std::string> utkface_names(int count) {
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) {
        const int age = 5 + 9 * i;
        out.push_back(std::to_string(age) + "_" + std::to_string(i % 2) + "_" + std::to_string(i % 5) + "_2017011617" +
                      std::to_string(1000 + i) + ".jpg");
    }
    return out;
}

fs::path data_dir() { return DEMOSCOPE_DATA_DIR; }

nlohmann::json fixtures(std::initializer_list<std::pair<std::string, nlohmann::json>> entries) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries) j[k] = v;
    return j;
}

std::vector<CorpusCase> load_parser_corpus() {
    const auto table = demoscope::read_csv(data_dir() / "parser_corpus.csv", true);
    std::vector<CorpusCase> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != 4) throw std::runtime_error("corpus line " + std::to_string(table.row_lines[i]));
        CorpusCase c;
        c.line = table.row_lines[i];
        c.dataset = demoscope::dataset_from_string(row[0]).value();
        c.kind = demoscope::attribute_from_string(row[1]).value();
        c.response = row[2];
        c.expected = row[3];
        out.push_back(std::move(c));
    }
    return out;
}

std::string corpus_verdict(const CorpusCase& c, const demoscope::DatasetTaxonomies& tax) {
    const auto outcome = demoscope::parse_attribute(c.response, c.kind, tax);
    if (outcome.on_target()) return demoscope::label_display(*outcome.value, tax);
    return "off_target:" + std::string(demoscope::to_string(outcome.reason));
}

std::vector<double> axis(std::size_t dim, std::size_t axis_index) {
    std::vector<double> v(dim, 0.0);
    v.at(axis_index) = 1.0;
    return v;
}

}  // namespace testsupport

namespace testsupport {

void add_chain_replies(nlohmann::json& fx, const std::string& sid, demoscope::Mode mode, const std::string& age,
                       const std::string& gender, const std::string& race) {
    if (mode == demoscope::Mode::Cot) {
        fx[sid + "/ffc/1"] = "Smooth skin, short dark hair, no wrinkles.";
        fx[sid + "/name/1"] = "Smith John";
    }
    if (!age.empty()) fx[sid + "/age/1"] = age;
    if (!gender.empty()) fx[sid + "/gender/1"] = gender;
    if (!race.empty()) fx[sid + "/race/1"] = race;
}

}  // namespace testsupport

namespace testsupport {

MockRun utkface_mock_run(const fs::path& dir, const std::vector<std::string>& names, demoscope::Mode mode,
                         const std::string& out) {
    using namespace demoscope;
    const auto& tax = taxonomies_for(DatasetId::Utkface);
    MockRun run;
    make_utkface_dir(dir / "img", names);
    run.fx = nlohmann::json::object();
    for (const auto& n : names) {
        const int age = std::stoi(n.substr(0, n.find('_')));
        const auto g = static_cast<std::size_t>(n[n.find('_') + 1] - '0');
        const auto r = static_cast<std::size_t>(n[n.find('_', n.find('_') + 1) + 1] - '0');
        add_chain_replies(run.fx, n, mode, std::to_string(age + 3), tax.gender->category(g), tax.race->category(r));
    }
    run.fixtures_path = dir / "fixtures.json";
    run.config.dataset = DatasetId::Utkface;
    run.config.root = dir / "img";
    run.config.mode = mode;
    run.config.output_dir = dir / out;
    run.config.label = std::string("mock (") + std::string(to_string(mode)) + ")";
    save_fixtures(run);
    return run;
}

void save_fixtures(const MockRun& run) { write_file(run.fixtures_path, run.fx.dump(2)); }

}  // namespace testsupport
