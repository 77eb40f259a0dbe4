#include "demoscope/datasets.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "demoscope/csv.hpp"
#include "demoscope/digest.hpp"
#include "demoscope/error.hpp"
#include "demoscope/text.hpp"
#include "json.hpp"

namespace demoscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// UTKFace filename encoding, per the dataset's documentation.
constexpr std::array<Gender, 2> kUtkGender{Gender::Male, Gender::Female};
constexpr int kUtkRaceCount = 5;  // White, Black, Asian, Indian, Others

// FairFace label spellings that differ from our display strings.
const std::map<std::string, std::string, std::less<>>& fairface_encoding() {
    static const std::map<std::string, std::string, std::less<>> table = {
        {"Latino_Hispanic", "Latino"},
        {"more than 70", "70+"},
    };
    return table;
}

bool is_image_extension(const fs::path& p) {
    static const std::set<std::string> kExt = {".jpg", ".jpeg", ".png", ".bmp", ".webp"};
    return kExt.count(text::to_lower(p.extension().string())) != 0;
}

std::optional<int> parse_uint(std::string_view s) {
    s = text::trim(s);
    if (s.empty() || s.size() > 6) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 0) return std::nullopt;
    return v;
}

std::string relative_ref(const fs::path& image, const fs::path& root) {
    return image.lexically_relative(root).generic_string();
}

std::string sample_labels(const Sample& s) {
    const auto& tax = taxonomies_for(s.dataset);
    std::string out;
    for (auto kind : kAllAttributes) {
        out += '\t';
        if (auto v = s.truth(kind)) out += label_display(*v, tax);
        else out += '-';
    }
    return out;
}

void finish(DatasetIndex& index) {
    std::sort(index.samples.begin(), index.samples.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
    index.manifest_digest = compute_index_digest(index.id, index.image_root, index.samples);
}

fs::path image_in(const fs::path& dir, std::string_view file) { return (dir / fs::path(std::string(file))).lexically_normal(); }

struct CsvColumns {
    std::size_t file = 0;
    std::vector<std::size_t> rest;
};

CsvColumns require_columns(const CsvTable& table, const fs::path& path, std::initializer_list<const char*> names) {
    CsvColumns cols;
    bool first = true;
    for (const char* name : names) {
        auto c = table.column(name);
        if (!c) throw Error(ErrorCode::Decode, path.string() + ": missing column '" + name + "'");
        if (first) cols.file = *c;
        else cols.rest.push_back(*c);
        first = false;
    }
    return cols;
}

}  // namespace

std::string compute_index_digest(DatasetId id, const fs::path& image_root, const std::vector<Sample>& samples) {
    std::string canonical = "demoscope-index-v1\t" + std::string(to_string(id)) + "\n";
    for (const auto& s : samples) {
        canonical += s.id;
        canonical += '\t';
        canonical += relative_ref(s.image_path, image_root);
        canonical += sample_labels(s);
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

DatasetIndex index_utkface(const fs::path& root_dir) {
    if (!fs::is_directory(root_dir)) throw Error(ErrorCode::DatasetMissing, root_dir.string() + " is not a directory");
    DatasetIndex index;
    index.id = DatasetId::Utkface;
    index.image_root = root_dir;
    const auto& range = *taxonomies_for(DatasetId::Utkface).age_range;

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        const std::string name = path.filename().string();
        auto skip = [&](std::string reason) { index.skipped.push_back({name, std::move(reason)}); };
        if (!is_image_extension(path)) {
            skip("not an image file");
            continue;
        }
        const std::string stem = name.substr(0, name.find('.'));
        const auto parts = text::split(stem, '_');
        if (parts.size() < 4 || parts[3].empty()) {
            skip("expected [age]_[gender]_[race]_[timestamp]");
            continue;
        }
        const auto age = parse_uint(parts[0]);
        const auto gender = parse_uint(parts[1]);
        const auto race = parse_uint(parts[2]);
        if (!age || !gender || !race) {
            skip("non-numeric label field");
            continue;
        }
        if (!range.contains(*age)) {
            skip("age " + std::to_string(*age) + " outside [" + std::to_string(range.lower) + ", " +
                 std::to_string(range.upper) + "]");
            continue;
        }
        if (*gender >= static_cast<int>(kUtkGender.size())) {
            skip("gender code " + std::to_string(*gender) + " not in {0,1}");
            continue;
        }
        if (*race >= kUtkRaceCount) {
            skip("race code " + std::to_string(*race) + " not in {0..4}");
            continue;
        }
        Sample s;
        s.id = name;
        s.image_path = path;
        s.dataset = DatasetId::Utkface;
        s.truth_age = Years{*age};
        s.truth_gender = kUtkGender[static_cast<std::size_t>(*gender)];
        s.truth_race = static_cast<std::size_t>(*race);
        index.samples.push_back(std::move(s));
    }
    if (index.samples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no well-formed UTKFace files in " + root_dir.string() + " (" +
                                                 std::to_string(index.skipped.size()) + " skipped)");
    }
    finish(index);
    return index;
}

DatasetIndex index_fairface(const fs::path& labels_csv, const fs::path& image_dir) {
    if (!fs::exists(labels_csv)) throw Error(ErrorCode::DatasetMissing, labels_csv.string() + " not found");
    const CsvTable table = read_csv(labels_csv);
    if (table.rows.empty()) throw Error(ErrorCode::EmptyDataset, labels_csv.string() + " has no rows");
    const auto cols = require_columns(table, labels_csv, {"file", "age", "gender", "race"});
    const auto& tax = taxonomies_for(DatasetId::Fairface);

    DatasetIndex index;
    index.id = DatasetId::Fairface;
    index.image_root = image_dir;
    std::set<std::string> seen;
    const std::size_t needed = std::max({cols.file, cols.rest[0], cols.rest[1], cols.rest[2]}) + 1;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = "row " + std::to_string(table.row_lines[r]);
        if (row.size() < needed) {
            index.skipped.push_back({where, "expected at least " + std::to_string(needed) + " fields"});
            continue;
        }
        const std::string file(text::trim(row[cols.file]));
        if (file.empty()) {
            index.skipped.push_back({where, "empty file field"});
            continue;
        }
        auto decode = [&](std::string_view cell, const Taxonomy& t, const char* column) {
            std::string_view v = text::trim(cell);
            if (auto it = fairface_encoding().find(v); it != fairface_encoding().end()) v = it->second;
            auto i = t.index_of(v);
            if (!i) {
                throw Error(ErrorCode::UnknownCategory,
                            where + " (" + file + "): " + column + " '" + std::string(text::trim(cell)) + "'");
            }
            return *i;
        };
        const std::size_t age = decode(row[cols.rest[0]], *tax.age_bins, "age");
        const std::size_t gender = decode(row[cols.rest[1]], *tax.gender, "gender");
        const std::size_t race = decode(row[cols.rest[2]], *tax.race, "race");

        const fs::path image = image_in(image_dir, file);
        if (!fs::is_regular_file(image)) throw Error(ErrorCode::MissingImage, where + ": " + image.string());
        if (!seen.insert(file).second) {
            index.skipped.push_back({where, "duplicate file " + file});
            continue;
        }
        Sample s;
        s.id = file;
        s.image_path = image;
        s.dataset = DatasetId::Fairface;
        s.truth_age = BinIndex{age};
        s.truth_gender = gender == 0 ? Gender::Male : Gender::Female;
        s.truth_race = race;
        index.samples.push_back(std::move(s));
    }
    if (index.samples.empty()) throw Error(ErrorCode::EmptyDataset, labels_csv.string() + " yielded no samples");
    finish(index);
    return index;
}

DatasetIndex index_cacd(const fs::path& metadata_csv, const fs::path& image_dir) {
    if (!fs::exists(metadata_csv)) throw Error(ErrorCode::DatasetMissing, metadata_csv.string() + " not found");
    const CsvTable table = read_csv(metadata_csv);
    if (table.rows.empty()) throw Error(ErrorCode::EmptyDataset, metadata_csv.string() + " has no rows");
    const auto cols = require_columns(table, metadata_csv, {"file", "age"});
    const auto& range = *taxonomies_for(DatasetId::Cacd).age_range;

    DatasetIndex index;
    index.id = DatasetId::Cacd;
    index.image_root = image_dir;
    std::set<std::string> seen;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = "row " + std::to_string(table.row_lines[r]);
        if (row.size() <= std::max(cols.file, cols.rest[0])) {
            index.skipped.push_back({where, "expected file,age"});
            continue;
        }
        const std::string file(text::trim(row[cols.file]));
        const auto age = parse_uint(row[cols.rest[0]]);
        if (file.empty() || !age) {
            index.skipped.push_back({where, "malformed file or age"});
            continue;
        }
        if (!range.contains(*age)) {
            index.skipped.push_back({where + " (" + file + ")", "age " + std::to_string(*age) + " outside [" +
                                                                   std::to_string(range.lower) + ", " +
                                                                   std::to_string(range.upper) + "]"});
            continue;
        }
        const fs::path image = image_in(image_dir, file);
        if (!fs::is_regular_file(image)) throw Error(ErrorCode::MissingImage, where + ": " + image.string());
        if (!seen.insert(file).second) {
            index.skipped.push_back({where, "duplicate file " + file});
            continue;
        }
        Sample s;
        s.id = file;
        s.image_path = image;
        s.dataset = DatasetId::Cacd;
        s.truth_age = Years{*age};
        index.samples.push_back(std::move(s));
    }
    if (index.samples.empty()) throw Error(ErrorCode::EmptyDataset, metadata_csv.string() + " yielded no samples");
    finish(index);
    return index;
}

DatasetIndex index_dataset(DatasetId id, const fs::path& root, const fs::path& labels) {
    switch (id) {
        case DatasetId::Utkface: return index_utkface(root);
        case DatasetId::Fairface: return index_fairface(labels, root);
        case DatasetId::Cacd: return index_cacd(labels, root);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown dataset");
}

std::vector<Sample> select_eval_set(const DatasetIndex& index, std::size_t n, std::uint64_t seed) {
    if (n > index.samples.size()) {
        throw Error(ErrorCode::TooLarge, "requested " + std::to_string(n) + " samples from an index of " +
                                             std::to_string(index.samples.size()));
    }
    // The engine's output sequence is fixed by the standard; the bounded draw
    // and shuffle are done here so the permutation is identical on every platform.
    std::uint64_t digest_word = 0;
    const std::string_view head = std::string_view(index.manifest_digest).substr(0, 16);
    std::from_chars(head.data(), head.data() + head.size(), digest_word, 16);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(digest_word), static_cast<std::uint32_t>(digest_word >> 32)};
    std::mt19937_64 rng(seq);
    auto bounded = [&rng](std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const std::uint64_t r = rng();
            if (r >= threshold) return r % bound;
        }
    };

    std::vector<std::size_t> order(index.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[bounded(i)]);
    }
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(index.samples[order[i]]);
    return out;
}

void write_index_manifest(const DatasetIndex& index, const fs::path& path) {
    const auto& tax = taxonomies_for(index.id);
    json doc;
    doc["format"] = "demoscope-index-v1";
    doc["dataset"] = to_string(index.id);
    doc["image_root"] = fs::absolute(index.image_root).lexically_normal().generic_string();
    doc["manifest_digest"] = index.manifest_digest;
    json samples = json::array();
    for (const auto& s : index.samples) {
        json js;
        js["id"] = s.id;
        js["image"] = relative_ref(s.image_path, index.image_root);
        for (auto kind : kAllAttributes) {
            if (auto v = s.truth(kind)) js[std::string(to_string(kind))] = label_display(*v, tax);
        }
        samples.push_back(std::move(js));
    }
    doc["samples"] = std::move(samples);
    json skipped = json::array();
    for (const auto& sk : index.skipped) skipped.push_back({{"ref", sk.ref}, {"reason", sk.reason}});
    doc["skipped"] = std::move(skipped);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

DatasetIndex read_index_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::DatasetMissing, "cannot open index " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, path.string() + ": " + e.what());
    }
    try {
        DatasetIndex index;
        auto id = dataset_from_string(doc.at("dataset").get<std::string>());
        if (!id) throw Error(ErrorCode::Decode, path.string() + ": unknown dataset");
        index.id = *id;
        index.image_root = doc.at("image_root").get<std::string>();
        const auto& tax = taxonomies_for(index.id);
        for (const auto& js : doc.at("samples")) {
            Sample s;
            s.id = js.at("id").get<std::string>();
            s.image_path = (index.image_root / js.at("image").get<std::string>()).lexically_normal();
            s.dataset = index.id;
            for (auto kind : kAllAttributes) {
                const std::string key(to_string(kind));
                if (!js.contains(key)) continue;
                auto v = label_from_display(js.at(key).get<std::string>(), kind, tax);
                if (!v) throw Error(ErrorCode::UnknownCategory, path.string() + ": sample " + s.id + " " + key);
                if (auto* y = std::get_if<Years>(&*v)) s.truth_age = *y;
                else if (auto* b = std::get_if<BinIndex>(&*v)) s.truth_age = *b;
                else if (auto* g = std::get_if<Gender>(&*v)) s.truth_gender = *g;
                else s.truth_race = std::get<CategoryIndex>(*v).value;
            }
            index.samples.push_back(std::move(s));
        }
        for (const auto& sk : doc.at("skipped")) {
            index.skipped.push_back({sk.at("ref").get<std::string>(), sk.at("reason").get<std::string>()});
        }
        finish(index);
        if (index.manifest_digest != doc.at("manifest_digest").get<std::string>()) {
            throw Error(ErrorCode::Decode, path.string() + ": manifest digest does not match its samples");
        }
        return index;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, path.string() + ": " + e.what());
    }
}

std::string skip_report_text(const DatasetIndex& index) {
    std::ostringstream out;
    out << "# " << to_string(index.id) << ": " << index.samples.size() << " indexed, " << index.skipped.size()
        << " skipped\n";
    for (const auto& sk : index.skipped) out << sk.ref << '\t' << sk.reason << '\n';
    return out.str();
}

std::map<AttributeKind, std::vector<std::pair<std::string, std::size_t>>> label_histograms(const DatasetIndex& index) {
    const auto& tax = taxonomies_for(index.id);
    std::map<AttributeKind, std::vector<std::pair<std::string, std::size_t>>> out;
    for (auto kind : tax.kinds()) {
        auto& hist = out[kind];
        if (const Taxonomy* t = tax.taxonomy_for(kind)) {
            for (const auto& c : t->categories()) hist.emplace_back(c, 0);
        } else if (kind == AttributeKind::Age) {
            for (int decade = 0; decade <= kMaxAgeYears; decade += 10) {
                hist.emplace_back(std::to_string(decade) + "-" + std::to_string(decade + 9), 0);
            }
        }
        for (const auto& s : index.samples) {
            auto v = s.truth(kind);
            if (!v) continue;
            std::size_t slot = 0;
            if (auto* y = std::get_if<Years>(&*v)) slot = static_cast<std::size_t>(y->value / 10);
            else if (auto* b = std::get_if<BinIndex>(&*v)) slot = b->value;
            else if (auto* g = std::get_if<Gender>(&*v)) slot = static_cast<std::size_t>(*g);
            else slot = std::get<CategoryIndex>(*v).value;
            if (slot < hist.size()) ++hist[slot].second;
        }
        if (kind == AttributeKind::Age && !tax.age_bins) {
            std::erase_if(hist, [](const auto& p) { return p.second == 0; });
        }
    }
    return out;
}

}  // namespace demoscope
