#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "demoscope/core.hpp"

namespace demoscope {

/// A record that could not be indexed, with the reason. Never silently dropped.
struct SkipEntry {
    std::string ref;
    std::string reason;
};

struct DatasetIndex {
    DatasetId id = DatasetId::Utkface;
    std::filesystem::path image_root;
    /// Sorted by id; ids unique.
    std::vector<Sample> samples;
    std::vector<SkipEntry> skipped;
    /// SHA-256 over the dataset id and every sample's id, relative image path and labels.
    std::string manifest_digest;
};

/// Flat directory of `[age]_[gender]_[race]_[timestamp].ext` images.
DatasetIndex index_utkface(const std::filesystem::path& root_dir);
/// CSV with header columns file, age (bin string), gender, race; file is relative to image_dir.
DatasetIndex index_fairface(const std::filesystem::path& labels_csv, const std::filesystem::path& image_dir);
/// Two-column CSV `file,age`.
DatasetIndex index_cacd(const std::filesystem::path& metadata_csv, const std::filesystem::path& image_dir);

DatasetIndex index_dataset(DatasetId id, const std::filesystem::path& root, const std::filesystem::path& labels);

std::string compute_index_digest(DatasetId id, const std::filesystem::path& image_root,
                                 const std::vector<Sample>& samples);

/// Deterministic pseudo-random subset: identical (digest, n, seed) gives the
/// identical subset in the identical order. Throws TooLarge when n > size.
std::vector<Sample> select_eval_set(const DatasetIndex& index, std::size_t n, std::uint64_t seed);

void write_index_manifest(const DatasetIndex& index, const std::filesystem::path& path);
/// Reloads a manifest written by write_index_manifest and verifies its digest.
DatasetIndex read_index_manifest(const std::filesystem::path& path);

std::string skip_report_text(const DatasetIndex& index);

/// Label counts per attribute in taxonomy order (continuous ages by decade).
std::map<AttributeKind, std::vector<std::pair<std::string, std::size_t>>> label_histograms(const DatasetIndex& index);

}  // namespace demoscope
