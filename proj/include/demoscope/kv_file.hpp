#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace demoscope {

/// A small TOML-like key/value dialect shared by run configs and template sets.
///
///   # comment
///   key = "basic string with \n escapes"
///   text = """
///   multiline literal, first newline after the opening quotes is dropped
///   """
///   count = 10
///   ratio = 0.5
///   flag = true
///   [section]            # later keys become "section.key"
///
/// Keys are case-sensitive; duplicate keys are an error.
class KvFile {
public:
    using Value = std::variant<std::string, long long, double, bool>;

    static KvFile parse(std::string_view source, std::string_view origin = "<memory>");
    static KvFile load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, Value>& values() const { return values_; }

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;
    std::optional<double> get_number(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;

    /// Canonical serialization (sorted keys), used for digests.
    std::string canonical() const;

    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, Value> values_;
    std::string origin_;
};

}  // namespace demoscope
