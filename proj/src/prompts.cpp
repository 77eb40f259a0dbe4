#include "demoscope/prompts.hpp"

#include <set>

#include "demoscope/digest.hpp"
#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

namespace {

const std::set<std::string>& known_template_keys() {
    static const std::set<std::string> keys = {"macro",          "ffc",       "name",      "constraint",
                                               "cot.age",        "cot.age_binned", "cot.gender", "cot.race",
                                               "naive.age",      "naive.age_binned", "naive.gender", "naive.race"};
    return keys;
}

const std::set<std::string>& known_placeholders() {
    static const std::set<std::string> names = {"DESCRIPTION", "CATEGORIES", "RANGE"};
    return names;
}

struct Placeholder {
    std::size_t pos;
    std::size_t len;
    std::string name;
};

/// `{NAME}` tokens where NAME is [A-Z_]+.
std::vector<Placeholder> find_placeholders(std::string_view tmpl) {
    std::vector<Placeholder> out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < tmpl.size() && ((tmpl[j] >= 'A' && tmpl[j] <= 'Z') || tmpl[j] == '_')) ++j;
        if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
            out.push_back({i, j - i + 1, std::string(tmpl.substr(i + 1, j - i - 1))});
            i = j;
        }
    }
    return out;
}

bool mentions(std::string_view tmpl, std::string_view name) {
    for (const auto& p : find_placeholders(tmpl)) {
        if (p.name == name) return true;
    }
    return false;
}

/// Single pass: substituted values are never rescanned, so model text that
/// happens to contain braces is inserted verbatim.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values,
                       std::string_view template_key) {
    std::string out;
    std::size_t last = 0;
    for (const auto& p : find_placeholders(tmpl)) {
        auto it = values.find(p.name);
        if (it == values.end()) {
            throw Error(ErrorCode::UnresolvedPlaceholder,
                        "{" + p.name + "} in template '" + std::string(template_key) + "'");
        }
        out.append(tmpl.substr(last, p.pos - last));
        out.append(it->second);
        last = p.pos + p.len;
    }
    out.append(tmpl.substr(last));
    return out;
}

std::string join_parts(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto part : parts) {
        part = text::trim(part);
        if (part.empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += part;
    }
    return out;
}

std::string attribute_key(AttributeKind kind, Mode mode, bool binned) {
    std::string key = mode == Mode::Cot ? "cot." : "naive.";
    key += to_string(kind);
    if (kind == AttributeKind::Age && binned) key += "_binned";
    return key;
}

}  // namespace

TemplateSet::TemplateSet(std::map<std::string, std::string> templates) : templates_(std::move(templates)) {}

TemplateSet TemplateSet::from_kv(const KvFile& kv) {
    std::map<std::string, std::string> templates;
    for (const auto& [key, value] : kv.values()) {
        if (!known_template_keys().count(key)) {
            throw Error(ErrorCode::ConfigInvalid, kv.origin() + ": unknown template key '" + key + "'");
        }
        const auto* s = std::get_if<std::string>(&value);
        if (!s) throw Error(ErrorCode::ConfigInvalid, kv.origin() + ": template '" + key + "' must be a string");
        templates.emplace(key, *s);
    }
    return TemplateSet(std::move(templates));
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
    TemplateSet set = from_kv(KvFile::load(path));
    if (auto p = set.problems(); !p.empty()) {
        throw Error(ErrorCode::UnresolvedPlaceholder, path.string() + ": " + text::join(p, "; "));
    }
    return set;
}

const std::string& TemplateSet::get(const std::string& key) const {
    auto it = templates_.find(key);
    if (it == templates_.end()) throw Error(ErrorCode::MissingTemplate, "template '" + key + "' is not defined");
    return it->second;
}

std::vector<std::string> TemplateSet::problems() const {
    std::vector<std::string> out;
    for (const auto& [key, tmpl] : templates_) {
        for (const auto& p : find_placeholders(tmpl)) {
            if (!known_placeholders().count(p.name)) out.push_back(key + ": unknown placeholder {" + p.name + "}");
        }
        const bool attribute = key.starts_with("cot.") || key.starts_with("naive.");
        if (!attribute) {
            for (const auto& p : find_placeholders(tmpl)) {
                if (known_placeholders().count(p.name)) out.push_back(key + ": {" + p.name + "} not allowed here");
            }
            continue;
        }
        const bool continuous_age = key.ends_with(".age");
        if (continuous_age && !mentions(tmpl, "RANGE")) out.push_back(key + ": must contain {RANGE}");
        if (!continuous_age && !mentions(tmpl, "CATEGORIES")) out.push_back(key + ": must contain {CATEGORIES}");
        if (key.starts_with("naive.") && mentions(tmpl, "DESCRIPTION")) {
            out.push_back(key + ": naive prompts take no {DESCRIPTION}");
        }
    }
    return out;
}

std::string TemplateSet::digest() const {
    std::string canonical;
    for (const auto& [key, tmpl] : templates_) {
        canonical += key + "=" + std::to_string(tmpl.size()) + ":" + tmpl + "\n";
    }
    return sha256_hex(canonical);
}

std::string render_ffc(const TemplateSet& set) {
    const std::string macro = set.has("macro") ? substitute(set.get("macro"), {}, "macro") : std::string();
    const std::string body = substitute(set.get("ffc"), {}, "ffc");
    return join_parts({macro, body});
}

std::string render_name(const TemplateSet& set) {
    const std::string macro = set.has("macro") ? substitute(set.get("macro"), {}, "macro") : std::string();
    const std::string body = substitute(set.get("name"), {}, "name");
    return join_parts({macro, body});
}

std::string compose_description(std::string_view ffc_text, std::string_view name_text) {
    const auto ffc = text::trim(ffc_text);
    const auto name = text::trim(name_text);
    if (ffc.empty()) throw Error(ErrorCode::EmptyInput, "facial feature text is blank");
    if (name.empty()) throw Error(ErrorCode::EmptyInput, "name text is blank");
    std::string out = "Facial features:\n";
    out += ffc;
    out += "\n\nSuggested name:\n";
    out += name;
    return out;
}

std::string format_range(const AgeRange& range) {
    return "between " + std::to_string(range.lower) + " and " + std::to_string(range.upper);
}

std::string format_categories(const Taxonomy& taxonomy) {
    std::vector<std::string> parts(taxonomy.categories().begin(), taxonomy.categories().end());
    return text::join(parts, ", ");
}

std::string render_attribute(const TemplateSet& set, AttributeKind kind, Mode mode,
                             const std::optional<std::string>& description, const AttributeTarget& target) {
    if (mode == Mode::Cot && !description) {
        throw Error(ErrorCode::MissingDescription, std::string(to_string(kind)) + " prompt in cot mode");
    }
    const Taxonomy* const* taxonomy = std::get_if<const Taxonomy*>(&target);
    const bool binned = taxonomy && *taxonomy && (*taxonomy)->has_bins();
    const std::string key = attribute_key(kind, mode, binned);
    const std::string& tmpl = set.get(key);

    std::map<std::string, std::string> values;
    if (taxonomy) {
        if (!*taxonomy) throw Error(ErrorCode::InvalidArgument, key + ": null taxonomy");
        values["CATEGORIES"] = format_categories(**taxonomy);
    } else {
        values["RANGE"] = format_range(std::get<AgeRange>(target));
    }
    std::string preamble;
    if (mode == Mode::Cot) {
        if (mentions(tmpl, "DESCRIPTION")) values["DESCRIPTION"] = *description;
        else preamble = *description;
    }
    const std::string question = substitute(tmpl, values, key);
    const std::string constraint = set.has("constraint") ? substitute(set.get("constraint"), {}, "constraint") : "";
    if (!preamble.empty()) {
        // D must appear byte-for-byte, so it is not trimmed by join_parts.
        return preamble + "\n\n" + join_parts({question, constraint});
    }
    return join_parts({question, constraint});
}

}  // namespace demoscope
