#include "demoscope/parsing.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <vector>

#include "demoscope/text.hpp"

namespace demoscope {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

/// Lowercased, whitespace-collapsed, with typographic dashes and quotes folded to ASCII.
std::string prepare(std::string_view raw) {
    std::string s(raw);
    s = text::replace_all(std::move(s), "\xE2\x80\x93", "-");  // en dash
    s = text::replace_all(std::move(s), "\xE2\x80\x94", "-");  // em dash
    s = text::replace_all(std::move(s), "\xE2\x80\x99", "'");  // right single quote
    return text::normalize(s);
}

constexpr std::array<std::string_view, 17> kRefusalPhrases{
    "sorry",       "cannot",     "can't",       "can not",   "unable",       "not able to",
    "not possible", "impossible", "don't know",  "do not know", "as an ai",   "not appropriate",
    "i won't",     "i will not", "decline",     "refuse",    "not comfortable"};

constexpr std::array<std::string_view, 14> kRefusalOpeners{
    "i'm sorry",  "i am sorry", "sorry",       "i apologize", "i cannot",    "i can't",   "i can not",
    "i'm unable", "i am unable", "unable to", "as an ai",    "i won't",     "i will not", "i'm not able"};

struct DecadeWord {
    std::string_view word;
    int midpoint;
};

constexpr std::array<DecadeWord, 8> kDecadeWords{{{"twenties", 25},
                                                  {"thirties", 35},
                                                  {"forties", 45},
                                                  {"fifties", 55},
                                                  {"sixties", 65},
                                                  {"seventies", 75},
                                                  {"eighties", 85},
                                                  {"nineties", 95}}};

struct NumberToken {
    double value = 0;
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last digit
};

/// Number starting at `i` (digits with an optional fractional part) with a
/// non-alphanumeric character before it.
std::optional<NumberToken> number_at(const std::string& s, std::size_t i) {
    if (!is_digit(s[i])) return std::nullopt;
    if (i > 0 && (is_alnum(s[i - 1]) || s[i - 1] == '.')) return std::nullopt;
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
        ++j;
        while (j < s.size() && is_digit(s[j])) ++j;
    }
    NumberToken tok;
    tok.begin = i;
    tok.end = j;
    auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, tok.value);
    if (ec != std::errc()) return std::nullopt;
    return tok;
}

/// Letters directly after a number; returns the suffix word.
std::string_view suffix_after(const std::string& s, std::size_t end) {
    std::size_t j = end;
    while (j < s.size() && is_alpha(s[j])) ++j;
    return std::string_view(s).substr(end, j - end);
}

bool in_age_span(double v) { return v >= 0 && v <= kMaxAgeYears + 0.5 && text::round_half_away(v) <= kMaxAgeYears; }

bool acceptable_suffix(std::string_view suffix) {
    static const std::set<std::string_view> kOk = {"", "y", "yo", "yr", "yrs", "years", "year"};
    return kOk.count(suffix) != 0;
}

/// "A-B", "A to B", "A and B" (after "between") starting right after `first`.
std::optional<NumberToken> range_partner(const std::string& s, const NumberToken& first, bool after_between) {
    std::size_t j = first.end;
    auto skip_spaces = [&] {
        while (j < s.size() && s[j] == ' ') ++j;
    };
    skip_spaces();
    if (j < s.size() && s[j] == '-') {
        ++j;
    } else if (s.compare(j, 3, "to ") == 0) {
        j += 3;
    } else if (after_between && s.compare(j, 4, "and ") == 0) {
        j += 4;
    } else {
        return std::nullopt;
    }
    skip_spaces();
    if (j >= s.size() || !is_digit(s[j])) return std::nullopt;
    // number_at requires a non-alnum predecessor; '-' and ' ' both qualify.
    return number_at(s, j);
}

bool preceded_by_between(const std::string& s, std::size_t begin) {
    constexpr std::string_view kBetween = "between ";
    return begin >= kBetween.size() && std::string_view(s).substr(begin - kBetween.size(), kBetween.size()) == kBetween;
}

bool word_boundary_at(const std::string& s, std::size_t begin, std::size_t len) {
    const bool left = begin == 0 || !is_alnum(s[begin - 1]);
    const bool right = begin + len >= s.size() || !is_alnum(s[begin + len]);
    return left && right;
}

// Whole-word tokenization on [a-z0-9]+ runs.
std::vector<std::string> words_of(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct Match {
    std::size_t begin;
    std::size_t end;
    std::size_t index;
    SynonymStrength strength;
};

/// Drops matches whose span lies strictly inside a longer match.
std::vector<Match> drop_contained(const std::vector<Match>& matches) {
    std::vector<Match> kept;
    for (const auto& m : matches) {
        const bool inside = std::any_of(matches.begin(), matches.end(), [&](const Match& o) {
            return o.begin <= m.begin && m.end <= o.end && (o.end - o.begin) > (m.end - m.begin);
        });
        if (!inside) kept.push_back(m);
    }
    return kept;
}

ParseOutcome<std::size_t> decide(const std::vector<Match>& all, std::size_t whole_begin, std::size_t whole_end) {
    std::vector<Match> matches = drop_contained(all);
    const bool any_strong = std::any_of(matches.begin(), matches.end(),
                                        [](const Match& m) { return m.strength == SynonymStrength::Strong; });
    if (any_strong) {
        std::erase_if(matches, [](const Match& m) { return m.strength != SynonymStrength::Strong; });
    }
    std::set<std::size_t> distinct;
    for (const auto& m : matches) distinct.insert(m.index);
    if (distinct.empty()) return ParseOutcome<std::size_t>::off_target(OffTargetReason::NoMatch);
    if (distinct.size() == 1) return ParseOutcome<std::size_t>::of(*distinct.begin());

    std::set<std::size_t> whole;
    for (const auto& m : matches) {
        if (m.begin == whole_begin && m.end == whole_end) whole.insert(m.index);
    }
    if (whole.size() == 1) return ParseOutcome<std::size_t>::of(*whole.begin());
    return ParseOutcome<std::size_t>::off_target(OffTargetReason::Ambiguous);
}

}  // namespace

bool contains_refusal(std::string_view raw) {
    const std::string s = prepare(raw);
    return std::any_of(kRefusalPhrases.begin(), kRefusalPhrases.end(), [&](std::string_view p) {
        for (std::size_t pos = s.find(p); pos != std::string::npos; pos = s.find(p, pos + 1)) {
            if (word_boundary_at(s, pos, p.size())) return true;
        }
        return false;
    });
}

bool opens_with_refusal(std::string_view raw) {
    const std::string s = prepare(raw);
    return std::any_of(kRefusalOpeners.begin(), kRefusalOpeners.end(),
                       [&](std::string_view p) { return text::starts_with_word(s, p); });
}

ParseOutcome<Years> parse_age_years(std::string_view raw) {
    using Out = ParseOutcome<Years>;
    const std::string s = prepare(raw);
    if (s.empty()) return Out::off_target(OffTargetReason::Empty);

    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_alpha(s[i]) && (i == 0 || !is_alnum(s[i - 1]))) {
            for (const auto& d : kDecadeWords) {
                if (s.compare(i, d.word.size(), d.word) == 0 && word_boundary_at(s, i, d.word.size())) {
                    return Out::of(Years{d.midpoint});
                }
            }
            continue;
        }
        auto tok = number_at(s, i);
        if (!tok) continue;
        i = tok->end - 1;

        if (auto partner = range_partner(s, *tok, preceded_by_between(s, tok->begin))) {
            if (in_age_span(tok->value) && in_age_span(partner->value) && tok->value <= partner->value &&
                acceptable_suffix(suffix_after(s, partner->end))) {
                return Out::of(Years{static_cast<int>(text::round_half_away((tok->value + partner->value) / 2.0))});
            }
        }
        if (tok->end < s.size() && s[tok->end] == '%') continue;

        std::string_view suffix = suffix_after(s, tok->end);
        const bool apostrophe_s = suffix.empty() && s.compare(tok->end, 2, "'s") == 0 &&
                                  (tok->end + 2 >= s.size() || !is_alnum(s[tok->end + 2]));
        if (suffix == "s" || apostrophe_s) {
            const double v = tok->value;
            if (v >= 10 && v <= 120 && std::fmod(v, 10.0) == 0.0) return Out::of(Years{static_cast<int>(v) + 5});
            continue;
        }
        if (!acceptable_suffix(suffix)) continue;
        if (!in_age_span(tok->value)) continue;
        return Out::of(Years{static_cast<int>(text::round_half_away(tok->value))});
    }
    return Out::off_target(contains_refusal(s) ? OffTargetReason::Refusal : OffTargetReason::NoMatch);
}

ParseOutcome<std::size_t> parse_category(std::string_view raw, const Taxonomy& taxonomy) {
    using Out = ParseOutcome<std::size_t>;
    const std::string s = prepare(raw);
    if (s.empty()) return Out::off_target(OffTargetReason::Empty);
    const auto words = words_of(s);

    std::vector<Match> matches;
    for (const auto& alias : taxonomy.aliases()) {
        const auto pattern = words_of(alias.alias);
        if (pattern.empty() || pattern.size() > words.size()) continue;
        for (std::size_t i = 0; i + pattern.size() <= words.size(); ++i) {
            if (std::equal(pattern.begin(), pattern.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
                matches.push_back({i, i + pattern.size(), alias.index, alias.strength});
            }
        }
    }
    auto out = decide(matches, 0, words.size());
    if (!out.on_target() && out.reason == OffTargetReason::NoMatch && contains_refusal(s)) {
        return Out::off_target(OffTargetReason::Refusal);
    }
    return out;
}

ParseOutcome<std::size_t> parse_bin(std::string_view raw, const Taxonomy& taxonomy) {
    using Out = ParseOutcome<std::size_t>;
    const std::string s = prepare(raw);
    if (s.empty()) return Out::off_target(OffTargetReason::Empty);

    // Labels such as "20-29" or "70+" are matched as substrings bounded by non-digits.
    std::vector<Match> matches;
    for (const auto& alias : taxonomy.aliases()) {
        const std::string& a = alias.alias;
        for (std::size_t pos = s.find(a); pos != std::string::npos; pos = s.find(a, pos + 1)) {
            const bool left_ok = pos == 0 || !is_alnum(s[pos - 1]);
            const std::size_t end = pos + a.size();
            const bool right_ok = end >= s.size() || !is_alnum(s[end]) || !is_alnum(a.back());
            if (left_ok && right_ok) matches.push_back({pos, end, alias.index, alias.strength});
        }
    }
    if (!matches.empty()) {
        auto out = decide(matches, 0, s.size());
        if (out.on_target() || out.reason == OffTargetReason::Ambiguous) return out;
    }

    auto years = parse_age_years(s);
    if (!years.on_target()) return Out::off_target(years.reason);
    return Out::of(bin_of(years.value->value, taxonomy));
}

ParseOutcome<LabelValue> parse_attribute(std::string_view text, AttributeKind kind, const DatasetTaxonomies& tax) {
    using Out = ParseOutcome<LabelValue>;
    auto lift = [](const auto& outcome, auto wrap) {
        if (!outcome.on_target()) return Out::off_target(outcome.reason);
        return Out::of(wrap(*outcome.value));
    };
    switch (kind) {
        case AttributeKind::Age:
            if (tax.age_bins) {
                return lift(parse_bin(text, *tax.age_bins), [](std::size_t i) { return LabelValue{BinIndex{i}}; });
            }
            return lift(parse_age_years(text), [](Years y) { return LabelValue{y}; });
        case AttributeKind::Gender:
            return lift(parse_category(text, *tax.gender),
                        [](std::size_t i) { return LabelValue{i == 0 ? Gender::Male : Gender::Female}; });
        case AttributeKind::Race:
            return lift(parse_category(text, *tax.race), [](std::size_t i) { return LabelValue{CategoryIndex{i}}; });
    }
    return Out::off_target(OffTargetReason::NoMatch);
}

ParseOutcome<std::string> check_free_text(std::string_view raw) {
    const auto trimmed = text::trim(raw);
    if (trimmed.empty()) return ParseOutcome<std::string>::off_target(OffTargetReason::Empty);
    if (opens_with_refusal(trimmed)) return ParseOutcome<std::string>::off_target(OffTargetReason::Refusal);
    return ParseOutcome<std::string>::of(std::string(trimmed));
}

}  // namespace demoscope
