#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "demoscope/parsing.hpp"
#include "demoscope/synonyms.hpp"
#include "demoscope/text.hpp"
#include "support.hpp"

using namespace demoscope;

namespace {

const DatasetTaxonomies& tax(DatasetId id) {
    static const std::map<DatasetId, DatasetTaxonomies> all = [] {
        std::map<DatasetId, DatasetTaxonomies> m;
        for (auto d : {DatasetId::Utkface, DatasetId::Fairface, DatasetId::Cacd}) {
            m.emplace(d, load_taxonomies(d, default_synonyms_path()));
        }
        return m;
    }();
    return all.at(id);
}

int years(std::string_view s) {
    auto r = parse_age_years(s);
    REQUIRE_MESSAGE(r.on_target(), s);
    return r.value->value;
}

OffTargetReason age_reason(std::string_view s) {
    auto r = parse_age_years(s);
    REQUIRE_MESSAGE(!r.on_target(), s);
    return r.reason;
}

/// Random reply-like text from a small vocabulary.
std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> vocab = {
        "the", "person", "is", "about", "25", "years", "old", "White", "black", "Asian", "man", "woman", "he", "she",
        "maybe", "or", "30s", "between", "40", "and", "50", "-", "cannot", "tell", "East", "Latino", "70+", "20-29",
        "!", ",", "Indian", "Others", "107", "3.5", "to", "Female", "male", "%", "Hispanic", "Southeast"};
    std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, vocab.size() - 1);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += vocab[pick(rng)];
    }
    return out;
}

/// Same text with randomly changed letter case and whitespace runs.
std::string perturb(const std::string& s, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    std::string out = coin(rng) ? "  " : "";
    for (char c : s) {
        if (c == ' ') {
            out += coin(rng) ? "  \t" : " ";
        } else if (std::isalpha(static_cast<unsigned char>(c)) && coin(rng)) {
            out += static_cast<char>(std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c) : std::toupper(c));
        } else {
            out += c;
        }
    }
    return out + (coin(rng) ? "\n" : "");
}

}  // namespace

TEST_SUITE("parsing") {

TEST_CASE("age examples") {
    CHECK(years("25") == 25);
    CHECK(years("The person appears to be around 30 years old.") == 30);
    CHECK(age_reason("I'm sorry, I cannot determine the age.") == OffTargetReason::Refusal);
    CHECK(years("25-30") == 28);
    CHECK(years("25 to 30") == 28);
    CHECK(years("between 40 and 45") == 43);
    CHECK(years("in his 30s") == 35);
    CHECK(years("in her 30's") == 35);
    CHECK(years("thirties") == 35);
    CHECK(years("27.5") == 28);
    CHECK(years("130") == 130);
    CHECK(age_reason("") == OffTargetReason::Empty);
    CHECK(age_reason(" \n\t") == OffTargetReason::Empty);
    CHECK(age_reason("young adult") == OffTargetReason::NoMatch);
    CHECK(age_reason("150") == OffTargetReason::NoMatch);
    CHECK(years("I'm not sure, but maybe 40") == 40);
}

TEST_CASE("age parser takes the first construct in reading order") {
    CHECK(years("25 or maybe 30") == 25);
    CHECK(years("95% sure: 33") == 33);
    CHECK(years("1990s photo of a 40 year old") == 40);  // decade word outside age span is skipped
}

TEST_CASE("category examples") {
    const auto& utk = tax(DatasetId::Utkface);
    CHECK(parse_category("Female", *utk.gender).value == 1u);
    CHECK(parse_category("The individual appears to be Caucasian.", *utk.race).value == 0u);
    CHECK(parse_category("could be White or Black", *utk.race).reason == OffTargetReason::Ambiguous);
    CHECK(parse_category("could be White or Black", *utk.race).value == std::nullopt);
    CHECK(parse_category("", *utk.race).reason == OffTargetReason::Empty);
    CHECK(parse_category("unknown", *utk.race).reason == OffTargetReason::NoMatch);
    CHECK(parse_category("I cannot say", *utk.race).reason == OffTargetReason::Refusal);
}

TEST_CASE("explicit gender words outrank pronouns") {
    const auto& g = *tax(DatasetId::Utkface).gender;
    CHECK(parse_category("She looks like a man", g).value == 0u);
    CHECK(parse_category("He is a woman", g).value == 1u);
    CHECK(parse_category("she", g).value == 1u);
    CHECK(parse_category("he or she", g).reason == OffTargetReason::Ambiguous);
    CHECK(parse_category("female", g).value == 1u);  // "male" is not a word inside "female"
}

TEST_CASE("a longer match wins over the match it contains") {
    const Taxonomy t("t", {"Black", "Black Asian"});
    CHECK(parse_category("Black Asian", t).value == 1u);
    CHECK(parse_category("probably black asian", t).value == 1u);
    CHECK(parse_category("black, or asian", t).value == 0u);
}

TEST_CASE("bin examples") {
    const auto& bins = *tax(DatasetId::Fairface).age_bins;
    CHECK(parse_bin("20-29", bins).value == 3u);
    CHECK(parse_bin("about 25 years old", bins).value == 3u);
    CHECK(parse_bin("young adult", bins).reason == OffTargetReason::NoMatch);
    CHECK(parse_bin("70+", bins).value == 8u);
    CHECK(parse_bin("age group 3-9", bins).value == 1u);
    CHECK(parse_bin("", bins).reason == OffTargetReason::Empty);
}

TEST_CASE("free-text steps") {
    CHECK(check_free_text("Gray hair, deep wrinkles.").on_target());
    CHECK(check_free_text("   ").reason == OffTargetReason::Empty);
    CHECK(check_free_text("I'm sorry, but I can't describe people.").reason == OffTargetReason::Refusal);
    CHECK(check_free_text("The person is not smiling; I cannot see teeth.").on_target());
}

TEST_CASE("shipped parser corpus parses at full agreement") {
    const auto cases = testsupport::load_parser_corpus();
    CHECK(cases.size() >= 60);
    std::set<DatasetId> datasets;
    std::set<std::string> reasons;
    for (const auto& c : cases) {
        CHECK_MESSAGE(testsupport::corpus_verdict(c, tax(c.dataset)) == c.expected,
                      "line " << c.line << ": '" << c.response << "'");
        datasets.insert(c.dataset);
        if (c.expected.starts_with("off_target:")) reasons.insert(c.expected);
    }
    CHECK(datasets.size() == 3);
    CHECK(reasons == std::set<std::string>{"off_target:ambiguous", "off_target:empty", "off_target:no_match",
                                           "off_target:refusal"});
}

TEST_CASE("every display string parses back to its own category") {
    for (auto id : {DatasetId::Utkface, DatasetId::Fairface, DatasetId::Cacd}) {
        const auto& t = tax(id);
        for (auto kind : t.kinds()) {
            const Taxonomy* tx = t.taxonomy_for(kind);
            if (!tx) continue;
            for (std::size_t i = 0; i < tx->size(); ++i) {
                const auto& name = tx->category(i);
                if (tx->has_bins()) {
                    CHECK_MESSAGE(parse_bin(name, *tx).value == i, name);
                } else {
                    CHECK_MESSAGE(parse_category(name, *tx).value == i, name);
                    CHECK_MESSAGE(parse_category(text::to_lower(name), *tx).value == i, name);
                }
            }
        }
    }
}

TEST_CASE("random texts: indices stay in range and parsing ignores case and spacing") {
    std::mt19937_64 rng(20240611);
    const auto& utk = tax(DatasetId::Utkface);
    const auto& ff = tax(DatasetId::Fairface);
    for (int i = 0; i < 2000; ++i) {
        const std::string s = random_text(rng);
        const std::string p = perturb(s, rng);
        auto race = parse_category(s, *utk.race);
        if (race.value) CHECK(*race.value < utk.race->size());
        CHECK(parse_category(p, *utk.race) == race);
        auto bin = parse_bin(s, *ff.age_bins);
        if (bin.value) CHECK(*bin.value < ff.age_bins->size());
        CHECK(parse_bin(p, *ff.age_bins) == bin);
        auto age = parse_age_years(s);
        if (age.value) {
            CHECK(age.value->value >= 0);
            CHECK(age.value->value <= kMaxAgeYears);
        }
        CHECK_MESSAGE(parse_age_years(p) == age, "'" << s << "' vs '" << p << "'");
        CHECK(parse_age_years(text::normalize(s)) == age);
    }
}

}  // TEST_SUITE
