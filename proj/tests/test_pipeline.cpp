#include "doctest.h"

#include "demoscope/error.hpp"
#include "demoscope/pipeline.hpp"
#include "demoscope/prompts.hpp"
#include "demoscope/synonyms.hpp"
#include "demoscope/transcript_validator.hpp"
#include "support.hpp"

using namespace demoscope;
using namespace testsupport;
using nlohmann::json;

namespace {

struct Fixture {
    TempDir dir{"pipeline"};
    DatasetTaxonomies tax;
    TemplateSet templates = TemplateSet::load(default_templates_path());
    Sample sample;

    explicit Fixture(DatasetId id = DatasetId::Utkface) : tax(load_taxonomies(id, default_synonyms_path())) {
        sample.id = "25_0_1_x.jpg";
        sample.image_path = dir / sample.id;
        sample.dataset = id;
        write_fake_image(sample.image_path);
    }

    PipelineContext ctx(const ScriptedMock& mock, bool with_embedder = true) const {
        PipelineContext c;
        c.client = &mock;
        c.embedder = with_embedder ? &mock : nullptr;
        c.templates = &templates;
        c.taxonomies = &tax;
        c.model_name = "test-model";
        return c;
    }
};

std::vector<std::string> step_names(const Transcript& t) {
    std::vector<std::string> out;
    for (const auto& s : t.steps) out.push_back(to_string(s.step));
    return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("plans follow the dataset's labelled attributes") {
    const auto utk = make_plan(taxonomies_for(DatasetId::Utkface), Mode::Cot, true);
    CHECK(utk.kinds == std::vector<AttributeKind>{AttributeKind::Age, AttributeKind::Gender, AttributeKind::Race});
    const auto cacd = make_plan(taxonomies_for(DatasetId::Cacd), Mode::Naive, false);
    CHECK(cacd.kinds == std::vector<AttributeKind>{AttributeKind::Age});
    CHECK_THROWS_AS(make_plan(DatasetTaxonomies{}, Mode::Naive, true), Error);
}

TEST_CASE("naive chain issues one parsed step per attribute") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Naive, "27", "Male", "Black");
    ScriptedMock mock(fx);
    const auto plan = make_plan(f.tax, Mode::Naive, true);
    const auto out = run_sample(f.sample, plan, f.ctx(mock));
    CHECK(step_names(out.transcript) == std::vector<std::string>{"age", "gender", "race"});
    CHECK_FALSE(out.transcript.composed_description);
    REQUIRE(out.predictions.size() == 3);
    CHECK(std::get<Years>(*out.predictions[0].value).value == 27);
    CHECK(std::get<Gender>(*out.predictions[1].value) == Gender::Male);
    CHECK(std::get<CategoryIndex>(*out.predictions[2].value).value == 1);
    for (const auto& p : out.predictions) {
        CHECK(p.resolution == ResolutionPath::Parsed);
        CHECK(p.attempts == 1);
        CHECK(p.sample_id == f.sample.id);
    }
    CHECK(mock.complete_calls() == 3);
    CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
}

TEST_CASE("cacd chains query age only") {
    Fixture f(DatasetId::Cacd);
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Naive, "40", "", "");
    ScriptedMock mock(fx);
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Naive, true), f.ctx(mock));
    CHECK(step_names(out.transcript) == std::vector<std::string>{"age"});
    REQUIRE(out.predictions.size() == 1);
    CHECK(std::get<Years>(*out.predictions[0].value).value == 40);
}

TEST_CASE("cot chain injects the composed description into every attribute prompt") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Cot, "30", "female", "asian");
    ScriptedMock mock(fx);
    for (bool parallel : {true, false}) {
        const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Cot, parallel), f.ctx(mock));
        CHECK(step_names(out.transcript) == std::vector<std::string>{"ffc", "name", "age", "gender", "race"});
        REQUIRE(out.transcript.composed_description);
        const std::string& d = *out.transcript.composed_description;
        CHECK(d == compose_description("Smooth skin, short dark hair, no wrinkles.", "Smith John"));
        for (std::size_t i = 2; i < out.transcript.steps.size(); ++i) {
            CHECK(out.transcript.steps[i].prompt_text.find(d) != std::string::npos);
        }
        CHECK_FALSE(out.transcript.degraded);
        CHECK(std::get<Gender>(*out.predictions[1].value) == Gender::Female);
        CHECK(std::get<CategoryIndex>(*out.predictions[2].value).value == 2);
        CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
    }
}

TEST_CASE("unusable facial-feature step degrades to naive attribute prompts") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Cot, "30", "Male", "White");
    for (int a = 1; a <= 5; ++a) fx[f.sample.id + "/ffc/" + std::to_string(a)] = "";
    ScriptedMock mock(fx);
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Cot, true), f.ctx(mock));
    CHECK(out.transcript.degraded);
    CHECK_FALSE(out.transcript.composed_description);
    std::size_t ffc_steps = 0;
    for (const auto& s : out.transcript.steps) {
        if (s.step == StepId::ffc()) {
            ++ffc_steps;
            CHECK(s.outcome == StepOutcome::OffTarget);
        }
    }
    CHECK(ffc_steps == 5);
    const std::string naive_age = render_attribute(f.templates, AttributeKind::Age, Mode::Naive, std::nullopt, *f.tax.age_range);
    CHECK(out.transcript.steps.back().step == StepId::of(AttributeKind::Race));
    for (const auto& p : out.predictions) CHECK(p.resolution == ResolutionPath::Parsed);
    CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
    bool saw_naive_age = false;
    for (const auto& s : out.transcript.steps) {
        if (s.step == StepId::of(AttributeKind::Age)) saw_naive_age = s.prompt_text.find(naive_age) != std::string::npos;
    }
    CHECK(saw_naive_age);
}

TEST_CASE("retries then embedding fallback for a categorical attribute") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Naive, "30", "Male", "");
    for (int a = 1; a <= 5; ++a) fx[f.sample.id + "/race/" + std::to_string(a)] = "hard to say";
    const auto& race = *f.tax.race;
    for (std::size_t i = 0; i < race.size(); ++i) fx["embed/" + race.category(i)] = axis(race.size(), i);
    fx["embed/hard to say"] = axis(race.size(), 3);
    ScriptedMock mock(fx);
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Naive, true), f.ctx(mock));
    const auto& p = out.predictions[2];
    CHECK(p.resolution == ResolutionPath::EmbeddingFallback);
    CHECK(p.attempts == 5);
    CHECK(std::get<CategoryIndex>(*p.value).value == 3);
    CHECK(mock.embed_calls() == 1);
    CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
}

TEST_CASE("off-target continuous age imputes the midpoint") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Naive, "", "Male", "White");
    for (int a = 1; a <= 5; ++a) fx[f.sample.id + "/age/" + std::to_string(a)] = "an adult";
    ScriptedMock mock(fx);
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Naive, true), f.ctx(mock));
    CHECK(out.predictions[0].resolution == ResolutionPath::Imputed);
    CHECK(std::get<Years>(*out.predictions[0].value).value == 58);
    CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
}

TEST_CASE("endpoint failures leave every attribute unresolvable with the cause") {
    Fixture f;
    json fx = json::object();
    for (const char* step : {"age", "gender", "race"}) fx[f.sample.id + "/" + step + "/1"] = json{{"error", "transport"}};
    ScriptedMock mock(fx);
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Naive, true), f.ctx(mock));
    for (const auto& p : out.predictions) {
        CHECK(p.resolution == ResolutionPath::Unresolvable);
        CHECK_FALSE(p.value);
        CHECK(p.error.find("Transport") != std::string::npos);
    }
    for (const auto& s : out.transcript.steps) CHECK(s.outcome == StepOutcome::Error);
    CHECK(validate_transcript(out.transcript, out.predictions, 5).empty());
}

TEST_CASE("a missing image is reported per attribute, not thrown") {
    Fixture f;
    f.sample.image_path = f.dir / "absent.jpg";
    ScriptedMock mock(json::object());
    const auto out = run_sample(f.sample, make_plan(f.tax, Mode::Naive, true), f.ctx(mock));
    for (const auto& p : out.predictions) CHECK(p.resolution == ResolutionPath::Unresolvable);
    CHECK(mock.complete_calls() == 0);
}

TEST_CASE("chains are deterministic under the mock") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Cot, "unsure", "Male", "Indian");
    fx[f.sample.id + "/age/2"] = "44";
    ScriptedMock mock(fx);
    const auto plan = make_plan(f.tax, Mode::Cot, true);
    const auto a = run_sample(f.sample, plan, f.ctx(mock));
    const auto b = run_sample(f.sample, plan, f.ctx(mock));
    REQUIRE(a.transcript.steps.size() == b.transcript.steps.size());
    for (std::size_t i = 0; i < a.transcript.steps.size(); ++i) {
        CHECK(a.transcript.steps[i].prompt_text == b.transcript.steps[i].prompt_text);
        CHECK(a.transcript.steps[i].raw_response == b.transcript.steps[i].raw_response);
    }
    CHECK(a.predictions[0].attempts == 2);
    CHECK(a.predictions[0].first_attempt_off_target);
}

TEST_CASE("the validator rejects tampered transcripts") {
    Fixture f;
    json fx = json::object();
    add_chain_replies(fx, f.sample.id, Mode::Cot, "30", "Male", "White");
    ScriptedMock mock(fx);
    const auto good = run_sample(f.sample, make_plan(f.tax, Mode::Cot, true), f.ctx(mock));
    REQUIRE(validate_transcript(good.transcript, good.predictions, 5).empty());

    auto t = good.transcript;
    t.steps[2].attempt = 2;
    CHECK_FALSE(validate_transcript(t, good.predictions, 5).empty());

    t = good.transcript;
    t.composed_description = "something else";
    CHECK_FALSE(validate_transcript(t, good.predictions, 5).empty());

    t = good.transcript;
    std::swap(t.steps[0], t.steps[2]);
    CHECK_FALSE(validate_transcript(t, good.predictions, 5).empty());

    auto preds = good.predictions;
    preds[1].attempts = 3;
    CHECK_FALSE(validate_transcript(good.transcript, preds, 5).empty());

    preds = good.predictions;
    preds[0].value.reset();
    CHECK_FALSE(validate_transcript(good.transcript, preds, 5).empty());
}

}  // TEST_SUITE
