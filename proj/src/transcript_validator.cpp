#include "demoscope/transcript_validator.hpp"

#include "demoscope/prompts.hpp"

namespace demoscope {

namespace {

struct Group {
    StepId step;
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    std::size_t size() const { return end - begin; }
};

std::vector<Group> group_steps(const std::vector<StepRecord>& steps) {
    std::vector<Group> groups;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (groups.empty() || !(groups.back().step == steps[i].step)) groups.push_back({steps[i].step, i, i});
        groups.back().end = i + 1;
    }
    return groups;
}

bool usable(const std::vector<StepRecord>& steps, const Group* g) {
    return g && steps[g->end - 1].outcome == StepOutcome::Parsed;
}

}  // namespace

std::vector<std::string> validate_transcript(const Transcript& t, std::span<const Prediction> predictions,
                                             int retries_n) {
    std::vector<std::string> out;
    auto fail = [&](const std::string& msg) { out.push_back(t.sample_id + ": " + msg); };

    const auto groups = group_steps(t.steps);
    for (const auto& g : groups) {
        const std::string name = to_string(g.step);
        if (g.size() > static_cast<std::size_t>(retries_n)) fail(name + ": more than " + std::to_string(retries_n) + " attempts");
        for (std::size_t i = g.begin; i < g.end; ++i) {
            const auto& r = t.steps[i];
            if (r.attempt != static_cast<int>(i - g.begin) + 1) fail(name + ": attempt counter not contiguous from 1");
            if (r.prompt_text.empty()) fail(name + ": empty prompt");
            if (i + 1 < g.end && r.outcome != StepOutcome::OffTarget) fail(name + ": attempt after an on-target or failed attempt");
        }
    }

    const Group* ffc = nullptr;
    const Group* name = nullptr;
    std::size_t first_attribute = 0;
    if (t.mode == Mode::Naive) {
        if (t.degraded) fail("naive transcript marked degraded");
        if (t.composed_description) fail("naive transcript carries a description");
    } else {
        if (groups.size() < 2 || groups[0].step.type != StepType::Ffc || groups[1].step.type != StepType::Name) {
            fail("cot transcript must open with one ffc group then one name group");
        } else {
            ffc = &groups[0];
            name = &groups[1];
            first_attribute = 2;
        }
        const bool both_usable = usable(t.steps, ffc) && usable(t.steps, name);
        if (t.degraded) {
            if (both_usable) fail("degraded although ffc and name steps were usable");
            if (t.composed_description) fail("degraded transcript carries a description");
        } else if (!both_usable) {
            fail("ffc or name step unusable but transcript not degraded");
        } else if (!t.composed_description) {
            fail("description missing");
        } else {
            std::string expected;
            try {
                expected = compose_description(t.steps[ffc->end - 1].raw_response, t.steps[name->end - 1].raw_response);
            } catch (const std::exception& e) {
                fail(std::string("description cannot be composed: ") + e.what());
            }
            if (*t.composed_description != expected) fail("description differs from the final ffc and name replies");
        }
    }

    std::vector<AttributeKind> seen;
    for (std::size_t gi = first_attribute; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        if (g.step.type != StepType::Attribute) {
            fail(to_string(g.step) + " step after attribute steps");
            continue;
        }
        for (auto k : seen) {
            if (k == g.step.attribute) fail(std::string(to_string(k)) + ": more than one step group");
        }
        seen.push_back(g.step.attribute);
        if (t.composed_description && !t.degraded) {
            for (std::size_t i = g.begin; i < g.end; ++i) {
                if (t.steps[i].prompt_text.find(*t.composed_description) == std::string::npos) {
                    fail(to_string(g.step) + ": prompt lacks the description");
                }
            }
        }
    }

    for (const auto& p : predictions) {
        const std::string kind(to_string(p.kind));
        if (p.sample_id != t.sample_id) fail(kind + ": prediction for another sample");
        const Group* g = nullptr;
        for (std::size_t gi = first_attribute; gi < groups.size(); ++gi) {
            if (groups[gi].step == StepId::of(p.kind)) g = &groups[gi];
        }
        if (!g) {
            fail(kind + ": prediction without transcript steps");
            continue;
        }
        const auto& last = t.steps[g->end - 1];
        if (p.attempts != static_cast<int>(g->size())) fail(kind + ": attempt count differs from transcript");
        if (p.first_attempt_off_target != (t.steps[g->begin].outcome == StepOutcome::OffTarget)) {
            fail(kind + ": first_attempt_off_target disagrees with transcript");
        }
        if (p.value.has_value() == (p.resolution == ResolutionPath::Unresolvable)) {
            fail(kind + ": value presence disagrees with resolution");
        }
        switch (p.resolution) {
            case ResolutionPath::Parsed:
                if (last.outcome != StepOutcome::Parsed) fail(kind + ": parsed but last attempt was not");
                break;
            case ResolutionPath::EmbeddingFallback:
            case ResolutionPath::Imputed:
                if (g->size() != static_cast<std::size_t>(retries_n) || last.outcome != StepOutcome::OffTarget) {
                    fail(kind + ": fallback before the retry budget was spent");
                }
                break;
            case ResolutionPath::Unresolvable:
                if (last.outcome == StepOutcome::Parsed) fail(kind + ": unresolvable after an on-target attempt");
                break;
        }
    }
    return out;
}

}  // namespace demoscope
