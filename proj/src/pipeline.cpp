#include "demoscope/pipeline.hpp"

#include <future>
#include <memory>

#include "demoscope/error.hpp"
#include "demoscope/parsing.hpp"

namespace demoscope {

namespace {

/// The image is loaded once per sample; a load failure surfaces as the
/// failure of every request that needs it.
struct ImageSlot {
    std::shared_ptr<const ImagePayload> image;
    std::string error;
    ErrorCode code = ErrorCode::Io;
};

ImageSlot load_slot(const Sample& sample) {
    ImageSlot slot;
    try {
        slot.image = std::make_shared<const ImagePayload>(load_image(sample.image_path));
    } catch (const Error& e) {
        slot.error = e.what();
        slot.code = e.code();
    }
    return slot;
}

ChatResponse ask(const PipelineContext& ctx, const ImageSlot& slot, const std::string& prompt,
                 const std::string& sample_id, StepId step, int attempt) {
    if (!slot.image) throw Error(slot.code, slot.error);
    ChatRequest req;
    req.image = slot.image;
    req.messages.push_back({"user", prompt});
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    req.model_name = ctx.model_name;
    req.tag = {sample_id, step, attempt};
    return ctx.client->complete(req);
}

struct FreeTextResult {
    std::vector<StepRecord> records;
    std::optional<std::string> text;
};

FreeTextResult run_free_text(const PipelineContext& ctx, const ImageSlot& slot, const std::string& sample_id,
                             StepId step, const std::string& prompt) {
    FreeTextResult out;
    for (int attempt = 1; attempt <= ctx.policy.retries_n; ++attempt) {
        StepRecord rec{step, attempt, prompt, "", 0, StepOutcome::OffTarget, ""};
        try {
            const ChatResponse resp = ask(ctx, slot, prompt, sample_id, step, attempt);
            rec.raw_response = resp.text;
            rec.latency_ms = resp.latency_ms;
        } catch (const Error& e) {
            rec.outcome = StepOutcome::Error;
            rec.detail = e.what();
            out.records.push_back(std::move(rec));
            return out;
        }
        const auto checked = check_free_text(rec.raw_response);
        if (checked.on_target()) {
            rec.outcome = StepOutcome::Parsed;
            out.text = rec.raw_response;
            out.records.push_back(std::move(rec));
            return out;
        }
        rec.detail = std::string(to_string(checked.reason));
        out.records.push_back(std::move(rec));
    }
    return out;
}

LabelValue category_value(AttributeKind kind, const Taxonomy& taxonomy, std::size_t index) {
    if (kind == AttributeKind::Gender) return static_cast<Gender>(index);
    if (kind == AttributeKind::Age && taxonomy.has_bins()) return BinIndex{index};
    return CategoryIndex{index};
}

FallbackFn fallback_for(AttributeKind kind, const PipelineContext& ctx) {
    const DatasetTaxonomies& tax = *ctx.taxonomies;
    if (kind == AttributeKind::Age && !tax.age_bins) {
        const int midpoint = tax.age_range.value_or(AgeRange{}).midpoint();
        return [midpoint](std::string_view) { return FallbackChoice{Years{midpoint}, ResolutionPath::Imputed}; };
    }
    const Taxonomy* taxonomy = tax.taxonomy_for(kind);
    if (ctx.policy.fallback == FallbackKind::Impute) {
        return [kind, taxonomy](std::string_view) {
            return FallbackChoice{category_value(kind, *taxonomy, 0), ResolutionPath::Imputed};
        };
    }
    return [kind, taxonomy, embedder = ctx.embedder](std::string_view raw) {
        if (!embedder) throw Error(ErrorCode::Unresolvable, "no embedder configured");
        const NearestCategory nearest = fallback_nearest(raw, *taxonomy, *embedder);
        return FallbackChoice{category_value(kind, *taxonomy, nearest.index), nearest.path};
    };
}

AttributeTarget target_for(AttributeKind kind, const DatasetTaxonomies& tax) {
    if (const Taxonomy* t = tax.taxonomy_for(kind)) return t;
    if (kind == AttributeKind::Age && tax.age_range) return *tax.age_range;
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(tax.id)) + " has no " + std::string(to_string(kind)) + " labels");
}

void run_attribute(const Sample& sample, AttributeKind kind, Mode mode, const std::optional<std::string>& description,
                   const PipelineContext& ctx, const ImageSlot& slot, SampleOutcome& out) {
    const DatasetTaxonomies& tax = *ctx.taxonomies;
    const StepId step = StepId::of(kind);
    const std::string prompt = render_attribute(*ctx.templates, kind, mode, description, target_for(kind, tax));
    auto& records = out.transcript.steps;

    const AttemptFn attempt_fn = [&](int attempt) {
        StepRecord rec{step, attempt, prompt, "", 0, StepOutcome::OffTarget, ""};
        try {
            const ChatResponse resp = ask(ctx, slot, prompt, sample.id, step, attempt);
            rec.raw_response = resp.text;
            rec.latency_ms = resp.latency_ms;
        } catch (const Error& e) {
            rec.outcome = StepOutcome::Error;
            rec.detail = e.what();
            records.push_back(std::move(rec));
            throw;
        }
        records.push_back(rec);
        return rec.raw_response;
    };
    const ParseFn parse = [&](std::string_view raw) {
        auto outcome = parse_attribute(raw, kind, tax);
        StepRecord& rec = records.back();
        if (outcome.on_target()) {
            rec.outcome = StepOutcome::Parsed;
            rec.detail = label_display(*outcome.value, tax);
        } else {
            rec.outcome = StepOutcome::OffTarget;
            rec.detail = std::string(to_string(outcome.reason));
        }
        return outcome;
    };

    Prediction p = resolve(attempt_fn, parse, fallback_for(kind, ctx), ctx.policy);
    p.sample_id = sample.id;
    p.kind = kind;
    out.predictions.push_back(std::move(p));
}

void check_context(const PipelineContext& ctx) {
    if (!ctx.client || !ctx.templates || !ctx.taxonomies) {
        throw Error(ErrorCode::InvalidArgument, "pipeline context lacks client, templates or taxonomies");
    }
}

}  // namespace

ChainPlan make_plan(const DatasetTaxonomies& taxonomies, Mode mode, bool parallel_steps_1_2) {
    ChainPlan plan{mode, taxonomies.kinds(), parallel_steps_1_2};
    if (plan.kinds.empty()) throw Error(ErrorCode::InvalidArgument, "dataset labels no attributes");
    return plan;
}

SampleOutcome run_naive(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx) {
    check_context(ctx);
    SampleOutcome out;
    out.transcript.sample_id = sample.id;
    out.transcript.mode = Mode::Naive;
    const ImageSlot slot = load_slot(sample);
    for (AttributeKind kind : plan.kinds) run_attribute(sample, kind, Mode::Naive, std::nullopt, ctx, slot, out);
    return out;
}

SampleOutcome run_cot(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx) {
    check_context(ctx);
    SampleOutcome out;
    out.transcript.sample_id = sample.id;
    out.transcript.mode = Mode::Cot;
    const ImageSlot slot = load_slot(sample);

    const std::string ffc_prompt = render_ffc(*ctx.templates);
    const std::string name_prompt = render_name(*ctx.templates);
    FreeTextResult ffc, name;
    if (plan.parallel_steps_1_2) {
        auto pending = std::async(std::launch::async, [&] {
            return run_free_text(ctx, slot, sample.id, StepId::name(), name_prompt);
        });
        ffc = run_free_text(ctx, slot, sample.id, StepId::ffc(), ffc_prompt);
        name = pending.get();
    } else {
        ffc = run_free_text(ctx, slot, sample.id, StepId::ffc(), ffc_prompt);
        name = run_free_text(ctx, slot, sample.id, StepId::name(), name_prompt);
    }
    auto& steps = out.transcript.steps;
    steps.insert(steps.end(), ffc.records.begin(), ffc.records.end());
    steps.insert(steps.end(), name.records.begin(), name.records.end());

    Mode attribute_mode = Mode::Naive;
    if (ffc.text && name.text) {
        out.transcript.composed_description = compose_description(*ffc.text, *name.text);
        attribute_mode = Mode::Cot;
    } else {
        out.transcript.degraded = true;
    }
    for (AttributeKind kind : plan.kinds) {
        run_attribute(sample, kind, attribute_mode, out.transcript.composed_description, ctx, slot, out);
    }
    return out;
}

SampleOutcome run_sample(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx) {
    return plan.mode == Mode::Cot ? run_cot(sample, plan, ctx) : run_naive(sample, plan, ctx);
}

}  // namespace demoscope
