#pragma once

#include <string>
#include <vector>

#include "demoscope/core.hpp"
#include "demoscope/model_client.hpp"
#include "demoscope/prompts.hpp"
#include "demoscope/remediation.hpp"

namespace demoscope {

struct ChainPlan {
    Mode mode = Mode::Cot;
    /// Attributes to query, in Age, Gender, Race order.
    std::vector<AttributeKind> kinds;
    bool parallel_steps_1_2 = true;
};

/// Queries every attribute the dataset labels. Throws InvalidArgument if none.
ChainPlan make_plan(const DatasetTaxonomies& taxonomies, Mode mode, bool parallel_steps_1_2);

/// Everything a chain needs besides the sample. Pointers are borrowed and must outlive the call.
struct PipelineContext {
    const ChatClient* client = nullptr;
    const Embedder* embedder = nullptr;
    const TemplateSet* templates = nullptr;
    const DatasetTaxonomies* taxonomies = nullptr;
    ResolutionPolicy policy;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 512;
};

struct SampleOutcome {
    Transcript transcript;
    /// One per plan kind, in plan order.
    std::vector<Prediction> predictions;
};

/// One attribute step group per kind, no description.
SampleOutcome run_naive(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx);

/// Facial-feature and name steps, the composed description, then one
/// attribute step group per kind with the description injected. If either
/// free-text step stays unusable after its retry budget, the attributes are
/// queried with naive prompts and the transcript is marked degraded.
SampleOutcome run_cot(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx);

/// Dispatches on plan.mode.
SampleOutcome run_sample(const Sample& sample, const ChainPlan& plan, const PipelineContext& ctx);

}  // namespace demoscope
