#include "demoscope/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "demoscope/csv.hpp"
#include "demoscope/error.hpp"
#include "demoscope/prompts.hpp"

namespace demoscope {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::optional<LabelValue> value_from_cell(const std::string& cell, AttributeKind kind, const DatasetTaxonomies& tax,
                                          const std::string& where) {
    if (cell.empty()) return std::nullopt;
    auto v = label_from_display(cell, kind, tax);
    if (!v) throw Error(ErrorCode::Decode, where + ": '" + cell + "' is not a " + std::string(to_string(kind)) + " label");
    return v;
}

StepOutcome outcome_from_string(std::string_view s) {
    if (s == "parsed") return StepOutcome::Parsed;
    if (s == "off_target") return StepOutcome::OffTarget;
    if (s == "error") return StepOutcome::Error;
    throw Error(ErrorCode::Decode, "unknown step outcome '" + std::string(s) + "'");
}

ordered_json step_json(const Transcript& t, const StepRecord& r) {
    ordered_json j;
    j["sample_id"] = t.sample_id;
    j["mode"] = std::string(to_string(t.mode));
    j["degraded"] = t.degraded;
    j["step"] = to_string(r.step);
    j["attempt"] = r.attempt;
    j["prompt"] = r.prompt_text;
    j["response"] = r.raw_response;
    j["latency_ms"] = r.latency_ms;
    j["outcome"] = std::string(to_string(r.outcome));
    j["detail"] = r.detail;
    return j;
}

StepRecord step_from_json(const json& j) {
    StepRecord r;
    auto step = step_from_string(j.at("step").get<std::string>());
    if (!step) throw Error(ErrorCode::Decode, "unknown step '" + j.at("step").get<std::string>() + "'");
    r.step = *step;
    r.attempt = j.at("attempt").get<int>();
    r.prompt_text = j.at("prompt").get<std::string>();
    r.raw_response = j.at("response").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<long long>();
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    r.detail = j.at("detail").get<std::string>();
    return r;
}

Mode mode_or_throw(const std::string& s) {
    auto m = mode_from_string(s);
    if (!m) throw Error(ErrorCode::Decode, "unknown mode '" + s + "'");
    return *m;
}

/// Recomposes the description of a cot transcript whose free-text steps both succeeded.
void restore_description(Transcript& t) {
    if (t.mode != Mode::Cot || t.degraded) return;
    const StepRecord* ffc = nullptr;
    const StepRecord* name = nullptr;
    for (const auto& r : t.steps) {
        if (r.step.type == StepType::Ffc) ffc = &r;
        if (r.step.type == StepType::Name) name = &r;
    }
    if (ffc && name && ffc->outcome == StepOutcome::Parsed && name->outcome == StepOutcome::Parsed) {
        t.composed_description = compose_description(ffc->raw_response, name->raw_response);
    }
}

}  // namespace

std::string transcript_jsonl(const Transcript& transcript) {
    std::string out;
    for (const auto& r : transcript.steps) {
        out += step_json(transcript, r).dump();
        out += '\n';
    }
    return out;
}

std::vector<Transcript> parse_transcripts_jsonl(std::string_view text) {
    std::vector<Transcript> out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string sid = j.at("sample_id").get<std::string>();
            if (out.empty() || out.back().sample_id != sid) {
                Transcript t;
                t.sample_id = sid;
                t.mode = mode_or_throw(j.at("mode").get<std::string>());
                t.degraded = j.at("degraded").get<bool>();
                out.push_back(std::move(t));
            }
            out.back().steps.push_back(step_from_json(j));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Decode, "transcript line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (auto& t : out) restore_description(t);
    return out;
}

std::string predictions_csv_header() {
    return "sample_id,attribute,truth,prediction,resolution,attempts,first_attempt_off_target\n";
}

std::string prediction_csv_row(const ScoredPrediction& row, const DatasetTaxonomies& tax) {
    const Prediction& p = row.prediction;
    std::ostringstream out;
    write_csv_row(out, {p.sample_id, std::string(to_string(p.kind)), row.truth ? label_display(*row.truth, tax) : "",
                        p.value ? label_display(*p.value, tax) : "", std::string(to_string(p.resolution)),
                        std::to_string(p.attempts), p.first_attempt_off_target ? "true" : "false"});
    return out.str();
}

std::vector<ScoredPrediction> parse_predictions_csv(std::string_view text, const DatasetTaxonomies& tax) {
    const CsvTable table = parse_csv(text);
    const std::vector<std::string> expected = {"sample_id",  "attribute", "truth", "prediction",
                                               "resolution", "attempts",  "first_attempt_off_target"};
    if (table.header != expected) throw Error(ErrorCode::Decode, "predictions header does not match");
    std::vector<ScoredPrediction> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        const std::string where = "predictions line " + std::to_string(table.row_lines[i]);
        if (cells.size() != expected.size()) throw Error(ErrorCode::Decode, where + ": wrong field count");
        ScoredPrediction row;
        Prediction& p = row.prediction;
        p.sample_id = cells[0];
        auto kind = attribute_from_string(cells[1]);
        if (!kind) throw Error(ErrorCode::Decode, where + ": unknown attribute '" + cells[1] + "'");
        p.kind = *kind;
        row.truth = value_from_cell(cells[2], p.kind, tax, where);
        p.value = value_from_cell(cells[3], p.kind, tax, where);
        auto res = resolution_from_string(cells[4]);
        if (!res) throw Error(ErrorCode::Decode, where + ": unknown resolution '" + cells[4] + "'");
        p.resolution = *res;
        try {
            p.attempts = std::stoi(cells[5]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::Decode, where + ": bad attempts '" + cells[5] + "'");
        }
        if (cells[6] != "true" && cells[6] != "false") throw Error(ErrorCode::Decode, where + ": bad flag");
        p.first_attempt_off_target = cells[6] == "true";
        out.push_back(std::move(row));
    }
    return out;
}

ordered_json outcome_to_json(const SampleOutcome& outcome, const DatasetTaxonomies& tax) {
    const Transcript& t = outcome.transcript;
    ordered_json j;
    j["sample_id"] = t.sample_id;
    j["mode"] = std::string(to_string(t.mode));
    j["degraded"] = t.degraded;
    j["steps"] = ordered_json::array();
    for (const auto& r : t.steps) j["steps"].push_back(step_json(t, r));
    j["predictions"] = ordered_json::array();
    for (const auto& p : outcome.predictions) {
        ordered_json pj;
        pj["attribute"] = std::string(to_string(p.kind));
        pj["value"] = p.value ? ordered_json(label_display(*p.value, tax)) : ordered_json(nullptr);
        pj["resolution"] = std::string(to_string(p.resolution));
        pj["attempts"] = p.attempts;
        pj["final_raw_text"] = p.final_raw_text;
        pj["first_attempt_off_target"] = p.first_attempt_off_target;
        pj["error"] = p.error;
        j["predictions"].push_back(std::move(pj));
    }
    return j;
}

SampleOutcome outcome_from_json(const json& j, const DatasetTaxonomies& tax) {
    SampleOutcome out;
    Transcript& t = out.transcript;
    t.sample_id = j.at("sample_id").get<std::string>();
    t.mode = mode_or_throw(j.at("mode").get<std::string>());
    t.degraded = j.at("degraded").get<bool>();
    for (const auto& s : j.at("steps")) t.steps.push_back(step_from_json(s));
    restore_description(t);
    for (const auto& pj : j.at("predictions")) {
        Prediction p;
        p.sample_id = t.sample_id;
        auto kind = attribute_from_string(pj.at("attribute").get<std::string>());
        if (!kind) throw Error(ErrorCode::Decode, "unknown attribute in checkpoint");
        p.kind = *kind;
        if (!pj.at("value").is_null()) {
            p.value = value_from_cell(pj.at("value").get<std::string>(), p.kind, tax, "checkpoint " + t.sample_id);
        }
        auto res = resolution_from_string(pj.at("resolution").get<std::string>());
        if (!res) throw Error(ErrorCode::Decode, "unknown resolution in checkpoint");
        p.resolution = *res;
        p.attempts = pj.at("attempts").get<int>();
        p.final_raw_text = pj.at("final_raw_text").get<std::string>();
        p.first_attempt_off_target = pj.at("first_attempt_off_target").get<bool>();
        p.error = pj.at("error").get<std::string>();
        out.predictions.push_back(std::move(p));
    }
    return out;
}

std::vector<SampleOutcome> read_checkpoint(const fs::path& path, const DatasetTaxonomies& tax) {
    std::vector<SampleOutcome> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
            out.push_back(outcome_from_json(json::parse(line), tax));
        } catch (const std::exception&) {
            continue;
        }
    }
    return out;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace demoscope
