#include "demoscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "demoscope/csv.hpp"

namespace demoscope {

using nlohmann::ordered_json;

namespace {

constexpr const char* kUndefined = "n/a";

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fixed(const std::optional<double>& v, int decimals, const char* suffix = "") {
    return v ? fixed(*v, decimals) + suffix : kUndefined;
}

ordered_json optional_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::size_t class_index(const LabelValue& v) {
    if (auto* b = std::get_if<BinIndex>(&v)) return b->value;
    if (auto* g = std::get_if<Gender>(&v)) return static_cast<std::size_t>(*g);
    if (auto* c = std::get_if<CategoryIndex>(&v)) return c->value;
    return static_cast<std::size_t>(std::get<Years>(v).value);
}

struct Column {
    std::string header;
    std::function<std::string(const MetricsReport&)> cell;
};

const AttributeReport* attr(const MetricsReport& r, AttributeKind k) { return r.find(k); }

std::vector<Column> table_columns(std::span<const MetricsReport> reports) {
    bool any_regression = false, any_binned = false;
    for (const auto& r : reports) {
        if (!attr(r, AttributeKind::Age)) continue;
        if (taxonomies_for(r.dataset).age_bins) any_binned = true;
        else any_regression = true;
    }
    std::vector<Column> cols;
    cols.push_back({"Model", [](const MetricsReport& r) { return r.label; }});
    auto reg = [](std::function<std::string(const RegressionScores&)> f) {
        return [f](const MetricsReport& r) -> std::string {
            const auto* a = attr(r, AttributeKind::Age);
            if (!a || !a->regression) return "-";
            return f(*a->regression);
        };
    };
    auto cls = [](AttributeKind k, bool kappa) {
        return [k, kappa](const MetricsReport& r) -> std::string {
            const auto* a = attr(r, k);
            if (!a || !a->classification) return "-";
            return kappa ? fixed(a->classification->kappa, 4) : fixed(a->classification->accuracy, 4);
        };
    };
    if (any_regression) {
        cols.push_back({"Age MSE", reg([](const RegressionScores& s) { return fixed(s.mse, 2); })});
        cols.push_back({"Age RMSE", reg([](const RegressionScores& s) { return fixed(s.rmse, 2); })});
        cols.push_back({"Age MAE", reg([](const RegressionScores& s) { return fixed(s.mae, 2); })});
        cols.push_back({"Age R²", reg([](const RegressionScores& s) { return fixed(s.r2, 4); })});
        cols.push_back({"Age MAPE", reg([](const RegressionScores& s) { return fixed(s.mape_percent, 2, "%"); })});
    }
    if (any_binned) {
        cols.push_back({"Age Accuracy", cls(AttributeKind::Age, false)});
        cols.push_back({"Age Kappa", cls(AttributeKind::Age, true)});
    }
    cols.push_back({"Gender Accuracy", cls(AttributeKind::Gender, false)});
    cols.push_back({"Gender Kappa", cls(AttributeKind::Gender, true)});
    cols.push_back({"Ethnicity Accuracy", cls(AttributeKind::Race, false)});
    cols.push_back({"Ethnicity Kappa", cls(AttributeKind::Race, true)});
    cols.push_back({"Off-target Rate", [](const MetricsReport& r) {
                        return r.off_target.post_retry_rate ? fixed(100.0 * *r.off_target.post_retry_rate, 2) + "%"
                                                            : std::string(kUndefined);
                    }});
    cols.push_back({"First-attempt Off-target", [](const MetricsReport& r) {
                        return r.off_target.first_attempt_rate
                                   ? fixed(100.0 * *r.off_target.first_attempt_rate, 2) + "%"
                                   : std::string(kUndefined);
                    }});
    cols.push_back({"Samples", [](const MetricsReport& r) { return std::to_string(r.n_samples); }});
    return cols;
}

}  // namespace

const AttributeReport* MetricsReport::find(AttributeKind kind) const {
    for (const auto& a : attributes) {
        if (a.kind == kind) return &a;
    }
    return nullptr;
}

MetricsReport compute_report(const std::string& label, DatasetId dataset, Mode mode,
                             std::span<const ScoredPrediction> rows, const DatasetTaxonomies& tax,
                             const MapeZeroHandling& mape_zero, UnresolvedAgePolicy unresolved_age) {
    MetricsReport report;
    report.label = label;
    report.dataset = dataset;
    report.mode = mode;

    std::set<std::string> samples;
    std::vector<Prediction> all;
    for (const auto& row : rows) {
        samples.insert(row.prediction.sample_id);
        all.push_back(row.prediction);
    }
    report.n_samples = samples.size();
    report.off_target = off_target_scores(all);

    for (AttributeKind kind : tax.kinds()) {
        AttributeReport a;
        a.kind = kind;
        const bool continuous = kind == AttributeKind::Age && !tax.age_bins;
        std::vector<double> pred_years, truth_years;
        std::vector<std::size_t> pred_idx, truth_idx;
        for (const auto& row : rows) {
            const Prediction& p = row.prediction;
            if (p.kind != kind) continue;
            ++a.n_total;
            if (!p.value || !row.truth) {
                if (!p.value) ++a.n_unresolvable;
                continue;
            }
            if (continuous) {
                if (p.resolution == ResolutionPath::Imputed && unresolved_age == UnresolvedAgePolicy::Exclude) {
                    ++a.n_imputed_excluded;
                    continue;
                }
                pred_years.push_back(std::get<Years>(*p.value).value);
                truth_years.push_back(std::get<Years>(*row.truth).value);
            } else {
                pred_idx.push_back(class_index(*p.value));
                truth_idx.push_back(class_index(*row.truth));
            }
        }
        if (continuous) {
            a.n_scored = pred_years.size();
            if (pred_years.size() >= 2) a.regression = regression_scores(pred_years, truth_years, mape_zero);
        } else {
            a.n_scored = pred_idx.size();
            if (!pred_idx.empty()) {
                a.classification = classification_scores(pred_idx, truth_idx, tax.taxonomy_for(kind)->size());
            }
        }
        report.attributes.push_back(std::move(a));
    }
    return report;
}

ordered_json report_to_json(const MetricsReport& r) {
    ordered_json j;
    j["label"] = r.label;
    j["dataset"] = std::string(to_string(r.dataset));
    j["mode"] = std::string(to_string(r.mode));
    j["samples"] = r.n_samples;
    j["attributes"] = ordered_json::array();
    for (const auto& a : r.attributes) {
        ordered_json aj;
        aj["attribute"] = std::string(to_string(a.kind));
        aj["total"] = a.n_total;
        aj["scored"] = a.n_scored;
        aj["unresolvable"] = a.n_unresolvable;
        aj["imputed_excluded"] = a.n_imputed_excluded;
        if (a.regression) {
            const auto& s = *a.regression;
            aj["mse"] = s.mse;
            aj["rmse"] = s.rmse;
            aj["mae"] = s.mae;
            aj["r2"] = optional_json(s.r2);
            aj["mape_percent"] = optional_json(s.mape_percent);
            aj["mape_used"] = s.n_used;
            aj["mape_excluded"] = s.n_excluded;
        }
        if (a.classification) {
            aj["accuracy"] = a.classification->accuracy;
            aj["kappa"] = optional_json(a.classification->kappa);
            aj["confusion"] = a.classification->confusion;
        }
        j["attributes"].push_back(std::move(aj));
    }
    const auto& o = r.off_target;
    j["off_target"] = {{"post_retry_rate", optional_json(o.post_retry_rate)},
                       {"first_attempt_rate", optional_json(o.first_attempt_rate)},
                       {"total", o.total},
                       {"first_attempt_off_target", o.first_attempt_off_target},
                       {"parsed", o.parsed},
                       {"embedding_fallback", o.embedding_fallback},
                       {"imputed", o.imputed},
                       {"unresolvable", o.unresolvable}};
    return j;
}

std::string comparison_markdown(std::span<const MetricsReport> reports) {
    const auto cols = table_columns(reports);
    std::ostringstream out;
    out << '|';
    for (const auto& c : cols) out << ' ' << c.header << " |";
    out << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i == 0 ? " :--- |" : " ---: |");
    out << '\n';
    for (const auto& r : reports) {
        out << '|';
        for (const auto& c : cols) out << ' ' << c.cell(r) << " |";
        out << '\n';
    }
    return out.str();
}

std::string comparison_csv(std::span<const MetricsReport> reports) {
    const auto cols = table_columns(reports);
    std::ostringstream out;
    std::vector<std::string> fields;
    for (const auto& c : cols) fields.push_back(c.header);
    write_csv_row(out, fields);
    for (const auto& r : reports) {
        fields.clear();
        for (const auto& c : cols) fields.push_back(c.cell(r));
        write_csv_row(out, fields);
    }
    return out.str();
}

}  // namespace demoscope
