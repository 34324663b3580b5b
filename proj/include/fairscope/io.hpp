#pragma once
// JSON and CSV serialization for reports, curves, explanation tables, and
// model-spec files.

#include <json.hpp>

#include "fairscope/bias_explain.hpp"
#include "fairscope/csv.hpp"
#include "fairscope/shapley_bias.hpp"

namespace fairscope {

using json = nlohmann::ordered_json;

inline json to_json(const BiasReport& r) {
    return json{{"total", r.total},
                {"positive", r.positive},
                {"negative", r.negative},
                {"net", r.net},
                {"favorable_sign", r.favorable_sign},
                {"metric", r.metric}};
}

inline json to_json(const BiasExplanationRow& row) {
    return json{{"feature", row.feature},
                {"beta", row.beta},
                {"beta_pos", row.beta_pos},
                {"beta_neg", row.beta_neg},
                {"beta_net", row.beta_net}};
}

inline json to_json(const ShapleyBiasResult& r) {
    json features = json::array();
    for (std::size_t i = 0; i < r.names.size(); ++i)
        features.push_back(json{{"feature", r.names[i]},
                                {"phi", r.phi_bias[i]},
                                {"phi_pos", r.phi_bias_pos[i]},
                                {"phi_neg", r.phi_bias_neg[i]},
                                {"phi_net", r.phi_bias_net[i]}});
    return features;
}

inline json to_json(const MitigationTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back(json{{"feature", s.feature}, {"report", to_json(s.after)}});
    json out{{"initial", to_json(t.initial)},
             {"reference_values", t.reference_values},
             {"steps", steps}};
    if (t.rejected_step)
        out["rejected_step"] = json{{"feature", t.rejected_step->feature},
                                    {"report", to_json(t.rejected_step->after)}};
    return out;
}

// Bare curve: one grid column (t or p) and the signed value.
inline void write_bias_curve_csv(const std::string& path, const BiasCurve& curve) {
    CsvWriter w(path);
    w.row({curve.kind == CurveKind::classifier ? "t" : "p",
           curve.kind == CurveKind::classifier ? "signed_classifier_bias"
                                               : "signed_quantile_bias"});
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        w.row({format_double(curve.grid[i]), format_double(curve.signed_values[i])});
}

inline void write_bep_csv(const std::string& path, std::vector<BiasExplanationRow> rows,
                          const std::string& sort_key = "beta") {
    auto key = [&](const BiasExplanationRow& r) {
        if (sort_key == "beta") return r.beta;
        if (sort_key == "beta_pos") return r.beta_pos;
        if (sort_key == "beta_net") return r.beta_net;
        throw config_error("bep: unknown sort key '" + sort_key + "'");
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const auto& a, const auto& b) { return key(a) > key(b); });
    CsvWriter w(path);
    w.row({"feature", "beta", "beta_pos", "beta_neg", "beta_net"});
    for (const auto& r : rows)
        w.row({r.feature, format_double(r.beta), format_double(r.beta_pos),
               format_double(r.beta_neg), format_double(r.beta_net)});
}

inline void write_shapley_bias_csv(const std::string& path, const ShapleyBiasResult& r) {
    CsvWriter w(path);
    w.row({"feature", "phi", "phi_pos", "phi_neg", "phi_net"});
    for (std::size_t i = 0; i < r.names.size(); ++i)
        w.row({r.names[i], format_double(r.phi_bias[i]), format_double(r.phi_bias_pos[i]),
               format_double(r.phi_bias_neg[i]), format_double(r.phi_bias_net[i])});
}

inline void write_attribution_csv(const std::string& path, const AttributionMatrix& attr,
                                  std::span<const std::string> feature_names) {
    CsvWriter w(path);
    std::vector<std::string> header;
    for (std::size_t i = 0; i < attr.values.cols; ++i)
        header.push_back(feature_names.empty() ? "x" + std::to_string(i + 1)
                                               : feature_names[i]);
    w.row(header);
    std::vector<std::string> cells(attr.values.cols);
    for (std::size_t r = 0; r < attr.values.rows; ++r) {
        for (std::size_t c = 0; c < attr.values.cols; ++c)
            cells[c] = format_double(attr.values.at(r, c));
        w.row(cells);
    }
}

// Columns t,F0,F1,signed_classifier_bias on the distinct-values-plus-midpoints
// grid: re-integrating |signed| dt between consecutive t reproduces the W1
// total exactly.
inline void write_cdf_curve_csv(const std::string& path, std::span<const double> values,
                                std::span<const int> protected_class, int favorable_sign) {
    const auto [v0, v1] = detail::split_by_class(values, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(v0);
    const auto d1 = EmpiricalDistribution::from_samples(v1);
    std::vector<double> merged(values.begin(), values.end());
    const auto grid = default_threshold_grid(merged);
    CsvWriter w(path);
    w.row({"t", "F0", "F1", "signed_classifier_bias"});
    for (double t : grid) {
        const double f0 = d0.cdf(t);
        const double f1 = d1.cdf(t);
        w.row({format_double(t), format_double(f0), format_double(f1),
               format_double((f1 - f0) * favorable_sign)});
    }
}

// Columns p,q0,q1,signed_quantile_bias at the merged cumulative-weight
// breakpoints (p is each segment's right endpoint): sum |signed| * dp over
// consecutive rows (from p=0) reproduces the W1 total exactly.
inline void write_quantile_curve_csv(const std::string& path, std::span<const double> values,
                                     std::span<const int> protected_class,
                                     int favorable_sign) {
    const auto [v0, v1] = detail::split_by_class(values, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(v0);
    const auto d1 = EmpiricalDistribution::from_samples(v1);
    CsvWriter w(path);
    w.row({"p", "q0", "q1", "signed_quantile_bias"});
    detail::for_each_merged_segment(d0, d1, [&](double, double hi, double a, double b) {
        w.row({format_double(hi), format_double(a), format_double(b),
               format_double((a - b) * favorable_sign)});
    });
}

// Model-spec files: {"kind": ..., "coefficients": [...], "intercept": ...,
// "favorable_direction": "up"|"down", "tables": [{"x":[...],"y":[...]}]}.
inline ModelSpec model_spec_from_json(const json& j) {
    ModelSpec m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") m.kind = ModelKind::linear;
    else if (kind == "logistic_linear") m.kind = ModelKind::logistic_linear;
    else if (kind == "additive_tabular") m.kind = ModelKind::additive_tabular;
    else throw config_error("model spec: unknown kind '" + kind + "'");
    m.intercept = j.value("intercept", 0.0);
    if (m.kind == ModelKind::additive_tabular) {
        for (const auto& tj : j.at("tables")) {
            PiecewiseLinear t;
            t.xs = tj.at("x").get<std::vector<double>>();
            t.ys = tj.at("y").get<std::vector<double>>();
            if (t.xs.size() != t.ys.size() || t.xs.size() < 2 ||
                !std::is_sorted(t.xs.begin(), t.xs.end()))
                throw config_error("model spec: malformed table");
            m.tables.push_back(std::move(t));
        }
    } else {
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (m.coefficients.empty()) throw config_error("model spec: no coefficients");
    }
    const std::string dir = j.value("favorable_direction", "up");
    if (dir == "up") m.favorable_sign = +1;
    else if (dir == "down") m.favorable_sign = -1;
    else throw config_error("model spec: favorable_direction must be up or down");
    return m;
}

inline json model_spec_to_json(const ModelSpec& m) {
    json j{{"kind", to_string(m.kind)},
           {"intercept", m.intercept},
           {"favorable_direction", m.favorable_sign > 0 ? "up" : "down"}};
    if (m.kind == ModelKind::additive_tabular) {
        json tables = json::array();
        for (const auto& t : m.tables) tables.push_back(json{{"x", t.xs}, {"y", t.ys}});
        j["tables"] = tables;
    } else {
        j["coefficients"] = m.coefficients;
    }
    return j;
}

inline void write_synthetic_csv(const std::string& path, const SyntheticDataset& data) {
    CsvWriter w(path);
    std::vector<std::string> header = data.feature_names;
    header.push_back("g");
    if (data.response) header.push_back("y");
    w.row(header);
    std::vector<std::string> cells;
    for (std::size_t r = 0; r < data.features.rows; ++r) {
        cells.clear();
        for (std::size_t c = 0; c < data.features.cols; ++c)
            cells.push_back(format_double(data.features.at(r, c)));
        cells.push_back(std::to_string(data.protected_class[r]));
        if (data.response) cells.push_back(format_double((*data.response)[r]));
        w.row(cells);
    }
}

}  // namespace fairscope
