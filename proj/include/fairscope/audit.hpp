#pragma once
// Dataset ingestion, audit configuration, and the end-to-end audit pipeline:
// score -> subpopulation distributions -> bias report -> explainer values ->
// bias explanations, with optional Shapley-bias and group results, emitted as
// a JSON report plus plot-ready CSVs.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "fairscope/io.hpp"

namespace fairscope {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr int kSchemaVersion = 1;

struct AuditConfig {
    std::string dataset;
    std::string protected_column;
    std::string protected_reference;
    int favorable_sign = 0;  // +1 up, -1 down; required

    // Exactly one model source.
    std::string model_spec_path;
    std::string score_column;
    std::string attribution_csv;

    std::vector<std::string> ignore_columns;  // e.g. a response column
    ExplainerKind explainer = ExplainerKind::pdp_single;
    std::size_t background_cap = 4000;
    int knn_k = 0;
    bool standardize = true;
    bool emit_shapley_bias = false;
    std::vector<std::pair<std::string, std::vector<std::string>>> partition;
    std::string bep_sort_key = "beta";
    std::uint64_t seed = 0;
    std::string output_dir = "fairscope_out";
};

inline AuditConfig audit_config_from_json(const json& j) {
    AuditConfig c;
    try {
        c.dataset = j.at("dataset").get<std::string>();
        c.protected_column = j.at("protected_column").get<std::string>();
        c.protected_reference = j.at("protected_reference").get<std::string>();
        const std::string dir = j.at("favorable_direction").get<std::string>();
        if (dir == "up") c.favorable_sign = +1;
        else if (dir == "down") c.favorable_sign = -1;
        else throw config_error("config: favorable_direction must be 'up' or 'down'");

        const json& model = j.at("model");
        int sources = 0;
        if (model.contains("spec_file")) {
            c.model_spec_path = model["spec_file"].get<std::string>();
            ++sources;
        }
        if (model.contains("score_column")) {
            c.score_column = model["score_column"].get<std::string>();
            ++sources;
        }
        if (model.contains("attribution_csv")) {
            c.attribution_csv = model["attribution_csv"].get<std::string>();
            ++sources;
        }
        if (sources != 1)
            throw config_error("config: exactly one model source is required");

        c.ignore_columns = j.value("ignore_columns", std::vector<std::string>{});

        const std::string ek = j.value("explainer", std::string("pdp_single"));
        if (ek == "pdp_single") c.explainer = ExplainerKind::pdp_single;
        else if (ek == "marginal_shapley") c.explainer = ExplainerKind::marginal_shapley;
        else if (ek == "conditional_shapley") c.explainer = ExplainerKind::conditional_shapley;
        else throw config_error("config: unknown explainer '" + ek + "'");

        c.background_cap = j.value("background_cap", std::size_t{4000});
        if (c.background_cap == 0) throw config_error("config: background_cap must be positive");
        c.knn_k = j.value("knn_k", 0);
        c.standardize = j.value("standardize", true);
        c.emit_shapley_bias = j.value("shapley_bias", false);
        c.bep_sort_key = j.value("bep_sort_key", std::string("beta"));
        c.seed = j.value("seed", std::uint64_t{0});
        c.output_dir = j.value("output_dir", std::string("fairscope_out"));
        if (j.contains("partition"))
            for (const auto& [name, cols] : j["partition"].items())
                c.partition.emplace_back(name, cols.get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return c;
}

inline json audit_config_to_json(const AuditConfig& c) {
    json model;
    if (!c.model_spec_path.empty()) model["spec_file"] = c.model_spec_path;
    if (!c.score_column.empty()) model["score_column"] = c.score_column;
    if (!c.attribution_csv.empty()) model["attribution_csv"] = c.attribution_csv;
    json j{{"dataset", c.dataset},
           {"protected_column", c.protected_column},
           {"protected_reference", c.protected_reference},
           {"favorable_direction", c.favorable_sign > 0 ? "up" : "down"},
           {"model", model},
           {"ignore_columns", c.ignore_columns},
           {"explainer", to_string(c.explainer)},
           {"background_cap", c.background_cap},
           {"knn_k", c.knn_k},
           {"standardize", c.standardize},
           {"shapley_bias", c.emit_shapley_bias},
           {"bep_sort_key", c.bep_sort_key},
           {"seed", c.seed},
           {"output_dir", c.output_dir}};
    if (!c.partition.empty()) {
        json p;
        for (const auto& [name, cols] : c.partition) p[name] = cols;
        j["partition"] = p;
    }
    return j;
}

struct IngestedDataset {
    Matrix features;
    std::vector<int> protected_class;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;  // label of class k at index k
    std::vector<double> scores;             // when a score column is configured
};

// Numeric feature matrix plus protected labels with the reference label
// mapped to class 0 and the remaining labels to 1..K-1 in sorted order.
// Rows with unparseable or non-finite numerics are a data error, reported
// with their (1-based) row numbers.
inline IngestedDataset ingest_csv(const std::string& path, const AuditConfig& config) {
    const CsvTable t = read_csv(path);
    const std::size_t prot_idx = t.column_index(config.protected_column);
    std::optional<std::size_t> score_idx;
    if (!config.score_column.empty()) score_idx = t.column_index(config.score_column);

    IngestedDataset d;
    std::vector<std::size_t> feature_cols;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i == prot_idx || (score_idx && i == *score_idx)) continue;
        if (std::find(config.ignore_columns.begin(), config.ignore_columns.end(),
                      t.header[i]) != config.ignore_columns.end())
            continue;
        feature_cols.push_back(i);
        d.feature_names.push_back(t.header[i]);
    }
    if (feature_cols.empty()) throw data_error("ingest: no feature columns");

    std::vector<std::string> labels;
    for (const auto& row : t.rows) labels.push_back(row[prot_idx]);
    std::vector<std::string> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
        throw data_error("ingest: protected column has a single class");
    const auto ref = std::find(distinct.begin(), distinct.end(), config.protected_reference);
    if (ref == distinct.end())
        throw data_error("ingest: reference label '" + config.protected_reference +
                         "' not present in column '" + config.protected_column + "'");
    d.class_labels.push_back(config.protected_reference);
    for (const auto& l : distinct)
        if (l != config.protected_reference) d.class_labels.push_back(l);
    std::map<std::string, int> class_of;
    for (std::size_t k = 0; k < d.class_labels.size(); ++k)
        class_of[d.class_labels[k]] = static_cast<int>(k);

    d.features = Matrix(t.rows.size(), feature_cols.size());
    d.protected_class.resize(t.rows.size());
    if (score_idx) d.scores.resize(t.rows.size());
    std::string bad_rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        bool ok = true;
        for (std::size_t c = 0; c < feature_cols.size(); ++c) {
            double v;
            if (!parse_double(t.rows[r][feature_cols[c]], v) || !std::isfinite(v)) {
                ok = false;
                break;
            }
            d.features.at(r, c) = v;
        }
        if (ok && score_idx) {
            double v;
            if (!parse_double(t.rows[r][*score_idx], v) || !std::isfinite(v)) ok = false;
            else d.scores[r] = v;
        }
        if (!ok) {
            if (!bad_rows.empty()) bad_rows += ",";
            bad_rows += std::to_string(r + 1);
        }
        d.protected_class[r] = class_of[labels[r]];
    }
    if (!bad_rows.empty())
        throw data_error("ingest: rows with unparseable or non-finite values: " + bad_rows);
    return d;
}

// Writes the score CDF curve, the quantile-gap curve, and one CDF curve per
// explainer column. Returns the file names written.
inline std::vector<std::string> emit_curves(std::span<const double> scores,
                                            std::span<const int> protected_class,
                                            int favorable_sign,
                                            const AttributionMatrix* attr,
                                            std::span<const std::string> feature_names,
                                            const std::string& outdir) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    std::vector<std::string> files;
    const std::string score_cdf = "score_cdf.csv";
    write_cdf_curve_csv((fs::path(outdir) / score_cdf).string(), scores, protected_class,
                        favorable_sign);
    files.push_back(score_cdf);
    const std::string qcsv = "quantile_bias.csv";
    write_quantile_curve_csv((fs::path(outdir) / qcsv).string(), scores, protected_class,
                             favorable_sign);
    files.push_back(qcsv);
    if (attr) {
        for (std::size_t i = 0; i < attr->values.cols; ++i) {
            const std::string name = feature_names.empty()
                                         ? "x" + std::to_string(i + 1)
                                         : feature_names[i];
            const std::string fname = "explainer_cdf_" + name + ".csv";
            write_cdf_curve_csv((fs::path(outdir) / fname).string(), attr->values.column(i),
                                protected_class, favorable_sign);
            files.push_back(fname);
        }
    }
    return files;
}

struct AuditReport {
    BiasReport model_report;
    std::vector<BiasExplanationRow> explanations;
    std::optional<ShapleyBiasResult> shapley_result;
    std::optional<ShapleyBiasResult> group_result;
    std::vector<std::string> curve_files;
    json config_echo;
    json timings;
};

inline json to_json(const AuditReport& r) {
    json expl = json::array();
    for (const auto& row : r.explanations) expl.push_back(to_json(row));
    json j{{"schema_version", kSchemaVersion},
           {"version", kVersion},
           {"config", r.config_echo},
           {"model_bias", to_json(r.model_report)},
           {"bias_explanations", expl}};
    if (r.shapley_result) j["shapley_bias"] = to_json(*r.shapley_result);
    if (r.group_result) j["group_bias"] = to_json(*r.group_result);
    j["curves"] = r.curve_files;
    j["timings"] = r.timings;
    return j;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> resolve_partition(
    const AuditConfig& config, std::span<const std::string> feature_names) {
    std::vector<std::vector<std::size_t>> partition;
    for (const auto& [name, cols] : config.partition) {
        std::vector<std::size_t> group;
        for (const auto& col : cols) {
            const auto it = std::find(feature_names.begin(), feature_names.end(), col);
            if (it == feature_names.end())
                throw config_error("partition: unknown feature '" + col + "'");
            group.push_back(static_cast<std::size_t>(it - feature_names.begin()));
        }
        partition.push_back(std::move(group));
    }
    return partition;
}

}  // namespace detail

// Runs the full audit and writes report.json, curve CSVs and the BEP CSV
// under config.output_dir.
inline AuditReport run_audit(const AuditConfig& config) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    if (config.favorable_sign == 0)
        throw config_error("config: favorable_direction is required");

    AuditReport report;
    report.config_echo = audit_config_to_json(config);

    auto t0 = clock::now();
    IngestedDataset data = ingest_csv(config.dataset, config);
    for (int k : data.protected_class)
        if (k > 1)
            throw data_error(
                "audit: more than two protected classes; use the group-parity path");
    report.timings["ingest_ms"] = ms_since(t0);

    // Model source: closed-form spec, precomputed scores, or an external
    // attribution matrix (scores then come from attribution row sums, which
    // match the true scores up to a bias-invariant constant shift).
    t0 = clock::now();
    std::optional<ModelSpec> model;
    std::vector<double> scores;
    std::optional<AttributionMatrix> attr;
    if (!config.model_spec_path.empty()) {
        std::ifstream in(config.model_spec_path);
        if (!in) throw config_error("config: cannot open model spec '" +
                                    config.model_spec_path + "'");
        json mj;
        try {
            in >> mj;
        } catch (const json::exception& e) {
            throw config_error(std::string("model spec: ") + e.what());
        }
        model = model_spec_from_json(mj);
        if (model->arity() != data.features.cols)
            throw config_error("model spec: arity does not match dataset features");
        model->favorable_sign = config.favorable_sign;
        scores = score_rows(*model, data.features);
    } else if (!config.score_column.empty()) {
        scores = data.scores;
    } else {
        const CsvTable at = read_csv(config.attribution_csv);
        if (at.header != data.feature_names)
            throw data_error("attribution csv: columns must match dataset features");
        if (at.rows.size() != data.features.rows)
            throw data_error("attribution csv: row count mismatch");
        AttributionMatrix a;
        a.values = Matrix(at.rows.size(), at.header.size());
        a.explainer_id = "external";
        for (std::size_t r = 0; r < at.rows.size(); ++r)
            for (std::size_t c = 0; c < at.header.size(); ++c) {
                double v;
                if (!parse_double(at.rows[r][c], v) || !std::isfinite(v))
                    throw data_error("attribution csv: bad value at row " +
                                     std::to_string(r + 1));
                a.values.at(r, c) = v;
            }
        scores.resize(a.values.rows);
        for (std::size_t r = 0; r < a.values.rows; ++r)
            scores[r] = kahan_total(a.values.row(r));
        attr = std::move(a);
    }
    report.timings["scoring_ms"] = ms_since(t0);

    t0 = clock::now();
    report.model_report = model_bias(scores, data.protected_class, config.favorable_sign);
    report.timings["model_bias_ms"] = ms_since(t0);

    GameSpec spec;
    spec.game = config.explainer == ExplainerKind::conditional_shapley
                    ? GameKind::conditional
                    : GameKind::marginal;
    spec.background = make_background(data.features, config.background_cap);
    spec.knn_k = config.knn_k;
    spec.standardize = config.standardize;

    // A bare score column carries no model to evaluate, so the audit degrades
    // to the bias report and score curves.
    t0 = clock::now();
    if (!attr && model)
        attr = attribute_dataset(*model, data.features, config.explainer, spec);
    report.timings["attribution_ms"] = ms_since(t0);

    t0 = clock::now();
    if (attr)
        report.explanations = bias_explanations(*attr, data.protected_class,
                                                config.favorable_sign, data.feature_names);
    report.timings["bias_explanations_ms"] = ms_since(t0);

    if (config.emit_shapley_bias) {
        if (!model) throw config_error("config: shapley_bias requires a model spec");
        t0 = clock::now();
        const auto table = build_bias_game(*model, data.features, data.protected_class,
                                           config.favorable_sign,
                                           GroupExplainerForm::shapley_sum, spec);
        report.shapley_result = shapley_bias(table, data.feature_names);
        report.timings["shapley_bias_ms"] = ms_since(t0);
    }
    if (!config.partition.empty()) {
        if (!model) throw config_error("config: group bias requires a model spec");
        t0 = clock::now();
        const auto partition = detail::resolve_partition(config, data.feature_names);
        std::vector<std::string> group_names;
        for (const auto& [name, cols] : config.partition) group_names.push_back(name);
        report.group_result =
            group_shapley_bias(*model, data.features, data.protected_class,
                               config.favorable_sign, partition, spec, group_names);
        report.timings["group_bias_ms"] = ms_since(t0);
    }

    t0 = clock::now();
    fs::create_directories(config.output_dir);
    report.curve_files = emit_curves(scores, data.protected_class, config.favorable_sign,
                                     attr ? &*attr : nullptr, data.feature_names,
                                     config.output_dir);
    if (attr)
        write_bep_csv((fs::path(config.output_dir) / "bep.csv").string(),
                      report.explanations, config.bep_sort_key);
    if (report.shapley_result)
        write_shapley_bias_csv((fs::path(config.output_dir) / "shapley_bias.csv").string(),
                               *report.shapley_result);
    if (report.group_result)
        write_shapley_bias_csv((fs::path(config.output_dir) / "group_bias.csv").string(),
                               *report.group_result);
    report.timings["emit_ms"] = ms_since(t0);

    std::ofstream out(fs::path(config.output_dir) / "report.json");
    out << to_json(report).dump(2) << '\n';
    return report;
}

}  // namespace fairscope
