#pragma once
// Transport-based bias explanations per predictor, explainer-level classifier
// bias, the additive-model net identity, and neutralization-based mitigation.

#include <optional>
#include <string>

#include "fairscope/bias_metrics.hpp"
#include "fairscope/explainers.hpp"

namespace fairscope {

struct BiasExplanationRow {
    std::string feature;
    double beta = 0.0;
    double beta_pos = 0.0;
    double beta_neg = 0.0;
    double beta_net = 0.0;
};

// beta_i is the W1 distance between the subpopulation distributions of
// explainer column i; the favorable direction of every explainer is taken to
// be that of the model.
inline std::vector<BiasExplanationRow> bias_explanations(
    const AttributionMatrix& attr, std::span<const int> protected_class,
    int favorable_sign, std::span<const std::string> feature_names = {}) {
    detail::check_sign(favorable_sign);
    if (!feature_names.empty() && feature_names.size() != attr.values.cols)
        throw std::invalid_argument("bias_explanations: feature name count mismatch");
    std::vector<BiasExplanationRow> rows(attr.values.cols);
    for (std::size_t i = 0; i < attr.values.cols; ++i) {
        const auto column = attr.values.column(i);
        const auto [e0, e1] = detail::split_by_class(column, protected_class);
        const auto d0 = EmpiricalDistribution::from_samples(e0);
        const auto d1 = EmpiricalDistribution::from_samples(e1);
        const BiasReport r = detail::signed_w1_report(d0, d1, favorable_sign);
        const double mean_net = favorable_sign * (d0.mean() - d1.mean());
        if (std::abs(mean_net - r.net) > 1e-9 * std::max(1.0, r.total))
            throw std::logic_error("bias_explanations: net/mean-gap identity violated");
        rows[i].feature = feature_names.empty() ? "x" + std::to_string(i + 1)
                                                : feature_names[i];
        rows[i].beta = r.total;
        rows[i].beta_pos = r.positive;
        rows[i].beta_neg = r.negative;
        rows[i].beta_net = r.net;
    }
    return rows;
}

// Signed CDF gap of one explainer column at threshold t.
inline double explainer_classifier_bias(std::span<const double> explainer_column,
                                        std::span<const int> protected_class,
                                        int favorable_sign, double t) {
    detail::check_sign(favorable_sign);
    const auto [e0, e1] = detail::split_by_class(explainer_column, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(e0);
    const auto d1 = EmpiricalDistribution::from_samples(e1);
    return (d1.cdf(t) - d0.cdf(t)) * favorable_sign;
}

// For additive models with marginal explainers the net explanations add up to
// the net model bias exactly on the same empirical data. Returns (lhs, rhs).
inline std::pair<double, double> additive_model_net_identity(
    const ModelSpec& m, const Matrix& features, std::span<const int> protected_class,
    ExplainerKind explainer, const GameSpec& spec) {
    if (!m.is_additive())
        throw std::invalid_argument("additive_model_net_identity: model is not additive");
    if (explainer == ExplainerKind::conditional_shapley)
        throw std::invalid_argument("additive_model_net_identity: marginal explainers only");
    const auto scores = score_rows(m, features);
    const BiasReport model_report = model_bias(scores, protected_class, m.favorable_sign);
    const auto attr = attribute_dataset(m, features, explainer, spec);
    const auto rows = bias_explanations(attr, protected_class, m.favorable_sign);
    KahanSum rhs;
    for (const auto& row : rows) rhs.add(row.beta_net);
    return {model_report.net, rhs.value()};
}

// Post-processed scores with the features in S pinned to reference values.
inline std::vector<double> neutralize(const ModelSpec& m, const Matrix& features,
                                      std::span<const std::size_t> S,
                                      std::span<const double> reference_values) {
    if (reference_values.size() != m.arity())
        throw std::invalid_argument("neutralize: reference value count mismatch");
    if (!all_finite(reference_values))
        throw std::invalid_argument("neutralize: non-finite reference value");
    std::vector<bool> pinned(m.arity(), false);
    for (std::size_t i : S) {
        if (i >= m.arity()) throw std::invalid_argument("neutralize: feature index out of range");
        pinned[i] = true;
    }
    std::vector<double> out(features.rows);
    std::vector<double> buf(m.arity());
    for (std::size_t r = 0; r < features.rows; ++r) {
        const auto row = features.row(r);
        for (std::size_t i = 0; i < m.arity(); ++i)
            buf[i] = pinned[i] ? reference_values[i] : row[i];
        out[r] = score(m, buf);
    }
    return out;
}

struct MitigationTrace {
    struct Step {
        std::string feature;
        std::size_t feature_index = 0;
        BiasReport after;
    };
    BiasReport initial;
    std::vector<Step> steps;
    std::vector<double> reference_values;
    // The first step the stopping rule refused to execute, if any.
    std::optional<Step> rejected_step;
};

// Ranks positively-net features by their net explanation and neutralizes them
// in that order, recomputing the model bias after each step. A step that
// would zero out the positive bias while leaving negative bias behind is
// recorded but not executed.
inline MitigationTrace greedy_mitigation(const ModelSpec& m, const Matrix& features,
                                         std::span<const int> protected_class,
                                         ExplainerKind explainer, const GameSpec& spec,
                                         std::span<const std::string> feature_names = {},
                                         double positive_zero_tolerance = 1e-12) {
    const int sign = m.favorable_sign;
    MitigationTrace trace;
    trace.initial = model_bias(score_rows(m, features), protected_class, sign);

    // Reference values default to background feature means.
    trace.reference_values.resize(m.arity());
    for (std::size_t i = 0; i < m.arity(); ++i)
        trace.reference_values[i] = kahan_mean(spec.background.column(i));

    const auto attr = attribute_dataset(m, features, explainer, spec);
    const auto rows = bias_explanations(attr, protected_class, sign, feature_names);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].beta_net > 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].beta_net != rows[b].beta_net) return rows[a].beta_net > rows[b].beta_net;
        return a < b;
    });

    std::vector<std::size_t> neutralized;
    BiasReport current = trace.initial;
    for (std::size_t i : order) {
        if (current.positive <= positive_zero_tolerance) break;  // nothing left to reduce
        auto candidate = neutralized;
        candidate.push_back(i);
        const BiasReport would_be =
            model_bias(neutralize(m, features, candidate, trace.reference_values),
                       protected_class, sign);
        MitigationTrace::Step step{rows[i].feature, i, would_be};
        if (would_be.positive <= positive_zero_tolerance &&
            would_be.negative > positive_zero_tolerance) {
            trace.rejected_step = std::move(step);
            break;
        }
        neutralized = std::move(candidate);
        current = would_be;
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

}  // namespace fairscope
