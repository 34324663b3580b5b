#pragma once
// Closed-form scoring models and the seeded synthetic generators used by the
// audit experiments.

#include <cmath>
#include <optional>
#include <string>

#include "fairscope/core.hpp"
#include "fairscope/empirical.hpp"
#include "fairscope/rng.hpp"

namespace fairscope {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// 1-D piecewise-linear function: linear between knots, flat outside.
struct PiecewiseLinear {
    std::vector<double> xs;  // strictly ascending knots
    std::vector<double> ys;

    double eval(double x) const {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    }
};

enum class ModelKind { linear, logistic_linear, additive_tabular, external_scores };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::linear: return "linear";
        case ModelKind::logistic_linear: return "logistic_linear";
        case ModelKind::additive_tabular: return "additive_tabular";
        case ModelKind::external_scores: return "external_scores";
    }
    return "?";
}

struct ModelSpec {
    ModelKind kind = ModelKind::linear;
    std::vector<double> coefficients;     // linear kinds
    double intercept = 0.0;
    std::vector<PiecewiseLinear> tables;  // additive_tabular
    int favorable_sign = +1;              // +1: larger outputs favor; -1: smaller do

    std::size_t arity() const {
        return kind == ModelKind::additive_tabular ? tables.size() : coefficients.size();
    }

    // Additive in the sense f(x) = sum_i f_i(x_i); logistic of a sum is not.
    bool is_additive() const {
        return kind == ModelKind::linear || kind == ModelKind::additive_tabular;
    }
};

inline double score(const ModelSpec& m, std::span<const double> x) {
    if (m.kind == ModelKind::external_scores)
        throw std::invalid_argument("score: external_scores models cannot be evaluated");
    if (x.size() != m.arity())
        throw std::invalid_argument("score: input arity mismatch");
    if (!all_finite(x))
        throw std::invalid_argument("score: non-finite input");
    switch (m.kind) {
        case ModelKind::linear:
        case ModelKind::logistic_linear: {
            double z = m.intercept;
            for (std::size_t i = 0; i < x.size(); ++i) z += m.coefficients[i] * x[i];
            return m.kind == ModelKind::linear ? z : logistic(z);
        }
        case ModelKind::additive_tabular: {
            double z = m.intercept;
            for (std::size_t i = 0; i < x.size(); ++i) z += m.tables[i].eval(x[i]);
            return z;
        }
        default:
            return 0.0;  // unreachable
    }
}

inline std::vector<double> score_rows(const ModelSpec& m, const Matrix& features) {
    std::vector<double> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) out[r] = score(m, features.row(r));
    return out;
}

struct SyntheticDataset {
    Matrix features;                            // N x n
    std::vector<int> protected_class;           // class 0 is non-protected
    std::optional<std::vector<double>> response;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
};

enum class SyntheticModelId { M1, M2, M3, M4, M5, M6, EPS_TAU, ZERO_BIAS };

inline std::optional<SyntheticModelId> parse_model_id(const std::string& s) {
    if (s == "M1") return SyntheticModelId::M1;
    if (s == "M2") return SyntheticModelId::M2;
    if (s == "M3") return SyntheticModelId::M3;
    if (s == "M4") return SyntheticModelId::M4;
    if (s == "M5") return SyntheticModelId::M5;
    if (s == "M6") return SyntheticModelId::M6;
    if (s == "EPS_TAU") return SyntheticModelId::EPS_TAU;
    if (s == "ZERO_BIAS") return SyntheticModelId::ZERO_BIAS;
    return std::nullopt;
}

inline std::string to_string(SyntheticModelId id) {
    switch (id) {
        case SyntheticModelId::M1: return "M1";
        case SyntheticModelId::M2: return "M2";
        case SyntheticModelId::M3: return "M3";
        case SyntheticModelId::M4: return "M4";
        case SyntheticModelId::M5: return "M5";
        case SyntheticModelId::M6: return "M6";
        case SyntheticModelId::EPS_TAU: return "EPS_TAU";
        case SyntheticModelId::ZERO_BIAS: return "ZERO_BIAS";
    }
    return "?";
}

struct SyntheticParams {
    double mu = 5.0;
    double tau = 1.0;
    double sigma = 1.0;
    double epsilon = 0.1;
};

struct SyntheticResult {
    SyntheticDataset data;
    ModelSpec model;
};

// Draws the protected attribute uniformly on {0,1}, features from the model's
// normal laws, and a Bernoulli response where the model is a classification
// score. Deterministic per (id, params, N, seed); feature i reads stream i+1,
// G reads stream 0, the response stream 1000.
inline SyntheticResult generate(SyntheticModelId id, const SyntheticParams& params,
                                std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("generate: N must be >= 1");
    if (!(params.sigma > 0.0) || !(params.mu > 0.0))
        throw std::invalid_argument("generate: sigma and mu must be positive");
    if ((id == SyntheticModelId::EPS_TAU || id == SyntheticModelId::ZERO_BIAS) &&
        !(params.tau > 0.0))
        throw std::invalid_argument("generate: tau must be positive");
    if (id == SyntheticModelId::EPS_TAU && !(params.epsilon >= 0.0))
        throw std::invalid_argument("generate: epsilon must be non-negative");

    const double mu = params.mu;
    const double tau = params.tau;
    const double sig = params.sigma;
    const double eps = params.epsilon;

    std::size_t n_features = 2;
    if (id == SyntheticModelId::M1 || id == SyntheticModelId::M2) n_features = 1;
    if (id == SyntheticModelId::M6) n_features = 5;

    ModelSpec model;
    bool bernoulli_response = true;
    switch (id) {
        case SyntheticModelId::M1:
        case SyntheticModelId::M2:
            model = {ModelKind::logistic_linear, {-1.0}, mu, {}, -1};
            break;
        case SyntheticModelId::M3:
            // Favorable sign +1: with the printed feature laws, X1's explainer
            // places the non-protected class on the unfavorable side exactly
            // when larger scores favor.
            model = {ModelKind::logistic_linear, {-1.0, -1.0}, 2.0 * mu, {}, +1};
            break;
        case SyntheticModelId::M4:
        case SyntheticModelId::M5:
            model = {ModelKind::logistic_linear, {-1.0, -1.0}, 2.0 * mu, {}, -1};
            break;
        case SyntheticModelId::M6:
            model = {ModelKind::logistic_linear, {1.0, 1.0, 1.0, 1.0, 1.0}, -24.5, {}, -1};
            break;
        case SyntheticModelId::EPS_TAU:
            model = {ModelKind::linear, {eps / tau, 1.0}, 0.0, {}, -1};
            bernoulli_response = false;
            break;
        case SyntheticModelId::ZERO_BIAS:
            model = {ModelKind::linear, {1.0, 1.0}, 0.0, {}, -1};
            bernoulli_response = false;
            break;
    }

    // M6 mean offsets a and per-class stddevs.
    const double m6_a[5] = {10.0 / 20, -4.0 / 20, 16.0 / 20, 1.0 / 20, -3.0 / 20};

    SyntheticDataset data;
    data.seed = seed;
    data.features = Matrix(n_samples, n_features);
    data.protected_class.resize(n_samples);
    data.feature_names.resize(n_features);
    for (std::size_t i = 0; i < n_features; ++i)
        data.feature_names[i] = "x" + std::to_string(i + 1);

    const CounterRng g_rng(seed, 0);
    std::vector<CounterRng> f_rng;
    f_rng.reserve(n_features);
    for (std::size_t i = 0; i < n_features; ++i) f_rng.emplace_back(seed, i + 1);
    const CounterRng y_rng(seed, 1000);

    std::vector<double> response(n_samples);
    for (std::size_t r = 0; r < n_samples; ++r) {
        const int gk = g_rng.uniform(r) < 0.5 ? 0 : 1;
        data.protected_class[r] = gk;
        const double G = static_cast<double>(gk);
        auto row = data.features.row(r);
        switch (id) {
            case SyntheticModelId::M1:
                row[0] = f_rng[0].normal(r, mu - G, std::sqrt(mu));
                break;
            case SyntheticModelId::M2:
                row[0] = f_rng[0].normal(r, mu, (1.0 + G) * std::sqrt(mu));
                break;
            case SyntheticModelId::M3:
                row[0] = f_rng[0].normal(r, mu + G, 1.0);
                row[1] = f_rng[1].normal(r, mu - G, 1.0);
                break;
            case SyntheticModelId::M4:
                row[0] = f_rng[0].normal(r, mu, 1.0 + G);
                row[1] = f_rng[1].normal(r, mu, 1.0 + G);
                break;
            case SyntheticModelId::M5:
                row[0] = f_rng[0].normal(r, mu, 2.0 - G);
                row[1] = f_rng[1].normal(r, mu, 1.0 + G);
                break;
            case SyntheticModelId::M6:
                for (std::size_t i = 0; i < 5; ++i) {
                    const double sd = i == 0   ? 0.5 + G
                                      : i == 3 ? 1.0 - 0.5 * G
                                      : i == 4 ? 1.0 - 0.75 * G
                                               : 1.0;
                    row[i] = f_rng[i].normal(r, mu - m6_a[i] * (1.0 - G), sd);
                }
                break;
            case SyntheticModelId::EPS_TAU:
                row[0] = f_rng[0].normal(r, tau * G, sig);
                row[1] = f_rng[1].normal(r, 0.0, sig);
                break;
            case SyntheticModelId::ZERO_BIAS:
                row[0] = f_rng[0].normal(r, mu + tau * G, sig);
                row[1] = f_rng[1].normal(r, mu - tau * G, sig);
                break;
        }
        const double s = score(model, row);
        response[r] = bernoulli_response ? (y_rng.bernoulli(r, s) ? 1.0 : 0.0) : s;
    }
    data.response = std::move(response);
    return {std::move(data), std::move(model)};
}

// For a linear model with the feature-sum metric d(x,y) = sum_i |x_i - y_i|,
// returns (model W1 bias, [f]_Lip * sum_i W1(X_i|G=0, X_i|G=1)). The right
// side upper-bounds the multivariate W1 bound by coordinatewise transport.
inline std::pair<double, double> lipschitz_bound_check(const ModelSpec& m,
                                                       const SyntheticDataset& data) {
    if (m.kind != ModelKind::linear)
        throw std::invalid_argument("lipschitz_bound_check: model must be linear");
    std::vector<double> s0, s1;
    const auto scores = score_rows(m, data.features);
    for (std::size_t r = 0; r < scores.size(); ++r)
        (data.protected_class[r] == 0 ? s0 : s1).push_back(scores[r]);
    if (s0.empty() || s1.empty())
        throw data_error("lipschitz_bound_check: both classes must be present");
    const double lhs = wasserstein(EmpiricalDistribution::from_samples(s0),
                                   EmpiricalDistribution::from_samples(s1), 1);

    double lip = 0.0;
    for (double c : m.coefficients) lip = std::max(lip, std::abs(c));
    KahanSum coord;
    for (std::size_t i = 0; i < data.features.cols; ++i) {
        std::vector<double> x0, x1;
        for (std::size_t r = 0; r < data.features.rows; ++r)
            (data.protected_class[r] == 0 ? x0 : x1).push_back(data.features.at(r, i));
        coord.add(wasserstein(EmpiricalDistribution::from_samples(x0),
                              EmpiricalDistribution::from_samples(x1), 1));
    }
    return {lhs, lip * coord.value()};
}

}  // namespace fairscope
