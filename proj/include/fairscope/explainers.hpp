#pragma once
// Single-feature and coalition explainers: partial dependence / marginal game
// values, kNN conditional-game estimates, and exact Shapley values.

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fairscope/core.hpp"
#include "fairscope/models.hpp"
#include "fairscope/threading.hpp"

namespace fairscope {

enum class GameKind { marginal, conditional };

// Up to 20 players; beyond that exact 2^n enumeration is off the table and
// callers should group features instead.
inline constexpr std::size_t kShapleyPlayerCap = 20;

struct GameSpec {
    GameKind game = GameKind::marginal;
    Matrix background;
    int knn_k = 0;  // conditional only; 0 picks ceil(sqrt(#background rows))
    bool standardize = true;
};

enum class ExplainerKind { pdp_single, marginal_shapley, conditional_shapley };

inline std::string to_string(ExplainerKind k) {
    switch (k) {
        case ExplainerKind::pdp_single: return "pdp_single";
        case ExplainerKind::marginal_shapley: return "marginal_shapley";
        case ExplainerKind::conditional_shapley: return "conditional_shapley";
    }
    return "?";
}

struct AttributionMatrix {
    Matrix values;  // one row per sample, one column per feature
    std::string explainer_id;
    std::string model_id;
};

// Exact Shapley values of a game given on all 2^n coalitions (bitmask order:
// bit i set means player i is in the coalition).
inline std::vector<double> shapley(std::span<const double> game_values, std::size_t n) {
    if (n > kShapleyPlayerCap)
        throw cap_error("shapley: more than 20 players; group features and use the quotient game");
    const std::size_t full = std::size_t{1} << n;
    if (game_values.size() != full)
        throw std::invalid_argument("shapley: game values missing for some coalitions");

    // weight(s) = s!(n-s-1)!/n! = 1/(n*C(n-1,s)); binomials up to n=20 are
    // exact in double.
    std::vector<double> weight(n);
    for (std::size_t s = 0; s < n; ++s) {
        double binom = 1.0;
        for (std::size_t j = 1; j <= s; ++j)
            binom = binom * static_cast<double>(n - 1 - s + j) / static_cast<double>(j);
        weight[s] = 1.0 / (static_cast<double>(n) * binom);
    }

    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        KahanSum acc;
        for (std::size_t mask = 0; mask < full; ++mask) {
            if (mask & bit) continue;
            const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
            acc.add(w * (game_values[mask | bit] - game_values[mask]));
        }
        phi[i] = acc.value();
    }
    return phi;
}

namespace detail {

// Coalition bitmasks are 64-bit; anything wider is far past desk scale.
inline constexpr std::size_t kFeatureMaskCap = 63;

inline void check_background(const Matrix& bg, std::size_t n_features) {
    if (bg.rows == 0) throw std::invalid_argument("background must be non-empty");
    if (bg.cols != n_features)
        throw std::invalid_argument("background feature count mismatch");
    if (n_features > kFeatureMaskCap)
        throw cap_error("explainers support at most 63 features; group or drop columns");
}

// Evaluates the marginal game v(S;x) = mean_j f(x_S, X_j,-S). Background
// reductions are hoisted per coalition: additive kinds collapse to per-feature
// means, logistic-linear keeps one residual per background row.
class MarginalGameEvaluator {
public:
    MarginalGameEvaluator(const ModelSpec& model, const Matrix& background)
        : model_(model), bg_(background) {
        check_background(background, model.arity());
        const std::size_t n = model.arity();
        const std::size_t m = bg_.rows;
        if (model_.kind == ModelKind::logistic_linear) {
            row_dot_.assign(m, model_.intercept);
            term_col_.assign(n, std::vector<double>(m));
            for (std::size_t j = 0; j < m; ++j) {
                const auto row = bg_.row(j);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = model_.coefficients[i] * row[i];
                    term_col_[i][j] = t;
                    row_dot_[j] += t;
                }
            }
            KahanSum mean;
            for (std::size_t j = 0; j < m; ++j) mean.add(logistic(row_dot_[j]));
            empty_value_ = mean.value() / static_cast<double>(m);
        } else if (model_.is_additive()) {
            term_mean_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                KahanSum s;
                for (std::size_t j = 0; j < m; ++j) s.add(term(i, bg_.at(j, i)));
                term_mean_[i] = s.value() / static_cast<double>(m);
            }
            double e = model_.intercept;
            for (double tm : term_mean_) e += tm;
            empty_value_ = e;
        } else {
            throw std::invalid_argument("marginal game: model kind cannot be evaluated");
        }
    }

    std::size_t n_features() const { return model_.arity(); }
    double empty_value() const { return empty_value_; }

    struct Coalition {
        std::uint64_t mask = 0;
        double const_part = 0.0;       // additive kinds
        std::vector<double> residual;  // logistic-linear
    };

    Coalition prepare(std::uint64_t mask) const {
        Coalition c;
        c.mask = mask;
        const std::size_t n = n_features();
        if (model_.kind == ModelKind::logistic_linear) {
            const std::uint64_t complement = ((std::uint64_t{1} << n) - 1) & ~mask;
            if (mask != 0 && complement != 0) {
                c.residual = row_dot_;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (std::uint64_t{1} << i))
                        for (std::size_t j = 0; j < c.residual.size(); ++j)
                            c.residual[j] -= term_col_[i][j];
            }
        } else {
            c.const_part = model_.intercept;
            for (std::size_t i = 0; i < n; ++i)
                if (!(mask & (std::uint64_t{1} << i))) c.const_part += term_mean_[i];
        }
        return c;
    }

    // Thread-safe once the coalition is prepared.
    double value(const Coalition& c, std::span<const double> x) const {
        const std::size_t n = n_features();
        const std::uint64_t full = ((std::uint64_t{1} << n) - 1);
        if (c.mask == 0) return empty_value_;
        if (c.mask == full) return score(model_, x);
        if (model_.kind == ModelKind::logistic_linear) {
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (c.mask & (std::uint64_t{1} << i)) z += model_.coefficients[i] * x[i];
            KahanSum s;
            for (double r : c.residual) s.add(logistic(z + r));
            return s.value() / static_cast<double>(c.residual.size());
        }
        double v = c.const_part;
        for (std::size_t i = 0; i < n; ++i)
            if (c.mask & (std::uint64_t{1} << i)) v += term(i, x[i]);
        return v;
    }

    double term(std::size_t i, double xi) const {
        return model_.kind == ModelKind::linear ? model_.coefficients[i] * xi
                                                : model_.tables[i].eval(xi);
    }

private:
    const ModelSpec& model_;
    const Matrix& bg_;
    double empty_value_ = 0.0;
    std::vector<double> term_mean_;              // additive kinds
    std::vector<std::vector<double>> term_col_;  // logistic-linear: c_i * X_ji
    std::vector<double> row_dot_;                // logistic-linear: intercept + sum_i c_i X_ji
};

// Estimates v(S;x) = E[f | X_S = x_S] by averaging model values over the
// knn_k background rows nearest to x_S in standardized Euclidean distance.
class ConditionalGameEvaluator {
public:
    ConditionalGameEvaluator(const ModelSpec& model, const Matrix& background,
                             int knn_k, bool standardize)
        : model_(model), bg_(background), standardize_(standardize) {
        check_background(background, model.arity());
        const std::size_t m = bg_.rows;
        k_ = knn_k > 0 ? static_cast<std::size_t>(knn_k)
                       : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
        if (k_ < 1 || k_ > m)
            throw std::invalid_argument("conditional game: knn_k out of range");
        bg_scores_.resize(m);
        for (std::size_t j = 0; j < m; ++j) bg_scores_[j] = score(model_, bg_.row(j));
        KahanSum mean;
        for (double s : bg_scores_) mean.add(s);
        empty_value_ = mean.value() / static_cast<double>(m);

        scale_.assign(bg_.cols, 1.0);
        if (standardize_) {
            for (std::size_t i = 0; i < bg_.cols; ++i) {
                KahanSum s1, s2;
                for (std::size_t j = 0; j < m; ++j) s1.add(bg_.at(j, i));
                const double mu = s1.value() / static_cast<double>(m);
                for (std::size_t j = 0; j < m; ++j) {
                    const double d = bg_.at(j, i) - mu;
                    s2.add(d * d);
                }
                const double sd = std::sqrt(s2.value() / static_cast<double>(m));
                // Degenerate coordinates are left unscaled.
                if (sd > 1e-12) scale_[i] = sd;
            }
        }
    }

    std::size_t n_features() const { return model_.arity(); }
    double empty_value() const { return empty_value_; }

    double value(std::uint64_t mask, std::span<const double> x) const {
        const std::size_t n = n_features();
        const std::uint64_t full = ((std::uint64_t{1} << n) - 1);
        if (mask == 0) return empty_value_;
        if (mask == full) return score(model_, x);  // E[f|X=x] is f(x) itself

        const std::size_t m = bg_.rows;
        std::vector<std::pair<double, std::size_t>> dist(m);
        for (std::size_t j = 0; j < m; ++j) {
            double d2 = 0.0;
            const auto row = bg_.row(j);
            for (std::size_t i = 0; i < n; ++i) {
                if (!(mask & (std::uint64_t{1} << i))) continue;
                const double d = (x[i] - row[i]) / scale_[i];
                d2 += d * d;
            }
            dist[j] = {d2, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
                          dist.end());
        // Average in row order so the result is independent of the sort's walk.
        std::vector<std::size_t> idx(k_);
        for (std::size_t t = 0; t < k_; ++t) idx[t] = dist[t].second;
        std::sort(idx.begin(), idx.end());
        KahanSum s;
        for (std::size_t j : idx) s.add(bg_scores_[j]);
        return s.value() / static_cast<double>(k_);
    }

private:
    const ModelSpec& model_;
    const Matrix& bg_;
    bool standardize_;
    std::size_t k_ = 1;
    std::vector<double> bg_scores_;
    std::vector<double> scale_;
    double empty_value_ = 0.0;
};

inline std::uint64_t mask_of(std::span<const std::size_t> indices, std::size_t n) {
    std::uint64_t mask = 0;
    for (std::size_t i : indices) {
        if (i >= n) throw std::invalid_argument("feature index out of range");
        mask |= std::uint64_t{1} << i;
    }
    return mask;
}

}  // namespace detail

// Partial dependence of f on the coordinates S, evaluated at x_S, with the
// remaining coordinates averaged over the background.
inline double pdp(const ModelSpec& m, const Matrix& background,
                  std::span<const std::size_t> S, std::span<const double> x_S) {
    if (S.empty()) throw std::invalid_argument("pdp: S must be non-empty");
    if (S.size() != x_S.size()) throw std::invalid_argument("pdp: S/x_S length mismatch");
    const auto mask = detail::mask_of(S, m.arity());  // validates the indices
    detail::MarginalGameEvaluator ev(m, background);
    std::vector<double> x(m.arity(), 0.0);
    for (std::size_t t = 0; t < S.size(); ++t) x[S[t]] = x_S[t];
    return ev.value(ev.prepare(mask), x);
}

// v^ME(S;x): identical computation to the PDP at x_S; v(empty) is the
// background mean of f.
inline double marginal_game(const ModelSpec& m, const Matrix& background,
                            std::span<const std::size_t> S, std::span<const double> x) {
    detail::MarginalGameEvaluator ev(m, background);
    return ev.value(ev.prepare(detail::mask_of(S, m.arity())), x);
}

inline double conditional_game(const ModelSpec& m, const Matrix& background,
                               std::span<const std::size_t> S, std::span<const double> x,
                               int knn_k, bool standardize = true) {
    detail::ConditionalGameEvaluator ev(m, background, knn_k, standardize);
    return ev.value(detail::mask_of(S, m.arity()), x);
}

// Deterministic evenly-strided subsample used as the default background.
inline Matrix make_background(const Matrix& features, std::size_t cap) {
    if (cap == 0) throw std::invalid_argument("background cap must be positive");
    if (features.rows <= cap) return features;
    Matrix bg(cap, features.cols);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t src = i * features.rows / cap;
        std::copy_n(features.row(src).data(), features.cols, bg.row(i).data());
    }
    return bg;
}

// One explainer row per sample. Shapley rows satisfy efficiency:
// sum_i phi_i = f(x) - E[f].
inline AttributionMatrix attribute_dataset(const ModelSpec& m, const Matrix& features,
                                           ExplainerKind kind, const GameSpec& spec,
                                           const std::string& model_id = "") {
    const std::size_t n = m.arity();
    if (features.cols != n)
        throw std::invalid_argument("attribute_dataset: feature count mismatch");
    AttributionMatrix out;
    out.values = Matrix(features.rows, n);
    out.explainer_id = to_string(kind);
    out.model_id = model_id;

    if (kind == ExplainerKind::pdp_single) {
        detail::MarginalGameEvaluator ev(m, spec.background);
        for (std::size_t i = 0; i < n; ++i) {
            const auto coal = ev.prepare(std::uint64_t{1} << i);
            parallel_for(features.rows, [&](std::size_t r) {
                out.values.at(r, i) = ev.value(coal, features.row(r));
            });
        }
        return out;
    }

    if (n > kShapleyPlayerCap)
        throw cap_error("attribute_dataset: more than 20 features; group features instead");
    const std::size_t full = std::size_t{1} << n;

    if (kind == ExplainerKind::marginal_shapley) {
        detail::MarginalGameEvaluator ev(m, spec.background);
        if (features.rows > (std::size_t{1} << 29) / full)
            throw cap_error("attribute_dataset: coalition table too large; group features instead");
        Matrix games(features.rows, full);
        for (std::uint64_t mask = 0; mask < full; ++mask) {
            const auto coal = ev.prepare(mask);
            parallel_for(features.rows, [&](std::size_t r) {
                games.at(r, mask) = ev.value(coal, features.row(r));
            });
        }
        parallel_for(features.rows, [&](std::size_t r) {
            const auto phi = shapley(games.row(r), n);
            std::copy(phi.begin(), phi.end(), out.values.row(r).begin());
        });
        return out;
    }

    detail::ConditionalGameEvaluator ev(m, spec.background, spec.knn_k, spec.standardize);
    parallel_for(features.rows, [&](std::size_t r) {
        std::vector<double> games(full);
        for (std::uint64_t mask = 0; mask < full; ++mask)
            games[mask] = ev.value(mask, features.row(r));
        const auto phi = shapley(games, n);
        std::copy(phi.begin(), phi.end(), out.values.row(r).begin());
    });
    return out;
}

inline void validate_partition(const std::vector<std::vector<std::size_t>>& partition,
                               std::size_t n) {
    std::vector<bool> seen(n, false);
    std::size_t covered = 0;
    for (const auto& group : partition) {
        if (group.empty()) throw std::invalid_argument("partition: empty group");
        for (std::size_t i : group) {
            if (i >= n || seen[i])
                throw std::invalid_argument("partition: not a partition of the features");
            seen[i] = true;
            ++covered;
        }
    }
    if (covered != n) throw std::invalid_argument("partition: features left uncovered");
}

// Value of the base game on the union of the groups selected by A.
inline double group_explainer(const ModelSpec& m, const Matrix& background,
                              const std::vector<std::vector<std::size_t>>& partition,
                              std::span<const std::size_t> A, std::span<const double> x,
                              GameKind game = GameKind::marginal, int knn_k = 0) {
    validate_partition(partition, m.arity());
    std::vector<std::size_t> members;
    for (std::size_t g : A) {
        if (g >= partition.size()) throw std::invalid_argument("group index out of range");
        members.insert(members.end(), partition[g].begin(), partition[g].end());
    }
    const auto mask = detail::mask_of(members, m.arity());
    if (game == GameKind::marginal) {
        detail::MarginalGameEvaluator ev(m, background);
        return ev.value(ev.prepare(mask), x);
    }
    detail::ConditionalGameEvaluator ev(m, background, knn_k, true);
    return ev.value(mask, x);
}

}  // namespace fairscope
