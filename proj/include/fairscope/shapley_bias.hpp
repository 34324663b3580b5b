#pragma once
// Cooperative bias games over feature coalitions and their Shapley values:
// additive attributions of the total, positive and negative model bias,
// including quotient games over feature groups.

#include <string>

#include "fairscope/bias_explain.hpp"

namespace fairscope {

// Form of the per-coalition group explainer E(S;x).
enum class GroupExplainerForm { shapley_sum, direct_value };

inline std::string to_string(GroupExplainerForm f) {
    return f == GroupExplainerForm::shapley_sum ? "shapley_sum" : "direct_value";
}

struct BiasGameTable {
    std::size_t n_players = 0;
    std::vector<double> v_bias;      // indexed by coalition bitmask
    std::vector<double> v_bias_pos;
    std::vector<double> v_bias_neg;
    int favorable_sign = +1;
    std::string base_game;
    std::string explainer_form;
};

struct ShapleyBiasResult {
    std::vector<std::string> names;  // features or groups
    std::vector<double> phi_bias;
    std::vector<double> phi_bias_pos;
    std::vector<double> phi_bias_neg;
    std::vector<double> phi_bias_net;
};

namespace detail {

// One signed W1 evaluation of a per-sample explainer column split by class.
inline void bias_game_entry(std::span<const double> values,
                            std::span<const int> protected_class, int favorable_sign,
                            double& total, double& pos, double& neg) {
    const auto [e0, e1] = split_by_class(values, protected_class);
    const BiasReport r = signed_w1_report(EmpiricalDistribution::from_samples(e0),
                                          EmpiricalDistribution::from_samples(e1),
                                          favorable_sign);
    total = r.total;
    pos = r.positive;
    neg = r.negative;
}

}  // namespace detail

// Evaluates v^bias(S), v^bias±(S) for every coalition. With the shapley_sum
// form, E(S;x) = sum_{i in S} phi_i(x) from one attribution pass; with the
// direct form, E(S;x) is the base game value itself.
inline BiasGameTable build_bias_game(const ModelSpec& m, const Matrix& features,
                                     std::span<const int> protected_class,
                                     int favorable_sign, GroupExplainerForm form,
                                     const GameSpec& spec) {
    detail::check_sign(favorable_sign);
    const std::size_t n = m.arity();
    if (n > kShapleyPlayerCap)
        throw cap_error("build_bias_game: more than 20 features; use group_shapley_bias");
    const std::size_t full = std::size_t{1} << n;

    BiasGameTable table;
    table.n_players = n;
    table.favorable_sign = favorable_sign;
    table.base_game = spec.game == GameKind::marginal ? "marginal" : "conditional";
    table.explainer_form = to_string(form);
    table.v_bias.assign(full, 0.0);
    table.v_bias_pos.assign(full, 0.0);
    table.v_bias_neg.assign(full, 0.0);

    if (form == GroupExplainerForm::shapley_sum) {
        const auto attr = attribute_dataset(m, features,
                                            spec.game == GameKind::marginal
                                                ? ExplainerKind::marginal_shapley
                                                : ExplainerKind::conditional_shapley,
                                            spec);
        parallel_for(full - 1, [&](std::size_t t) {
            const std::size_t mask = t + 1;  // the empty coalition stays at zero
            std::vector<double> column(features.rows);
            for (std::size_t r = 0; r < features.rows; ++r) {
                double s = 0.0;
                const auto row = attr.values.row(r);
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (std::size_t{1} << i)) s += row[i];
                column[r] = s;
            }
            detail::bias_game_entry(column, protected_class, favorable_sign,
                                    table.v_bias[mask], table.v_bias_pos[mask],
                                    table.v_bias_neg[mask]);
        });
        return table;
    }

    if (spec.game == GameKind::marginal) {
        detail::MarginalGameEvaluator ev(m, spec.background);
        for (std::size_t mask = 1; mask < full; ++mask) {
            const auto coal = ev.prepare(static_cast<std::uint64_t>(mask));
            std::vector<double> column(features.rows);
            parallel_for(features.rows,
                         [&](std::size_t r) { column[r] = ev.value(coal, features.row(r)); });
            detail::bias_game_entry(column, protected_class, favorable_sign,
                                    table.v_bias[mask], table.v_bias_pos[mask],
                                    table.v_bias_neg[mask]);
        }
        return table;
    }

    detail::ConditionalGameEvaluator ev(m, spec.background, spec.knn_k, spec.standardize);
    for (std::size_t mask = 1; mask < full; ++mask) {
        std::vector<double> column(features.rows);
        parallel_for(features.rows, [&](std::size_t r) {
            column[r] = ev.value(static_cast<std::uint64_t>(mask), features.row(r));
        });
        detail::bias_game_entry(column, protected_class, favorable_sign,
                                table.v_bias[mask], table.v_bias_pos[mask],
                                table.v_bias_neg[mask]);
    }
    return table;
}

inline ShapleyBiasResult shapley_bias(const BiasGameTable& table,
                                      std::span<const std::string> names = {}) {
    const std::size_t n = table.n_players;
    if (table.v_bias.size() != (std::size_t{1} << n) ||
        table.v_bias_pos.size() != table.v_bias.size() ||
        table.v_bias_neg.size() != table.v_bias.size())
        throw std::invalid_argument("shapley_bias: incomplete game table");
    ShapleyBiasResult out;
    out.phi_bias = shapley(table.v_bias, n);
    out.phi_bias_pos = shapley(table.v_bias_pos, n);
    out.phi_bias_neg = shapley(table.v_bias_neg, n);
    out.phi_bias_net.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.phi_bias_net[i] = out.phi_bias_pos[i] - out.phi_bias_neg[i];
    out.names.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.names[i] = names.empty() ? "x" + std::to_string(i + 1) : names[i];
    return out;
}

// Quotient bias game: groups of the partition are the players, and each
// coalition of groups is valued through the base game on the union of its
// features.
inline ShapleyBiasResult group_shapley_bias(const ModelSpec& m, const Matrix& features,
                                            std::span<const int> protected_class,
                                            int favorable_sign,
                                            const std::vector<std::vector<std::size_t>>& partition,
                                            const GameSpec& spec,
                                            std::span<const std::string> group_names = {}) {
    detail::check_sign(favorable_sign);
    validate_partition(partition, m.arity());
    const std::size_t n_groups = partition.size();
    if (n_groups > kShapleyPlayerCap)
        throw cap_error("group_shapley_bias: more than 20 groups");
    const std::size_t full = std::size_t{1} << n_groups;

    BiasGameTable table;
    table.n_players = n_groups;
    table.favorable_sign = favorable_sign;
    table.base_game = spec.game == GameKind::marginal ? "marginal" : "conditional";
    table.explainer_form = "quotient";
    table.v_bias.assign(full, 0.0);
    table.v_bias_pos.assign(full, 0.0);
    table.v_bias_neg.assign(full, 0.0);

    std::vector<std::uint64_t> group_mask(n_groups, 0);
    for (std::size_t g = 0; g < n_groups; ++g)
        for (std::size_t i : partition[g]) group_mask[g] |= std::uint64_t{1} << i;

    auto fill = [&](auto&& value_of) {
        for (std::size_t gmask = 1; gmask < full; ++gmask) {
            std::uint64_t fmask = 0;
            for (std::size_t g = 0; g < n_groups; ++g)
                if (gmask & (std::size_t{1} << g)) fmask |= group_mask[g];
            std::vector<double> column(features.rows);
            value_of(fmask, column);
            detail::bias_game_entry(column, protected_class, favorable_sign,
                                    table.v_bias[gmask], table.v_bias_pos[gmask],
                                    table.v_bias_neg[gmask]);
        }
    };

    if (spec.game == GameKind::marginal) {
        detail::MarginalGameEvaluator ev(m, spec.background);
        fill([&](std::uint64_t fmask, std::vector<double>& column) {
            const auto coal = ev.prepare(fmask);
            parallel_for(features.rows,
                         [&](std::size_t r) { column[r] = ev.value(coal, features.row(r)); });
        });
    } else {
        detail::ConditionalGameEvaluator ev(m, spec.background, spec.knn_k, spec.standardize);
        fill([&](std::uint64_t fmask, std::vector<double>& column) {
            parallel_for(features.rows,
                         [&](std::size_t r) { column[r] = ev.value(fmask, features.row(r)); });
        });
    }

    auto result = shapley_bias(table, group_names);
    if (group_names.empty())
        for (std::size_t g = 0; g < n_groups; ++g)
            result.names[g] = "group" + std::to_string(g + 1);
    return result;
}

}  // namespace fairscope
