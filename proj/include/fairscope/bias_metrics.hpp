#pragma once
// Distribution-level model bias: W1 total with positive/negative/net split,
// classifier and quantile bias curves, group-based parity bias, and
// renormalization.

#include <functional>
#include <string>

#include "fairscope/core.hpp"
#include "fairscope/empirical.hpp"

namespace fairscope {

struct BiasReport {
    double total = 0.0;
    double positive = 0.0;
    double negative = 0.0;
    double net = 0.0;
    int favorable_sign = +1;
    std::string metric = "W1";
};

enum class CurveKind { classifier, quantile };

struct BiasCurve {
    std::vector<double> grid;          // thresholds t or probabilities p
    std::vector<double> signed_values;
    CurveKind kind = CurveKind::classifier;
};

namespace detail {

inline void check_sign(int favorable_sign) {
    if (favorable_sign != 1 && favorable_sign != -1)
        throw std::invalid_argument("favorable_sign must be +1 or -1");
}

// Splits values by binary protected class; throws if a class is missing.
inline std::pair<std::vector<double>, std::vector<double>> split_by_class(
    std::span<const double> values, std::span<const int> protected_class) {
    if (values.size() != protected_class.size())
        throw std::invalid_argument("values/protected length mismatch");
    if (values.empty()) throw data_error("empty input");
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (protected_class[i] == 0)
            out.first.push_back(values[i]);
        else
            out.second.push_back(values[i]);
    }
    if (out.first.empty() || out.second.empty())
        throw data_error("both protected classes must be present");
    return out;
}

// Favorability mapping of the directional efforts for transporting the
// class-0 distribution into the class-1 distribution: the positive part is
// the effort spent moving class 0 in the non-favorable direction.
inline BiasReport signed_w1_report(const EmpiricalDistribution& d0,
                                   const EmpiricalDistribution& d1, int favorable_sign) {
    check_sign(favorable_sign);
    const auto eff = signed_efforts(d0, d1, 1);
    BiasReport r;
    r.favorable_sign = favorable_sign;
    r.total = eff.total;
    r.positive = favorable_sign > 0 ? eff.left_effort : eff.right_effort;
    r.negative = favorable_sign > 0 ? eff.right_effort : eff.left_effort;
    r.net = r.positive - r.negative;
    return r;
}

}  // namespace detail

inline BiasReport model_bias(std::span<const double> scores,
                             std::span<const int> protected_class, int favorable_sign) {
    if (!all_finite(scores)) throw std::invalid_argument("model_bias: non-finite score");
    const auto [s0, s1] = detail::split_by_class(scores, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    BiasReport r = detail::signed_w1_report(d0, d1, favorable_sign);
    // Net must agree with the signed mean gap (an independent route).
    const double mean_net = favorable_sign * (d0.mean() - d1.mean());
    if (std::abs(mean_net - r.net) > 1e-9 * std::max(1.0, r.total))
        throw std::logic_error("model_bias: net/mean-gap identity violated");
    return r;
}

// Signed statistical-parity bias (F1(t) - F0(t)) * sign at each grid point.
inline BiasCurve classifier_bias_curve(std::span<const double> scores,
                                       std::span<const int> protected_class,
                                       int favorable_sign, std::span<const double> grid) {
    detail::check_sign(favorable_sign);
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("classifier_bias_curve: grid must be sorted");
    const auto [s0, s1] = detail::split_by_class(scores, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    BiasCurve c;
    c.kind = CurveKind::classifier;
    c.grid.assign(grid.begin(), grid.end());
    c.signed_values.reserve(grid.size());
    for (double t : grid)
        c.signed_values.push_back((d1.cdf(t) - d0.cdf(t)) * favorable_sign);
    return c;
}

// Signed quantile gaps (F0^{[-1]}(p) - F1^{[-1]}(p)) * sign on p_grid.
inline BiasCurve quantile_bias_curve(std::span<const double> scores,
                                     std::span<const int> protected_class,
                                     int favorable_sign, std::span<const double> p_grid) {
    detail::check_sign(favorable_sign);
    const auto [s0, s1] = detail::split_by_class(scores, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    BiasCurve c;
    c.kind = CurveKind::quantile;
    c.grid.assign(p_grid.begin(), p_grid.end());
    c.signed_values.reserve(p_grid.size());
    for (double p : p_grid) {
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("quantile_bias_curve: p outside (0,1)");
        c.signed_values.push_back((d0.quantile(p) - d1.quantile(p)) * favorable_sign);
    }
    return c;
}

// All distinct score values plus midpoints; integrating the curve on this
// grid is exact because the CDFs only change at sample values.
inline std::vector<double> default_threshold_grid(std::span<const double> scores) {
    std::vector<double> v(scores.begin(), scores.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> grid;
    grid.reserve(v.size() * 2);
    for (std::size_t i = 0; i < v.size(); ++i) {
        grid.push_back(v[i]);
        if (i + 1 < v.size()) grid.push_back(v[i] + 0.5 * (v[i + 1] - v[i]));
    }
    return grid;
}

// True iff the signed quantile bias at p vanishes (exact-empirical tolerance).
inline bool geometric_parity_check(std::span<const double> scores,
                                   std::span<const int> protected_class, double p,
                                   double tolerance = 1e-12) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("geometric_parity_check: p outside (0,1)");
    const auto [s0, s1] = detail::split_by_class(scores, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    return std::abs(d0.quantile(p) - d1.quantile(p)) <= tolerance;
}

// Threshold form: parity at p0 = F_0(t).
inline bool geometric_parity_check_at_threshold(std::span<const double> scores,
                                                std::span<const int> protected_class,
                                                double t, double tolerance = 1e-12) {
    const auto [s0, s1] = detail::split_by_class(scores, protected_class);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const double p0 = d0.cdf(t);
    if (!(p0 > 0.0) || !(p0 < 1.0))
        throw std::invalid_argument("geometric_parity_check: threshold outside support");
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    return std::abs(d0.quantile(p0) - d1.quantile(p0)) <= tolerance;
}

// Generalized group-based parity: disjoint events A_m crossed with protected
// classes; each included (k,m) cell contributes the W1 report between
// f|A_{0m} and f|A_{km}, weighted.
struct GroupParitySpec {
    int num_classes = 2;                          // protected labels 0..K-1
    std::vector<std::vector<std::uint8_t>> events;  // M masks over samples
    std::vector<std::vector<double>> weights;     // (K-1) x M, sums to 1
};

struct GroupParityCell {
    int protected_label = 1;
    std::size_t event = 0;
    double weight = 0.0;
    BiasReport report;
};

struct GroupParityResult {
    std::vector<GroupParityCell> cells;
    BiasReport aggregate;
};

inline GroupParityResult group_parity_bias(std::span<const double> scores,
                                           std::span<const int> protected_class,
                                           const GroupParitySpec& spec,
                                           int favorable_sign) {
    detail::check_sign(favorable_sign);
    if (spec.num_classes < 2) throw std::invalid_argument("group_parity: K must be >= 2");
    if (spec.events.empty()) throw std::invalid_argument("group_parity: no events");
    const std::size_t N = scores.size();
    if (protected_class.size() != N)
        throw std::invalid_argument("group_parity: length mismatch");
    for (const auto& ev : spec.events)
        if (ev.size() != N) throw std::invalid_argument("group_parity: bad event mask length");
    for (std::size_t i = 0; i < N; ++i) {
        int hit = 0;
        for (const auto& ev : spec.events) hit += ev[i] ? 1 : 0;
        if (hit > 1) throw std::invalid_argument("group_parity: events must be disjoint");
    }
    const std::size_t M = spec.events.size();
    if (spec.weights.size() != static_cast<std::size_t>(spec.num_classes - 1))
        throw std::invalid_argument("group_parity: weight row per protected class expected");
    KahanSum wsum;
    for (const auto& row : spec.weights) {
        if (row.size() != M) throw std::invalid_argument("group_parity: weight shape mismatch");
        for (double w : row) {
            if (w < 0.0) throw std::invalid_argument("group_parity: negative weight");
            wsum.add(w);
        }
    }
    if (std::abs(wsum.value() - 1.0) > 1e-12)
        throw std::invalid_argument("group_parity: weights must sum to 1");

    GroupParityResult out;
    out.aggregate.favorable_sign = favorable_sign;
    KahanSum total, pos, neg;
    for (int k = 1; k < spec.num_classes; ++k) {
        for (std::size_t m = 0; m < M; ++m) {
            const double w = spec.weights[static_cast<std::size_t>(k - 1)][m];
            std::vector<double> s0, sk;
            for (std::size_t i = 0; i < N; ++i) {
                if (!spec.events[m][i]) continue;
                if (protected_class[i] == 0) s0.push_back(scores[i]);
                if (protected_class[i] == k) sk.push_back(scores[i]);
            }
            if (s0.empty() || sk.empty()) {
                if (w > 0.0) throw data_error("group_parity: empty cell with positive weight");
                continue;
            }
            GroupParityCell cell;
            cell.protected_label = k;
            cell.event = m;
            cell.weight = w;
            cell.report = detail::signed_w1_report(EmpiricalDistribution::from_samples(s0),
                                                   EmpiricalDistribution::from_samples(sk),
                                                   favorable_sign);
            total.add(w * cell.report.total);
            pos.add(w * cell.report.positive);
            neg.add(w * cell.report.negative);
            out.cells.push_back(std::move(cell));
        }
    }
    out.aggregate.total = total.value();
    out.aggregate.positive = pos.value();
    out.aggregate.negative = neg.value();
    out.aggregate.net = out.aggregate.positive - out.aggregate.negative;
    out.aggregate.metric = "W1,A";
    return out;
}

// Identity on [0, 0.5], then strictly increasing to 1 (C1 at the junction).
inline double default_renormalization_link(double x) {
    return x <= 0.5 ? x : 1.0 - 0.5 * std::exp(-2.0 * (x - 0.5));
}

inline double renormalized_bias(const BiasReport& report, double L,
                                const std::function<double(double)>& link =
                                    default_renormalization_link) {
    if (!(L > 0.0)) throw std::invalid_argument("renormalized_bias: L must be positive");
    return link(report.total / L);
}

}  // namespace fairscope
