#pragma once
// Exact 1-D optimal transport on weighted empirical measures: CDFs,
// generalized inverses, W_q via merged quantile breakpoints, the monotone
// coupling, and the signed left/right effort decomposition.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairscope/core.hpp"

namespace fairscope {

// A probability measure on the real line given by atoms. Values are sorted
// ascending (ties are atoms split across entries), weights are positive and
// sum to one. Immutable after construction.
class EmpiricalDistribution {
public:
    static EmpiricalDistribution from_samples(std::span<const double> values,
                                              std::span<const double> weights = {}) {
        if (values.empty())
            throw std::invalid_argument("EmpiricalDistribution: empty sample");
        if (!weights.empty() && weights.size() != values.size())
            throw std::invalid_argument("EmpiricalDistribution: weight/value length mismatch");
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("EmpiricalDistribution: non-finite value");

        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

        EmpiricalDistribution d;
        d.values_.reserve(values.size());
        d.weights_.reserve(values.size());

        KahanSum total;
        for (std::size_t i : order) {
            const double w = weights.empty() ? 1.0 : weights[i];
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument("EmpiricalDistribution: non-positive weight");
            d.values_.push_back(values[i]);
            d.weights_.push_back(w);
            total.add(w);
        }
        const double t = total.value();
        KahanSum cum;
        for (double& w : d.weights_) {
            w /= t;
            // Silent mass loss would corrupt the effort decomposition.
            if (w < 1e-15)
                throw std::invalid_argument("EmpiricalDistribution: weight underflow after normalization");
            cum.add(w);
            d.cum_.push_back(cum.value());
        }
        if (std::abs(d.cum_.back() - 1.0) > 1e-12)
            throw std::invalid_argument("EmpiricalDistribution: weights do not normalize");
        d.cum_.back() = 1.0;  // pin the last breakpoint so merges terminate exactly
        return d;
    }

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> cumulative() const { return cum_; }
    double min() const { return values_.front(); }
    double max() const { return values_.back(); }

    double mean() const {
        KahanSum s;
        for (std::size_t i = 0; i < values_.size(); ++i) s.add(values_[i] * weights_[i]);
        return s.value();
    }

    // Right-continuous F(t) = total weight of atoms with value <= t.
    double cdf(double t) const {
        const auto it = std::upper_bound(values_.begin(), values_.end(), t);
        if (it == values_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }

    // Left-continuous generalized inverse F^{[-1]}(p) = inf{x : p <= F(x)}.
    double quantile(double p) const {
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("quantile: p must lie in (0,1]");
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), p);
        const std::size_t idx = it == cum_.end()
                                    ? values_.size() - 1
                                    : static_cast<std::size_t>(it - cum_.begin());
        return values_[idx];
    }

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> cum_;
};

// Raw q-th-power transport costs split by direction (the q-th root is the
// caller's). left/right refer to where mass of d0 moves to reach d1.
struct TransportDecomposition {
    double total = 0.0;
    double left_effort = 0.0;
    double right_effort = 0.0;
    int order = 1;
};

// The unique order-preserving coupling, as quantile segments over (0,1].
struct MonotoneCoupling {
    struct Segment {
        double p_lo;
        double p_hi;
        double source_value;
        double target_value;
    };
    std::vector<Segment> segments;

    double cost(int q = 1) const {
        KahanSum s;
        for (const auto& seg : segments) {
            const double d = std::abs(seg.source_value - seg.target_value);
            s.add((q == 1 ? d : std::pow(d, q)) * (seg.p_hi - seg.p_lo));
        }
        return s.value();
    }
};

namespace detail {

// Walks the merged cumulative-weight breakpoints of two distributions and
// visits each segment (p_lo, p_hi] with the (constant) quantiles on it.
// Quantiles are left-continuous, so the segment carries the value at p_hi.
template <typename Fn>
void for_each_merged_segment(const EmpiricalDistribution& d0,
                             const EmpiricalDistribution& d1, Fn&& fn) {
    const auto c0 = d0.cumulative();
    const auto c1 = d1.cumulative();
    const auto v0 = d0.values();
    const auto v1 = d1.values();
    std::size_t i = 0, j = 0;
    double prev = 0.0;
    while (i < c0.size() && j < c1.size()) {
        const double end = std::min(c0[i], c1[j]);
        if (end > prev) fn(prev, end, v0[i], v1[j]);
        if (c0[i] == end) ++i;
        if (c1[j] == end) ++j;
        prev = end;
    }
}

inline double pow_cost(double d, int q) {
    if (q == 1) return d;
    if (q == 2) return d * d;
    return std::pow(d, q);
}

}  // namespace detail

// Exact W_q from the quantile representation over merged breakpoints.
inline double wasserstein(const EmpiricalDistribution& d0,
                          const EmpiricalDistribution& d1, int q = 1) {
    if (q < 1) throw std::invalid_argument("wasserstein: order q must be >= 1");
    KahanSum s;
    detail::for_each_merged_segment(d0, d1, [&](double lo, double hi, double a, double b) {
        if (a != b) s.add(detail::pow_cost(std::abs(a - b), q) * (hi - lo));
    });
    const double raw = s.value();
    if (q == 1) return raw;
    if (q == 2) return std::sqrt(raw);
    return std::pow(raw, 1.0 / q);
}

// Directional split of the raw q-th-power cost under the monotone plan.
// Segments with equal quantiles contribute to neither side; the comparison is
// exact since empirical quantiles are data values.
inline TransportDecomposition signed_efforts(const EmpiricalDistribution& d0,
                                             const EmpiricalDistribution& d1,
                                             int q = 1) {
    if (q < 1) throw std::invalid_argument("signed_efforts: order q must be >= 1");
    KahanSum left, right;
    detail::for_each_merged_segment(d0, d1, [&](double lo, double hi, double a, double b) {
        if (b > a)
            right.add(detail::pow_cost(b - a, q) * (hi - lo));
        else if (b < a)
            left.add(detail::pow_cost(a - b, q) * (hi - lo));
    });
    TransportDecomposition out;
    out.left_effort = left.value();
    out.right_effort = right.value();
    out.total = out.left_effort + out.right_effort;
    out.order = q;
    return out;
}

inline MonotoneCoupling monotone_coupling(const EmpiricalDistribution& d0,
                                          const EmpiricalDistribution& d1) {
    MonotoneCoupling mc;
    detail::for_each_merged_segment(d0, d1, [&](double lo, double hi, double a, double b) {
        mc.segments.push_back({lo, hi, a, b});
    });
    return mc;
}

// Exact integral of |F0 - F1| over the union of supports; equals W_1.
inline double cdf_distance_integral(const EmpiricalDistribution& d0,
                                    const EmpiricalDistribution& d1) {
    const auto v0 = d0.values();
    const auto v1 = d1.values();
    const auto c0 = d0.cumulative();
    const auto c1 = d1.cumulative();
    KahanSum s;
    std::size_t i = 0, j = 0;
    double prev_t = 0.0;
    bool have_prev = false;
    double f0 = 0.0, f1 = 0.0;
    // CDFs are constant between merged support points; step through them.
    while (i < v0.size() || j < v1.size()) {
        const double t = (j >= v1.size() || (i < v0.size() && v0[i] <= v1[j])) ? v0[i] : v1[j];
        if (have_prev && t > prev_t) s.add(std::abs(f0 - f1) * (t - prev_t));
        while (i < v0.size() && v0[i] == t) f0 = c0[i++];
        while (j < v1.size() && v1[j] == t) f1 = c1[j++];
        prev_t = t;
        have_prev = true;
    }
    return s.value();
}

// W_1 / L on L-bounded supports (the randomized-classifier distance identity).
inline double d_rc_bounded(const EmpiricalDistribution& d0,
                           const EmpiricalDistribution& d1, double L) {
    if (!(L > 0.0)) throw std::invalid_argument("d_rc_bounded: L must be positive");
    const double lo = std::min(d0.min(), d1.min());
    const double hi = std::max(d0.max(), d1.max());
    if (hi - lo > L)
        throw std::domain_error("d_rc_bounded: support width exceeds L");
    return wasserstein(d0, d1, 1) / L;
}

}  // namespace fairscope
