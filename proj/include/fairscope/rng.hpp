#pragma once
// Counter-based uniform stream plus inverse-CDF normal sampling. Every draw is
// a pure function of (seed, stream, counter), so datasets are reproducible
// bit-for-bit regardless of generation order.

#include <cstdint>
#include <cmath>

namespace fairscope {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::splitmix64(detail::splitmix64(seed) ^
                                  (0xA0761D6478BD642Full * (stream + 1)))) {}

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform(std::uint64_t counter) const {
        const std::uint64_t bits = detail::splitmix64(key_ + counter);
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal(std::uint64_t counter, double mean = 0.0, double stddev = 1.0) const {
        return mean + stddev * inverse_normal_cdf(uniform(counter));
    }

    bool bernoulli(std::uint64_t counter, double p) const {
        return uniform(counter) < p;
    }

    // Acklam's rational approximation to the standard normal quantile,
    // polished with one Halley step against erfc (near machine precision).
    static double inverse_normal_cdf(double p) {
        static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                       -2.759285104469687e+02, 1.383577518672690e+02,
                                       -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                       -1.556989798598866e+02, 6.680131188771972e+01,
                                       -1.328068155288572e+01};
        static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                       -2.400758277161838e+00, -2.549732539343734e+00,
                                       4.374664141464968e+00,  2.938163982698783e+00};
        static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                       2.445134137142996e+00, 3.754408661907416e+00};
        constexpr double p_low = 0.02425;

        double x;
        if (p < p_low) {
            const double q = std::sqrt(-2.0 * std::log(p));
            x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        } else if (p <= 1.0 - p_low) {
            const double q = p - 0.5;
            const double r = q * q;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        } else {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }

        // Halley refinement: e = Phi(x) - p.
        const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
        return x - u / (1.0 + x * u / 2.0);
    }

private:
    std::uint64_t key_;
};

}  // namespace fairscope
