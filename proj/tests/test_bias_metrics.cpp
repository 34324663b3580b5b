// Model-bias metric tests: the positive/negative/net decomposition, curve
// integrals against the transport totals, parity checks, group parity, and
// renormalization.

#include <gtest/gtest.h>

#include <random>

#include "fairscope/bias_metrics.hpp"
#include "fairscope/models.hpp"
#include "test_support.hpp"

using namespace fairscope;

namespace {

// Exact curve integrals on the merged grids.
struct CurveIntegrals {
    double total = 0.0, pos = 0.0, neg = 0.0, net = 0.0;
};

CurveIntegrals integrate_classifier_curve(std::span<const double> scores,
                                          std::span<const int> cls, int sign) {
    std::vector<double> grid(scores.begin(), scores.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto curve = classifier_bias_curve(scores, cls, sign, grid);
    CurveIntegrals out;
    KahanSum pos, neg, net;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double dt = grid[i + 1] - grid[i];
        const double v = curve.signed_values[i];
        if (v > 0) pos.add(v * dt);
        if (v < 0) neg.add(-v * dt);
        net.add(v * dt);
    }
    out.pos = pos.value();
    out.neg = neg.value();
    out.net = net.value();
    out.total = out.pos + out.neg;
    return out;
}

CurveIntegrals integrate_quantile_curve(std::span<const double> scores,
                                        std::span<const int> cls, int sign) {
    const auto [s0, s1] = detail::split_by_class(scores, cls);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    CurveIntegrals out;
    KahanSum pos, neg, net;
    detail::for_each_merged_segment(d0, d1, [&](double lo, double hi, double a, double b) {
        const double v = (a - b) * sign;
        if (v > 0) pos.add(v * (hi - lo));
        if (v < 0) neg.add(-v * (hi - lo));
        net.add(v * (hi - lo));
    });
    out.pos = pos.value();
    out.neg = neg.value();
    out.net = net.value();
    out.total = out.pos + out.neg;
    return out;
}

}  // namespace

TEST(ModelBias, PointMasses) {
    const std::vector<double> scores{0.7, 0.4};
    const std::vector<int> cls{0, 1};
    const auto r = model_bias(scores, cls, +1);
    EXPECT_NEAR(r.total, 0.3, 1e-15);
    EXPECT_NEAR(r.positive, 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(r.negative, 0.0);
    EXPECT_NEAR(r.net, 0.3, 1e-15);
}

TEST(ModelBias, EqualSubpopulations) {
    const std::vector<double> scores{0.2, 0.5, 0.2, 0.5};
    const std::vector<int> cls{0, 0, 1, 1};
    const auto r = model_bias(scores, cls, -1);
    EXPECT_DOUBLE_EQ(r.total, 0.0);
    EXPECT_DOUBLE_EQ(r.positive, 0.0);
    EXPECT_DOUBLE_EQ(r.negative, 0.0);
}

TEST(ModelBias, M2TrueScoreHasBothParts) {
    const auto [data, model] = generate(SyntheticModelId::M2, {}, 200000, 17);
    const auto scores = score_rows(model, data.features);
    const auto r = model_bias(scores, data.protected_class, model.favorable_sign);
    EXPECT_GT(r.positive, 0.01);
    EXPECT_GT(r.negative, 0.01);
}

TEST(ModelBias, Errors) {
    EXPECT_THROW(model_bias(std::vector<double>{1.0}, std::vector<int>{0}, +1), data_error);
    EXPECT_THROW(model_bias(std::vector<double>{}, std::vector<int>{}, +1), data_error);
    EXPECT_THROW(model_bias(std::vector<double>{1, 2}, std::vector<int>{0, 1}, 3),
                 std::invalid_argument);
}

TEST(ClassifierCurve, VanishesOutsideSupport) {
    const std::vector<double> scores{0.3, 0.4, 0.5, 0.6};
    const std::vector<int> cls{0, 1, 0, 1};
    const std::vector<double> grid{-1.0, 0.0, 0.9, 2.0};
    const auto curve = classifier_bias_curve(scores, cls, +1, grid);
    EXPECT_DOUBLE_EQ(curve.signed_values[0], 0.0);
    EXPECT_DOUBLE_EQ(curve.signed_values[1], 0.0);
    EXPECT_DOUBLE_EQ(curve.signed_values[2], 0.0);
    EXPECT_DOUBLE_EQ(curve.signed_values[3], 0.0);
}

TEST(ClassifierCurve, M1OneSigned) {
    const auto [data, model] = generate(SyntheticModelId::M1, {}, 100000, 21);
    const auto scores = score_rows(model, data.features);
    const auto grid = default_threshold_grid(scores);
    const auto curve =
        classifier_bias_curve(scores, data.protected_class, model.favorable_sign, grid);
    for (double v : curve.signed_values) EXPECT_GE(v, 0.0);
    EXPECT_GT(*std::max_element(curve.signed_values.begin(), curve.signed_values.end()), 0.05);
}

TEST(QuantileCurve, IdenticalAndShifted) {
    const std::vector<double> same{1, 2, 3, 1, 2, 3};
    const std::vector<int> cls{0, 0, 0, 1, 1, 1};
    const std::vector<double> ps{0.25, 0.5, 0.75};
    for (double v : quantile_bias_curve(same, cls, +1, ps).signed_values)
        EXPECT_DOUBLE_EQ(v, 0.0);

    const std::vector<double> shifted{0.0, 1.0};
    const std::vector<int> two{0, 1};
    for (double v : quantile_bias_curve(shifted, two, +1, ps).signed_values)
        EXPECT_DOUBLE_EQ(v, -1.0);
    EXPECT_THROW(quantile_bias_curve(shifted, two, +1, std::vector<double>{0.0}),
                 std::invalid_argument);
}

TEST(QuantileCurve, M2ChangesSign) {
    // Same-median, different-spread subpopulations cross: the signed quantile
    // gap has opposite signs on the two sides of the median.
    const auto [data, model] = generate(SyntheticModelId::M2, {}, 100000, 31);
    const auto scores = score_rows(model, data.features);
    const std::vector<double> ps{0.1, 0.9};
    const auto curve =
        quantile_bias_curve(scores, data.protected_class, model.favorable_sign, ps);
    EXPECT_LT(curve.signed_values[0] * curve.signed_values[1], 0.0);
}

TEST(GeometricParity, PointChecks) {
    const std::vector<double> same{1, 2, 1, 2};
    const std::vector<int> cls{0, 0, 1, 1};
    for (double p : {0.1, 0.5, 0.9}) EXPECT_TRUE(geometric_parity_check(same, cls, p));

    const std::vector<double> apart{0.0, 1.0};
    const std::vector<int> two{0, 1};
    EXPECT_FALSE(geometric_parity_check(apart, two, 0.5));
}

TEST(GeometricParity, ThresholdFormMatchesStatisticalParity) {
    // Classes share the bottom half of their support: statistical parity
    // holds at t=2 and geometric parity holds at p0 = F0(2).
    const std::vector<double> scores{1, 2, 5, 6, 1, 2, 7, 8};
    const std::vector<int> cls{0, 0, 0, 0, 1, 1, 1, 1};
    const auto [s0, s1] = detail::split_by_class(scores, cls);
    const auto d0 = EmpiricalDistribution::from_samples(s0);
    const auto d1 = EmpiricalDistribution::from_samples(s1);
    EXPECT_DOUBLE_EQ(d0.cdf(2.0), d1.cdf(2.0));  // statistical parity at t=2
    EXPECT_TRUE(geometric_parity_check_at_threshold(scores, cls, 2.0));
    EXPECT_NE(d1.cdf(5.0), d0.cdf(5.0));  // no parity at t=5 either way
    EXPECT_FALSE(geometric_parity_check_at_threshold(scores, cls, 5.0));
}

TEST(GroupParity, ReductionIsBitForBit) {
    std::mt19937_64 rng(51);
    std::vector<double> scores;
    std::vector<int> cls;
    testsupport::random_scored_dataset(rng, 500, scores, cls);
    const auto direct = model_bias(scores, cls, -1);

    GroupParitySpec spec;
    spec.num_classes = 2;
    spec.events = {std::vector<std::uint8_t>(scores.size(), 1)};
    spec.weights = {{1.0}};
    const auto grouped = group_parity_bias(scores, cls, spec, -1);
    ASSERT_EQ(grouped.cells.size(), 1u);
    EXPECT_EQ(grouped.aggregate.total, direct.total);
    EXPECT_EQ(grouped.aggregate.positive, direct.positive);
    EXPECT_EQ(grouped.aggregate.negative, direct.negative);
    EXPECT_EQ(grouped.aggregate.net, direct.net);
}

TEST(GroupParity, EqualizedOddsInstantiation) {
    // Events {Y=0}, {Y=1} with uniform weights over the two cells.
    const auto [data, model] = generate(SyntheticModelId::M1, {}, 50000, 61);
    const auto scores = score_rows(model, data.features);
    GroupParitySpec spec;
    spec.num_classes = 2;
    std::vector<std::uint8_t> y0(scores.size()), y1(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        y0[i] = (*data.response)[i] == 0.0;
        y1[i] = (*data.response)[i] == 1.0;
    }
    spec.events = {y0, y1};
    spec.weights = {{0.5, 0.5}};
    const auto result =
        group_parity_bias(scores, data.protected_class, spec, model.favorable_sign);
    ASSERT_EQ(result.cells.size(), 2u);
    EXPECT_GT(result.aggregate.total, 0.0);
    EXPECT_NEAR(result.aggregate.total,
                0.5 * result.cells[0].report.total + 0.5 * result.cells[1].report.total,
                1e-12);
}

TEST(GroupParity, AllEqualSubpopulationsIsZero) {
    const std::vector<double> scores{1, 2, 1, 2, 1, 2, 1, 2};
    const std::vector<int> cls{0, 0, 1, 1, 0, 0, 1, 1};
    GroupParitySpec spec;
    spec.num_classes = 2;
    std::vector<std::uint8_t> a(8, 0), b(8, 0);
    for (int i = 0; i < 4; ++i) a[i] = 1;
    for (int i = 4; i < 8; ++i) b[i] = 1;
    spec.events = {a, b};
    spec.weights = {{0.5, 0.5}};
    const auto result = group_parity_bias(scores, cls, spec, +1);
    EXPECT_DOUBLE_EQ(result.aggregate.total, 0.0);
}

TEST(GroupParity, EmptyCellWithPositiveWeight) {
    const std::vector<double> scores{1, 2, 3, 4};
    const std::vector<int> cls{0, 0, 1, 1};
    GroupParitySpec spec;
    spec.num_classes = 2;
    spec.events = {{1, 1, 0, 0}};  // class 1 absent from the event
    spec.weights = {{1.0}};
    EXPECT_THROW(group_parity_bias(scores, cls, spec, +1), data_error);
    spec.events = {{1, 1, 0, 0}, {0, 0, 1, 1}};
    spec.weights = {{0.0, 1.0}};  // zero-weight empty cells are allowed
    EXPECT_THROW(group_parity_bias(scores, cls, spec, +1), data_error);
}

TEST(GroupParity, MultiClass) {
    const std::vector<double> scores{0.1, 0.2, 0.4, 0.5, 0.8, 0.9};
    const std::vector<int> cls{0, 0, 1, 1, 2, 2};
    GroupParitySpec spec;
    spec.num_classes = 3;
    spec.events = {std::vector<std::uint8_t>(6, 1)};
    spec.weights = {{0.5}, {0.5}};
    const auto result = group_parity_bias(scores, cls, spec, +1);
    ASSERT_EQ(result.cells.size(), 2u);
    EXPECT_NEAR(result.aggregate.total,
                0.5 * (result.cells[0].report.total + result.cells[1].report.total), 1e-12);
}

TEST(Renormalized, LinkBehaviour) {
    BiasReport r;
    r.total = 0.0;
    EXPECT_DOUBLE_EQ(renormalized_bias(r, 1.0), 0.0);
    r.total = 0.4;
    EXPECT_DOUBLE_EQ(renormalized_bias(r, 1.0), 0.4);
    r.total = 5.0;
    const double g5 = renormalized_bias(r, 1.0);
    r.total = 15.0;
    const double g15 = renormalized_bias(r, 1.0);
    EXPECT_LT(g5, g15);  // strictly increasing toward the limit 1
    EXPECT_LT(g15, 1.0);
    EXPECT_GT(g5, 0.999);
    r.total = 1e9;
    EXPECT_LE(renormalized_bias(r, 1.0), 1.0);
    r.total = 0.7;
    EXPECT_GT(renormalized_bias(r, 1.0), 0.5);
    EXPECT_THROW(renormalized_bias(r, 0.0), std::invalid_argument);
}

// --- identities -------------------------------------------------------------

TEST(Identities, DecompositionAndCurveIntegrals) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores;
        std::vector<int> cls;
        testsupport::random_scored_dataset(rng, 200 + trial, scores, cls);
        const int sign = trial % 2 == 0 ? +1 : -1;
        const auto r = model_bias(scores, cls, sign);

        EXPECT_NEAR(r.total, r.positive + r.negative, 1e-10);
        EXPECT_NEAR(r.net, r.positive - r.negative, 1e-10);

        const auto ci = integrate_classifier_curve(scores, cls, sign);
        const auto qi = integrate_quantile_curve(scores, cls, sign);
        EXPECT_NEAR(ci.total, r.total, 1e-9);
        EXPECT_NEAR(qi.total, r.total, 1e-9);
        EXPECT_NEAR(ci.pos, r.positive, 1e-9);
        EXPECT_NEAR(qi.pos, r.positive, 1e-9);
        EXPECT_NEAR(ci.net, r.net, 1e-9);

        // Flipping the favorable sign swaps the parts and negates the net.
        const auto f = model_bias(scores, cls, -sign);
        EXPECT_DOUBLE_EQ(f.total, r.total);
        EXPECT_DOUBLE_EQ(f.positive, r.negative);
        EXPECT_DOUBLE_EQ(f.negative, r.positive);
        EXPECT_DOUBLE_EQ(f.net, -r.net);
    }
}

TEST(Identities, UnitIntervalScores) {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores(300);
        std::vector<int> cls(300);
        for (std::size_t i = 0; i < 300; ++i) {
            scores[i] = u(rng);
            cls[i] = i % 3 == 0 ? 1 : 0;
        }
        const auto r = model_bias(scores, cls, -1);
        EXPECT_GE(r.total, 0.0);
        EXPECT_LE(r.total, 1.0);
        EXPECT_LE(r.positive, 1.0);
        EXPECT_LE(r.negative, 1.0);
    }
}
