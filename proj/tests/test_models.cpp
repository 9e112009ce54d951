#include "deltahjb/errors.hpp"
#include "deltahjb/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

using namespace deltahjb;

namespace {

// Derivatives of f(x, v) = x^2 v + 3 v^2 at a point, keyed by multi-index.
DerivativeFn poly_derivs(double x, double v) {
    return [x, v](std::span<const int> a) {
        const int ax = a[0], av = a[1];
        if (ax == 0 && av == 0) return x * x * v + 3 * v * v;
        if (ax == 1 && av == 0) return 2 * x * v;
        if (ax == 2 && av == 0) return 2 * v;
        if (ax == 0 && av == 1) return x * x + 6 * v;
        if (ax == 0 && av == 2) return 6.0;
        if (ax == 1 && av == 1) return 2 * x;
        return 0.0;
    };
}

}  // namespace

TEST(Generator, HestonInvestmentMatchesHandExpansion) {
    const HestonParams p;
    const auto g = heston_investment_generator(p);
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(g.dim, 2);
    const double x = 2.0, v = 0.4, pi = 0.7;
    const double st[2] = {x, v};
    const double got = apply_generator(g, 0.0, st, {pi, 0.0}, poly_derivs(x, v));
    const double want = p.lambda * pi * v * x * (2 * x * v) + p.kappa * (p.theta - v) * (x * x + 6 * v) +
                        0.5 * pi * pi * v * x * x * (2 * v) + 0.5 * p.sigma * p.sigma * v * 6.0 +
                        p.rho * p.sigma * pi * x * v * (2 * x);
    EXPECT_NEAR(got, want, 1e-12);
}

TEST(Generator, ReinsuranceAddsRateAndInsuranceTerms) {
    const HestonParams p;
    const ReinsuranceParams q;
    const auto base = heston_investment_generator(p);
    const auto g = reinsurance_heston_generator(p, q);
    EXPECT_EQ(g.controls.size(), 2u);
    EXPECT_TRUE(g.controls[kQ].floor_at_zero);
    const double x = 2.0, v = 0.4, pi = 0.7, qq = 0.3;
    const double st[2] = {x, v};
    const double diff = apply_generator(g, 0.0, st, {pi, qq}, poly_derivs(x, v)) -
                        apply_generator(base, 0.0, st, {pi, qq}, poly_derivs(x, v));
    const double want = q.r * x * (2 * x * v) + q.c * q.vartheta * qq * x * (2 * x * v) +
                        0.5 * q.b * q.b * qq * qq * x * x * (2 * v);
    EXPECT_NEAR(diff, want, 1e-12);
}

TEST(Generator, ValidateRejectsBrokenTerms) {
    auto g = heston_investment_generator(HestonParams{});
    auto bad = g;
    bad.terms[0].deriv = {0, 0};
    EXPECT_THROW(bad.validate(), InputError);
    bad = g;
    bad.terms[0].deriv = {2, 1};
    EXPECT_THROW(bad.validate(), InputError);
    bad = g;
    bad.terms[0].control_powers = {0, 1};
    EXPECT_THROW(bad.validate(), InputError);
    bad = g;
    bad.terms.erase(bad.terms.begin() + 2);  // drop the pi^2 term
    EXPECT_THROW(bad.validate(), InputError);
}

TEST(Generator, DerivativeSetIsDistinct) {
    const auto g = heston_investment_generator(HestonParams{});
    const auto d = g.derivative_set();
    EXPECT_EQ(d.size(), 5u);
}

TEST(Params, Validation) {
    HestonParams h;
    h.v0 = 0.0;
    EXPECT_THROW(h.validate(), InputError);
    h = HestonParams{};
    h.rho = -1.5;
    EXPECT_THROW(h.validate(), InputError);
    h = HestonParams{};
    h.sigma = 0.0;
    h.kappa = 0.0;
    EXPECT_NO_THROW(h.validate());
    ReinsuranceParams q;
    q.vartheta = 0.2;
    EXPECT_THROW(q.validate(), InputError);
}

TEST(Utility, PowerAndThreshold) {
    const PowerUtility u{0.5, 1.0};
    EXPECT_DOUBLE_EQ(u(5.0), 4.0);
    EXPECT_DOUBLE_EQ(u(1.0), 0.0);
    EXPECT_EQ(u(0.5), -std::numeric_limits<double>::infinity());
}

TEST(Kernel, GeometricCellsPreserveMass) {
    const double alpha = 0.6, gmax = 50.0;
    const auto k = kernel_nodes(alpha, 3, gmax);
    ASSERT_EQ(k.factors(), 3);
    double mass = 0.0;
    for (int i = 0; i < 3; ++i) {
        EXPECT_GT(k.weights[i], 0.0);
        if (i) EXPECT_GT(k.rates[i], k.rates[i - 1]);
        mass += k.weights[i];
    }
    const double want = std::pow(gmax, 1 - alpha) / ((1 - alpha) * std::tgamma(alpha) * std::tgamma(1 - alpha));
    EXPECT_NEAR(mass, want, 1e-12 * want);
    // Cell centroids lie inside the geometric cells.
    EXPECT_LT(k.rates[0], std::pow(gmax, 1.0 / 3));
    EXPECT_GT(k.rates[2], std::pow(gmax, 2.0 / 3));
    EXPECT_THROW(kernel_nodes(1.2, 3, gmax), InputError);
    EXPECT_THROW(kernel_nodes(0.6, 3, 0.5), InputError);
}

TEST(Kernel, MoreFactorsApproximateBetter) {
    const double alpha = 0.6, t = 0.5;
    const double exact = fractional_kernel(alpha, t);
    const double e3 = std::abs(smoothed_kernel(kernel_nodes(alpha, 3, 50.0), t) - exact);
    const double e20 = std::abs(smoothed_kernel(kernel_nodes(alpha, 20, 5000.0), t) - exact);
    EXPECT_LT(e20, e3);
    EXPECT_LT(e20 / exact, 0.05);
}

TEST(Kernel, LiftedVariance) {
    RoughKernelApprox k;
    k.alpha = 1.0;
    k.weights = {1.0, 2.0};
    k.rates = {0.0, 1.0};
    k.heston.v0 = 0.02;
    k.heston.kappa = 0.3;
    k.heston.theta = 0.02;
    EXPECT_NEAR(xi_curve(k, 1.0), 0.02 + 0.3 * 0.02, 1e-15);
    const double st[3] = {1.0, 0.1, -0.05};
    EXPECT_NEAR(lifted_variance(k, 0.0, st), 0.02 + 0.1 - 0.1, 1e-15);
}

TEST(Generator, RoughHasOneVarianceAxisPerFactor) {
    auto k = kernel_nodes(0.6, 3, 50.0);
    const auto g = rough_multifactor_generator(k, ReinsuranceParams{});
    EXPECT_EQ(g.dim, 4);
    EXPECT_NO_THROW(g.validate());
    const auto plain = rough_multifactor_generator(k, std::nullopt);
    EXPECT_EQ(plain.controls.size(), 1u);
}

TEST(Slv, PresetsAndDiscountTerm) {
    SLVPresetParams p;
    for (const char* name : {"heston", "four_two", "alpha_hyper", "sabr"}) {
        const auto m = slv_preset(name, p);
        const auto g = slv_generator(m);
        EXPECT_NO_THROW(g.validate()) << name;
        EXPECT_EQ(g.dim, 3);
    }
    EXPECT_THROW(slv_preset("bogus", p), InputError);

    // Only the -gamma f term acts on a constant.
    const auto g = slv_generator(slv_preset("heston", p));
    const double st[3] = {2.0, 1.0, 0.3};
    const double got = apply_generator(g, 0.0, st, {0.5, 0.0}, [](std::span<const int> a) {
        return (a[0] + a[1] + a[2] == 0) ? 1.0 : 0.0;
    });
    EXPECT_NEAR(got, -p.gamma, 1e-15);
}

TEST(Reinsurance, WealthShiftConvertsInitialWealth) {
    const ReinsuranceParams q;
    EXPECT_NEAR(5.0 + wealth_shift(q, 1.0, 0.0), 4.975, 1e-3);
    EXPECT_DOUBLE_EQ(wealth_shift(q, 1.0, 1.0), 0.0);
    EXPECT_THROW(wealth_shift(q, 1.0, 2.0), InputError);
}
