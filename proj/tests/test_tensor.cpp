#include "deltahjb/errors.hpp"
#include "deltahjb/kernels.hpp"
#include "deltahjb/reference.hpp"
#include "deltahjb/tensor.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace deltahjb;

namespace {

const DomainBox kBox{{0.5, 5.5}, {0.15, 1.65}};

double poly(std::span<const double> s) { return 1.0 + s[0] * s[0] * s[1] - 0.3 * std::pow(s[1], 3) + s[0]; }

}  // namespace

TEST(DomainBox, ClampAndContains) {
    std::vector<double> s{6.0, 0.1};
    EXPECT_FALSE(kBox.contains(s));
    EXPECT_TRUE(kBox.clamp(s));
    EXPECT_DOUBLE_EQ(s[0], 5.5);
    EXPECT_DOUBLE_EQ(s[1], 0.15);
    EXPECT_TRUE(kBox.contains(s));
    EXPECT_FALSE(kBox.clamp(s));
}

TEST(CoefficientTensor, IndexRoundTrip) {
    CoefficientTensor t({3, 4, 2}, DomainBox{{0, 1}, {0, 1}, {0, 1}});
    EXPECT_EQ(t.size(), 4u * 5u * 3u);
    std::vector<int> k(3);
    for (std::size_t f = 0; f < t.size(); ++f) {
        t.multi_index(f, k);
        EXPECT_EQ(t.flat_index(k), f);
    }
    const int bad[3] = {4, 0, 0};
    EXPECT_THROW(t.flat_index(bad), InputError);
    EXPECT_THROW(CoefficientTensor({2}, kBox), InputError);
}

TEST(Project, ReproducesPolynomialsExactly) {
    const auto t = project(poly, kBox, {4, 4}, gauss_legendre(10));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.5, 5.5), uv(0.15, 1.65);
    for (int i = 0; i < 50; ++i) {
        const double s[2] = {ux(rng), uv(rng)};
        EXPECT_NEAR(reconstruct(t, s), poly(s), 1e-11);
    }
}

TEST(Project, ConstantHasSingleCoefficient) {
    // No Jacobian: the constant 1 maps to V_0 = 2 in two dimensions (each g_0 = 1/sqrt(2)).
    const auto t = project([](std::span<const double>) { return 1.0; }, kBox, {3, 3}, gauss_legendre(8));
    EXPECT_NEAR(t.values()[0], 2.0, 1e-14);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t.values()[i], 0.0, 1e-14);
}

TEST(Project, NonFiniteValueIsReported) {
    auto f = [](std::span<const double> s) { return s[0] > 3.0 ? std::log(-1.0) : 1.0; };
    EXPECT_THROW(project(f, kBox, {2, 2}, gauss_legendre(4)), ProjectionError);
}

TEST(Reconstruct, OutsideBoxThrows) {
    const auto t = project(poly, kBox, {2, 2}, gauss_legendre(4));
    const double s[2] = {7.0, 0.5};
    EXPECT_THROW(reconstruct(t, s), DomainError);
}

TEST(LinearCombine, Entrywise) {
    const auto a = project(poly, kBox, {3, 3}, gauss_legendre(6));
    const auto b = project([](std::span<const double> s) { return s[1]; }, kBox, {3, 3}, gauss_legendre(6));
    const auto c = tensor_linear_combine(2.0, a, -1.0, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_DOUBLE_EQ(c.values()[i], 2.0 * a.values()[i] - b.values()[i]);
    const auto other = project(poly, kBox, {2, 3}, gauss_legendre(6));
    EXPECT_THROW(tensor_linear_combine(1.0, a, 1.0, other), InputError);
}

TEST(TensorCsv, RoundTripIsBitwise) {
    auto t = project([](std::span<const double> s) { return std::exp(s[0] / 3.0) * std::sin(s[1]); }, kBox, {5, 3},
                     gauss_legendre(12));
    t.set_time_index(17);
    std::stringstream ss;
    write_tensor_csv(ss, t);
    const auto back = read_tensor_csv(ss);
    ASSERT_TRUE(back.same_shape(t));
    EXPECT_EQ(back.box(), t.box());
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back.values()[i], t.values()[i]);
    std::stringstream bad("nonsense\n");
    EXPECT_THROW(read_tensor_csv(bad), InputError);
}

TEST(SpectralGrid, ProjectMatchesNaive) {
    const std::vector<int> orders{6, 5};
    const SpectralGrid grid(kBox, orders, {gauss_legendre(9), gauss_legendre(9)});
    std::vector<double> nodal(grid.num_nodes()), st(2);
    auto f = [](std::span<const double> s) { return std::exp(-s[0]) * (1.0 + s[1] * s[1]); };
    for (std::size_t q = 0; q < nodal.size(); ++q) {
        grid.node_state(q, st);
        nodal[q] = f(st);
    }
    const auto fast = grid.project(nodal);
    const auto naive = reference::project_naive(f, kBox, orders, 9);
    ASSERT_EQ(fast.size(), naive.size());
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], naive[i], 1e-13);
}

TEST(SpectralGrid, DerivativesIncludeChainRule) {
    const SpectralGrid grid(kBox, {4, 4}, {gauss_legendre(8), gauss_legendre(8)});
    const auto t = project(poly, kBox, {4, 4}, gauss_legendre(8));
    const int dx[2] = {1, 0}, dxx[2] = {2, 0}, dxv[2] = {1, 1}, dvv[2] = {0, 2};
    const auto gx = grid.evaluate(t.values(), dx), gxx = grid.evaluate(t.values(), dxx);
    const auto gxv = grid.evaluate(t.values(), dxv), gvv = grid.evaluate(t.values(), dvv);
    std::vector<double> s(2);
    for (std::size_t q = 0; q < grid.num_nodes(); ++q) {
        grid.node_state(q, s);
        EXPECT_NEAR(gx[q], 2.0 * s[0] * s[1] + 1.0, 1e-10);
        EXPECT_NEAR(gxx[q], 2.0 * s[1], 1e-9);
        EXPECT_NEAR(gxv[q], 2.0 * s[0], 1e-9);
        EXPECT_NEAR(gvv[q], -1.8 * s[1], 1e-9);
    }
}

TEST(SpectralGrid, ThreadCountDoesNotChangeBits) {
    const DomainBox box{{0, 1}, {0, 2}, {-1, 1}};
    const SpectralGrid grid(box, {8, 8, 8}, {gauss_legendre(12), gauss_legendre(12), gauss_legendre(12)});
    std::vector<double> nodal(grid.num_nodes()), st(3);
    for (std::size_t q = 0; q < nodal.size(); ++q) {
        grid.node_state(q, st);
        nodal[q] = std::cos(st[0] * st[1]) + st[2];
    }
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = grid.project(nodal);
    omp_set_num_threads(4);
    const auto b = grid.project(nodal);
    omp_set_num_threads(saved);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(ContractAxis, MatchesDirectSum) {
    // in: 2 x 3, contract axis 1 with a 2 x 3 matrix -> 2 x 2
    const double in[6] = {1, 2, 3, 4, 5, 6};
    const int shape[2] = {2, 3};
    const double A[6] = {1, 0, -1, 0.5, 0.5, 0.5};
    double out[4];
    contract_axis(in, shape, 1, A, 2, out);
    EXPECT_DOUBLE_EQ(out[0], -2.0);
    EXPECT_DOUBLE_EQ(out[1], 3.0);
    EXPECT_DOUBLE_EQ(out[2], -2.0);
    EXPECT_DOUBLE_EQ(out[3], 7.5);
}
