#include "deltahjb/errors.hpp"
#include "deltahjb/stopping.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace deltahjb;

namespace {

SolverConfig small_config(int N = 50, int M = 6) {
    SolverConfig c;
    c.N = N;
    c.T = 1.0;
    c.orders = {M, M, M};
    c.quad_nodes = M + 4;
    c.box = DomainBox{{1.2, 10.0}, {0.5, 2.0}, {0.05, 1.0}};
    return c;
}

// Generator with only the -gamma f term (plus a dummy control so validate() passes).
ControlledGenerator discount_only(double gamma) {
    auto g = slv_generator(slv_preset("heston", SLVPresetParams{}));
    for (auto& t : g.terms) {
        if (t.label == "-gamma f") t.coeff = [gamma](double, std::span<const double>) { return -gamma; };
        else t.coeff = [](double, std::span<const double>) { return 0.0; };
    }
    return g;
}

}  // namespace

TEST(Slack, ContinuationBranch) {
    const double vt[1] = {5.0}, pn[1] = {0.0}, G[1] = {2.0};
    const auto [psi, V] = slack_projection(vt, pn, G, 0.1);
    EXPECT_DOUBLE_EQ(psi[0], 0.0);
    EXPECT_DOUBLE_EQ(V[0], 5.0);
}

TEST(Slack, StoppingBranch) {
    const double vt[1] = {1.0}, pn[1] = {0.0}, G[1] = {2.0};
    const auto [psi, V] = slack_projection(vt, pn, G, 0.1);
    EXPECT_DOUBLE_EQ(psi[0], 10.0);
    EXPECT_DOUBLE_EQ(V[0], 2.0);
}

TEST(Slack, BoundaryCaseTakesFirstBranch) {
    const double h = 0.25, G0 = 2.0, pn0 = 4.0;
    const double vt[1] = {G0 + h * pn0}, pn[1] = {pn0}, G[1] = {G0};
    const auto [psi, V] = slack_projection(vt, pn, G, h);
    EXPECT_DOUBLE_EQ(psi[0], 0.0);
    EXPECT_DOUBLE_EQ(V[0], G0);
    EXPECT_THROW(slack_projection(vt, std::vector<double>{}, G, h), InputError);
}

TEST(Complementarity, Stats) {
    const double V[3] = {2.0, 3.0, 1.0}, psi[3] = {1.0, 0.0, -0.5}, G[3] = {2.0, 1.0, 1.5};
    const auto s = complementarity(V, psi, G);
    EXPECT_DOUBLE_EQ(s.min_psi, -0.5);
    EXPECT_DOUBLE_EQ(s.max_gap_shortfall, 0.5 / 2.5);
    EXPECT_DOUBLE_EQ(s.max_product, 0.25);
}

TEST(Predictor, DiscountOnlyStepScalesCoefficients) {
    auto cfg = small_config();
    cfg.N = 5000;  // h = 2e-4
    GeneratorStepper stepper(discount_only(0.15), cfg);
    const auto& grid = stepper.grid();
    StoppingState s;
    s.V = grid.project_tensor(std::vector<double>(grid.num_nodes(), 1.0));
    s.V_nodal.assign(grid.num_nodes(), 1.0);
    s.psi_nodal.assign(grid.num_nodes(), 0.0);
    const auto t = predictor_step(stepper, s, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(t.values()[i], (1 - 3e-5) * s.V.values()[i], 1e-15);
}

TEST(Predictor, ZeroGeneratorWithoutSlackIsIdentity) {
    const auto cfg = small_config();
    GeneratorStepper stepper(discount_only(0.0), cfg);
    const auto& grid = stepper.grid();
    std::vector<double> nodal(grid.num_nodes()), st(3);
    for (std::size_t q = 0; q < nodal.size(); ++q) {
        grid.node_state(q, st);
        nodal[q] = std::sqrt(st[0]) + st[2];
    }
    StoppingState s;
    s.V = grid.project_tensor(nodal);
    s.psi_nodal.assign(grid.num_nodes(), 0.0);
    const auto t = predictor_step(stepper, s, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t.values()[i], s.V.values()[i]);
}

TEST(Predictor, SlackScalingSwitch) {
    const auto cfg = small_config(10);
    GeneratorStepper stepper(discount_only(0.0), cfg);
    const auto& grid = stepper.grid();
    StoppingState s;
    s.V = grid.project_tensor(std::vector<double>(grid.num_nodes(), 0.0));
    s.psi_nodal.assign(grid.num_nodes(), 2.0);
    const auto with_h = predictor_step(stepper, s, 1.0, false);
    const auto without_h = predictor_step(stepper, s, 1.0, true);
    // Constant 2 projects to 2 * 2^{3/2} on g_0^3.
    EXPECT_NEAR(with_h.values()[0], 0.1 * 2.0 * std::pow(2.0, 1.5), 1e-12);
    EXPECT_NEAR(without_h.values()[0], 2.0 * std::pow(2.0, 1.5), 1e-12);
}

TEST(Boundary, PlantedRoot) {
    const DomainBox box{{1.0, 6.0}, {0.5, 2.0}, {0.0, 1.0}};
    // psi = 3.7 - x is degree one in x; crossing the threshold 0 at 3.7.
    const auto psi = project([](std::span<const double> s) { return 3.7 - s[0]; }, box, {3, 2, 2}, gauss_legendre(6));
    const double sg[2] = {0.7, 1.5}, vg[2] = {0.2, 0.8};
    const auto b = exercise_boundary(psi, 0, sg, vg, 0.0);
    ASSERT_EQ(b.size(), 4u);
    for (const auto& p : b) {
        EXPECT_TRUE(p.present);
        EXPECT_NEAR(p.x_star, 3.7, 1e-6);
    }
}

TEST(Boundary, AbsentWithoutSignChange) {
    const DomainBox box{{1.0, 6.0}, {0.5, 2.0}, {0.0, 1.0}};
    const auto psi = CoefficientTensor({3, 2, 2}, box);
    const double sg[1] = {1.0}, vg[1] = {0.5};
    const auto b = exercise_boundary(psi, 3, sg, vg, 0.0);
    EXPECT_FALSE(b[0].present);
    EXPECT_TRUE(std::isnan(b[0].x_star));
    std::ostringstream os;
    write_boundary_csv(os, b);
    EXPECT_EQ(os.str(), "s,v,x_star,time_index\n1,0.5,absent,3\n");
}

TEST(SolveStopping, RejectsBoxBelowThreshold) {
    auto m = slv_preset("heston", SLVPresetParams{});
    StoppingConfig sc;
    sc.solver = small_config(10);
    EXPECT_THROW(solve_stopping(m, PowerUtility{0.5, 1.5}, sc), InputError);
}

TEST(SolveStopping, ObstacleInactiveMatchesPlainSolver) {
    SLVPresetParams pp;
    pp.gamma = 0.0;
    pp.L = 0.0;
    const auto m = slv_preset("heston", pp);
    StoppingConfig sc;
    sc.solver = small_config(400, 6);
    sc.retain_every = 400;
    const PowerUtility u{0.5, 0.0};
    const Obstacle never{[](double) { return -1e6; }, 0.0};
    const auto st = solve_stopping(m, u, sc, never);
    const auto plain = solve(slv_generator(m), [&](std::span<const double> s) { return u(s[0]); }, sc.solver);
    ASSERT_EQ(st.states.front().time_index, 0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(1.2, 10.0), us(0.5, 2.0), uv(0.05, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double s[3] = {ux(rng), us(rng), uv(rng)};
        EXPECT_NEAR(reconstruct(st.states.front().V, s), value_at(plain, 0, s), 1e-8);
    }
    EXPECT_EQ(st.worst.max_product, 0.0);
}

TEST(SolveStopping, ComplementarityAndDiscountMonotonicity) {
    StoppingConfig sc;
    sc.solver = small_config(400, 6);
    sc.retain_every = 40;
    std::vector<double> values;
    const double probe[3] = {3.0, 1.0, 0.4};
    for (double gamma : {0.0, 0.05, 0.15}) {
        SLVPresetParams pp;
        pp.gamma = gamma;
        const auto sol = solve_stopping(slv_preset("heston", pp), PowerUtility{0.5, 1.0}, sc);
        EXPECT_EQ(sol.states.size(), 11u);
        EXPECT_GE(sol.worst.min_psi, -1e-6);
        EXPECT_LE(sol.worst.max_gap_shortfall, 1e-6);
        EXPECT_LE(sol.worst.max_product, 1e-5);
        values.push_back(reconstruct(sol.state_at(0).V, probe));
    }
    EXPECT_GE(values[0] + 1e-12, values[1]);
    EXPECT_GE(values[1] + 1e-12, values[2]);
}

TEST(SolveStopping, StrategyIsZeroWhereStopped) {
    SLVPresetParams pp;
    pp.gamma = 0.15;
    StoppingConfig sc;
    sc.solver = small_config(400, 6);
    const auto sol = solve_stopping(slv_preset("heston", pp), PowerUtility{0.5, 1.0}, sc);
    const auto& s0 = sol.state_at(0);
    const double thr = sol.stop_threshold(s0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(1.2, 10.0), us(0.5, 2.0), uv(0.05, 1.0);
    int stopped = 0;
    for (int i = 0; i < 200; ++i) {
        const double s[3] = {ux(rng), us(rng), uv(rng)};
        if (reconstruct(s0.psi, s) > thr) {
            ++stopped;
            EXPECT_EQ(sol.strategy_at(0, s)[kPi], 0.0);
        }
    }
    EXPECT_GT(stopped, 0);
}
