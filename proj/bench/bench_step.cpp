// Times one backward step: serial explicit-Gram reference vs the sum-factorized
// OpenMP stepper, plus naive vs factorized projection.
//
//   bench_step [M] [n_q] [repeats]

#include "deltahjb/models.hpp"
#include "deltahjb/reference.hpp"
#include "deltahjb/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace deltahjb;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    const int M = argc > 1 ? std::atoi(argv[1]) : 10;
    const int nq = argc > 2 ? std::atoi(argv[2]) : 40;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    SolverConfig cfg;
    cfg.N = 2000;
    cfg.orders = {M, M};
    cfg.quad_nodes = nq;
    cfg.box = DomainBox{{0.5, 5.5}, {0.15, 1.65}};
    const auto gen = heston_investment_generator(HestonParams{});
    const PowerUtility u{0.5, 0.0};
    const StateFunction terminal = [&](std::span<const double> s) { return u(s[0]); };

    GeneratorStepper stepper(gen, cfg);
    const auto V = stepper.grid().project_tensor(
        [&] {
            std::vector<double> nodal(stepper.grid().num_nodes());
            std::vector<double> st(2);
            for (std::size_t q = 0; q < nodal.size(); ++q) {
                stepper.grid().node_state(q, st);
                nodal[q] = terminal(st);
            }
            return nodal;
        }(),
        cfg.N);

    std::printf("M=%d n_q=%d coeffs=%zu nodes=%zu max_threads=%d\n", M, nq, V.size(), stepper.grid().num_nodes(),
                omp_get_max_threads());

    CoefficientTensor ref, fast;
    const double t_ref = best_of(repeats, [&] { ref = reference::step_backward_gram(gen, V, cfg.T, cfg); });
    std::printf("step   serial gram reference : %10.4f ms\n", 1e3 * t_ref);

    const int max_threads = omp_get_max_threads();
    for (int threads : {1, max_threads}) {
        omp_set_num_threads(threads);
        const double t = best_of(repeats, [&] { fast = stepper.step(V, cfg.T); });
        std::printf("step   matrix-free, %2d thread(s): %10.4f ms  speedup %6.1fx  max|diff| %.2e\n", threads,
                    1e3 * t, t_ref / t, max_diff(ref.values(), fast.values()));
        if (max_threads == 1) break;
    }
    omp_set_num_threads(max_threads);

    std::vector<double> naive;
    const double t_naive =
        best_of(repeats, [&] { naive = reference::project_naive(terminal, cfg.box, cfg.orders, nq); });
    const auto rule = gauss_legendre(nq);
    CoefficientTensor factored;
    const double t_fact = best_of(repeats, [&] { factored = project(terminal, cfg.box, cfg.orders, rule); });
    std::printf("project naive                : %10.4f ms\n", 1e3 * t_naive);
    std::printf("project sum-factorized       : %10.4f ms  speedup %6.1fx  max|diff| %.2e\n", 1e3 * t_fact,
                t_naive / t_fact, max_diff(naive, factored.values()));
    return 0;
}
