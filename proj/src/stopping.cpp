#include "deltahjb/stopping.hpp"

#include "deltahjb/csv.hpp"
#include "deltahjb/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace deltahjb {

ComplementarityStats complementarity(std::span<const double> V, std::span<const double> psi,
                                     std::span<const double> G) {
    ComplementarityStats s;
    for (std::size_t i = 0; i < V.size(); ++i) {
        s.min_psi = std::min(s.min_psi, psi[i]);
        s.max_gap_shortfall = std::max(s.max_gap_shortfall, (G[i] - V[i]) / (1.0 + std::abs(G[i])));
        s.max_product = std::max(s.max_product, std::abs(psi[i] * (V[i] - G[i])));
    }
    return s;
}

std::pair<std::vector<double>, std::vector<double>> slack_projection(std::span<const double> V_tilde,
                                                                    std::span<const double> psi_next,
                                                                    std::span<const double> G, double h) {
    if (V_tilde.size() != psi_next.size() || V_tilde.size() != G.size())
        throw InputError("slack projection inputs differ in length");
    std::vector<double> psi(V_tilde.size()), V(V_tilde.size());
    for (std::size_t i = 0; i < V_tilde.size(); ++i) {
        const double cont = V_tilde[i] - h * psi_next[i];
        if (cont >= G[i]) {
            psi[i] = 0.0;
            V[i] = cont;
        } else {
            psi[i] = (G[i] - V_tilde[i]) / h + psi_next[i];
            V[i] = G[i];
        }
    }
    return {std::move(psi), std::move(V)};
}

CoefficientTensor predictor_step(const GeneratorStepper& stepper, const StoppingState& next, double t_next,
                                 bool psi_without_h, ControlDiagnostics* diag) {
    const auto& grid = stepper.grid();
    const double h = stepper.config().h();
    if (next.psi_nodal.size() != grid.num_nodes()) throw InputError("nodal slack has the wrong length");
    // pi*_{n+1} is zero wherever the previous layer stopped.
    std::vector<char> stopped(next.psi_nodal.size());
    for (std::size_t q = 0; q < stopped.size(); ++q) stopped[q] = next.psi_nodal[q] > 0.0;
    auto out = stepper.step(next.V, t_next, diag, stopped);
    const auto psi_coeffs = grid.project(next.psi_nodal);
    const double f = psi_without_h ? 1.0 : h;
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += f * psi_coeffs[i];
    return out;
}

const StoppingState& StoppingSolution::state_at(int n) const {
    if (states.empty()) throw InputError("no retained stopping states");
    const StoppingState* best = &states.front();
    for (const auto& s : states)
        if (std::abs(s.time_index - n) < std::abs(best->time_index - n)) best = &s;
    return *best;
}

double StoppingSolution::stop_threshold(const StoppingState& s) const {
    double m = 0.0;
    for (double p : s.psi_nodal) m = std::max(m, p);
    return config.stop_fraction * m;
}

Controls StoppingSolution::strategy_at(int n, std::span<const double> state) const {
    const auto& s = state_at(n);
    if (reconstruct(s.psi, state) > stop_threshold(s)) return {0.0, 0.0};
    return optimal_control(stepper->generator(), s.V, config.solver.time(s.time_index), state,
                           config.solver.denom_floor);
}

StrategyField StoppingSolution::strategy_field() const {
    auto self = std::make_shared<const StoppingSolution>(*this);
    return StrategyField([self](int n, std::span<const double> state) { return self->strategy_at(n, state); },
                         config.solver.N, config.solver.T, config.solver.box);
}

StoppingSolution solve_stopping(const SLVModel& model, const PowerUtility& utility, const StoppingConfig& cfg,
                                const std::optional<Obstacle>& obstacle) {
    if (cfg.retain_every < 1) throw InputError("retain_every must be >= 1");
    const auto& sc = cfg.solver;
    const Obstacle obs = obstacle ? *obstacle : Obstacle::from_utility(utility);
    if (!(sc.box.dim() >= 1) || !(sc.box[0].lo() > utility.L))
        throw InputError("stopping needs the wealth box to start above the threshold L");

    StoppingSolution sol;
    sol.config = cfg;
    auto stepper = std::make_shared<GeneratorStepper>(slv_generator(model), sc);
    sol.stepper = stepper;
    const auto& grid = stepper->grid();
    const std::size_t nn = grid.num_nodes();

    std::vector<double> G(nn), terminal(nn), state(grid.dim());
    for (std::size_t q = 0; q < nn; ++q) {
        grid.node_state(q, state);
        G[q] = obs.G(state[0]);
        terminal[q] = utility(state[0]);
        if (!std::isfinite(G[q]) || !std::isfinite(terminal[q]))
            throw InputError("obstacle or terminal utility not finite at x = " + std::to_string(state[0]));
    }

    StoppingState cur;
    cur.time_index = sc.N;
    cur.V = grid.project_tensor(terminal, sc.N);
    cur.psi = CoefficientTensor(sc.orders, sc.box, {}, sc.N);
    cur.V_nodal = terminal;
    cur.psi_nodal.assign(nn, 0.0);

    sol.per_step.assign(sc.N + 1, ComplementarityStats{});
    sol.per_step[sc.N] = complementarity(cur.V_nodal, cur.psi_nodal, G);
    std::vector<StoppingState> retained;
    retained.push_back(cur);

    for (int n = sc.N - 1; n >= 0; --n) {
        CoefficientTensor tilde;
        try {
            tilde = predictor_step(*stepper, cur, sc.time(n + 1), cfg.psi_without_h, &sol.diagnostics);
        } catch (const NumericalError& e) {
            throw NumericalError("stopping step " + std::to_string(n) + ": " + e.what());
        }
        static const std::vector<int> zero_alpha(16, 0);
        const auto tilde_nodal = grid.evaluate(tilde.values(), std::span<const int>(zero_alpha.data(), grid.dim()));
        auto [psi, V] = slack_projection(tilde_nodal, cur.psi_nodal, G, sc.h());

        StoppingState next_state;
        next_state.time_index = n;
        next_state.V = grid.project_tensor(V, n);
        next_state.psi = grid.project_tensor(psi, n);
        next_state.V_nodal = std::move(V);
        next_state.psi_nodal = std::move(psi);
        sol.per_step[n] = complementarity(next_state.V_nodal, next_state.psi_nodal, G);
        cur = std::move(next_state);
        if (n % cfg.retain_every == 0) retained.push_back(cur);
        if (n % 100 == 0) spdlog::debug("stopping: step {} of {}", sc.N - n, sc.N);
    }
    std::reverse(retained.begin(), retained.end());
    sol.states = std::move(retained);
    for (const auto& s : sol.per_step) {
        sol.worst.min_psi = std::min(sol.worst.min_psi, s.min_psi);
        sol.worst.max_gap_shortfall = std::max(sol.worst.max_gap_shortfall, s.max_gap_shortfall);
        sol.worst.max_product = std::max(sol.worst.max_product, s.max_product);
    }
    return sol;
}

std::vector<BoundaryPoint> exercise_boundary(const CoefficientTensor& psi, int time_index,
                                             std::span<const double> s_grid, std::span<const double> v_grid,
                                             double threshold, int scan_points) {
    if (psi.dim() != 3) throw InputError("exercise boundary expects a (x, s, v) slack tensor");
    if (scan_points < 2) throw InputError("need at least two scan points");
    const double lo = psi.box()[0].lo(), hi = psi.box()[0].hi();
    std::vector<BoundaryPoint> out;
    out.reserve(s_grid.size() * v_grid.size());
    for (double s : s_grid) {
        for (double v : v_grid) {
            auto stopped = [&](double x) {
                const double st[3] = {x, s, v};
                return reconstruct(psi, st) > threshold;
            };
            BoundaryPoint bp{s, v, std::numeric_limits<double>::quiet_NaN(), false, time_index};
            double xa = lo;
            bool ca = stopped(xa);
            for (int i = 1; i < scan_points; ++i) {
                const double xb = lo + (hi - lo) * i / (scan_points - 1);
                const bool cb = stopped(xb);
                if (cb != ca) {
                    double a = xa, b = xb;
                    for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::abs(b)); ++it) {
                        const double m = 0.5 * (a + b);
                        (stopped(m) == ca ? a : b) = m;
                    }
                    bp.x_star = 0.5 * (a + b);
                    bp.present = true;
                    break;
                }
                xa = xb;
                ca = cb;
            }
            out.push_back(bp);
        }
    }
    return out;
}

void write_boundary_csv(std::ostream& os, const std::vector<BoundaryPoint>& points) {
    os << "s,v,x_star,time_index\n";
    for (const auto& p : points)
        os << csv::num(p.s) << ',' << csv::num(p.v) << ',' << (p.present ? csv::num(p.x_star) : "absent") << ','
           << p.time_index << '\n';
}

}  // namespace deltahjb
