#pragma once

#include "deltahjb/models.hpp"
#include "deltahjb/solver.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace deltahjb {

/// Stopping reward G(x); depends on wealth only.
struct Obstacle {
    std::function<double(double x)> G;
    double L = 0.0;

    static Obstacle from_utility(const PowerUtility& u) {
        return {[u](double x) { return u(x); }, u.L};
    }
};

struct StoppingConfig {
    SolverConfig solver;
    int retain_every = 1;
    /// Add the slack coefficients without the step factor h (the assembled-recursion
    /// reading); the default multiplies by h.
    bool psi_without_h = false;
    /// Reconstructed psi above this fraction of max nodal psi counts as "stopped".
    double stop_fraction = 1e-2;
};

/// V and slack psi at one time index. psi is carried at quadrature nodes; the
/// psi tensor is its projection, used only for off-node queries.
struct StoppingState {
    int time_index = 0;
    CoefficientTensor V;
    CoefficientTensor psi;
    std::vector<double> V_nodal;
    std::vector<double> psi_nodal;
};

struct ComplementarityStats {
    double min_psi = 0.0;        // most negative psi (0 if none)
    double max_gap_shortfall = 0.0;  // max over nodes of (G - V) / (1 + |G|), floored at 0
    double max_product = 0.0;    // max |psi (V - G)|
};

ComplementarityStats complementarity(std::span<const double> V, std::span<const double> psi,
                                     std::span<const double> G);

/// Pointwise split update. Returns (psi, V) per node.
std::pair<std::vector<double>, std::vector<double>> slack_projection(std::span<const double> V_tilde,
                                                                    std::span<const double> psi_next,
                                                                    std::span<const double> G, double h);

/// V~ = V + h P(L^{pi*} V) + h P(psi_next), with L carrying the discount term.
CoefficientTensor predictor_step(const GeneratorStepper& stepper, const StoppingState& next, double t_next,
                                 bool psi_without_h = false, ControlDiagnostics* diag = nullptr);

struct StoppingSolution {
    std::vector<StoppingState> states;          // retained, in ascending time index
    std::vector<ComplementarityStats> per_step;  // index n = 0..N
    ComplementarityStats worst;
    std::shared_ptr<const GeneratorStepper> stepper;
    StoppingConfig config;
    ControlDiagnostics diagnostics;

    /// Retained state with the nearest time index.
    const StoppingState& state_at(int n) const;

    /// Stopped-region threshold for a state: stop_fraction * max nodal psi.
    double stop_threshold(const StoppingState& s) const;

    /// Optimal control, zero where reconstructed psi marks the stopped region.
    Controls strategy_at(int n, std::span<const double> state) const;
    StrategyField strategy_field() const;
};

StoppingSolution solve_stopping(const SLVModel& model, const PowerUtility& utility, const StoppingConfig& cfg,
                                const std::optional<Obstacle>& obstacle = std::nullopt);

struct BoundaryPoint {
    double s;
    double v;
    double x_star;  // NaN when absent
    bool present;
    int time_index;
};

/// For each (s, v), the first wealth level where reconstructed psi crosses the
/// threshold, scanning upward in x and refining by bisection.
std::vector<BoundaryPoint> exercise_boundary(const CoefficientTensor& psi, int time_index,
                                             std::span<const double> s_grid, std::span<const double> v_grid,
                                             double threshold, int scan_points = 400);

void write_boundary_csv(std::ostream& os, const std::vector<BoundaryPoint>& points);

}  // namespace deltahjb
