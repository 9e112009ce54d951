#pragma once

#include "deltahjb/kernels.hpp"
#include "deltahjb/models.hpp"
#include "deltahjb/tensor.hpp"

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace deltahjb {

struct SolverConfig {
    int N = 100;
    double T = 1.0;
    std::vector<int> orders;
    int quad_nodes = 40;
    double denom_floor = 1e-10;
    DomainBox box;

    double h() const noexcept { return T / N; }
    double time(int n) const noexcept { return n * h(); }
    void validate(int dim) const;
};

/// Interior test window [a,b] widened to the solve interval ((3a-b)/2, (9b-7a)/2).
std::pair<double, double> extend_window(double a, double b);

/// Counts of non-standard control evaluations (endpoint fallback, flat objective).
struct ControlDiagnostics {
    long long fallback = 0;
    long long flat = 0;

    ControlDiagnostics& operator+=(const ControlDiagnostics& o) {
        fallback += o.fallback;
        flat += o.flat;
        return *this;
    }
};

/// Maximizer of the quadratic-in-controls objective given, per generator term, the
/// coefficient value and the matching derivative of V at one state.
Controls solve_controls(const ControlledGenerator& gen, std::span<const double> coeffs,
                        std::span<const double> derivs, double eps, ControlDiagnostics* diag = nullptr);

/// Pointwise optimal control from the first-order condition, using V = tensor.
Controls optimal_control(const ControlledGenerator& gen, const CoefficientTensor& tensor, double t,
                         std::span<const double> state, double eps = 1e-10, ControlDiagnostics* diag = nullptr);

/// Matrix-free explicit step on a fixed quadrature grid.
///
/// Equivalent to next + h G(pi*) next with the Gram matrix
/// G_{m,k} = sum_q w_q g_m(y_q) L^{pi*(y_q)} g_k(y_q): the generator is applied to V
/// at the nodes (with pi* chosen per node from V itself) and the result is
/// projected back, which never forms G explicitly. Coefficients of terms that do
/// not depend on time are evaluated once per node and cached.
class GeneratorStepper {
public:
    GeneratorStepper(ControlledGenerator gen, const SolverConfig& cfg);

    const SpectralGrid& grid() const noexcept { return grid_; }
    const ControlledGenerator& generator() const noexcept { return gen_; }
    const SolverConfig& config() const noexcept { return cfg_; }

    struct NodalResult {
        std::vector<double> generator;  // L^{pi*} V at each node
        std::vector<Controls> controls;
        ControlDiagnostics diag;
    };

    /// Nodes flagged in `frozen` (if given) use zero controls instead of the first-order condition.
    NodalResult apply(const CoefficientTensor& V, double t, std::span<const char> frozen = {}) const;

    /// next + h * P(L^{pi*} next), coefficients evaluated at t_next.
    CoefficientTensor step(const CoefficientTensor& next, double t_next, ControlDiagnostics* diag = nullptr,
                           std::span<const char> frozen = {}) const;

private:
    ControlledGenerator gen_;
    SolverConfig cfg_;
    SpectralGrid grid_;
    std::vector<std::vector<int>> derivs_;
    std::vector<int> term_deriv_;                 // term -> index into derivs_
    std::vector<std::vector<double>> cached_;     // term -> nodal coefficient (empty if time dependent)
    std::vector<std::vector<double>> nodes_;      // node -> physical state
};

CoefficientTensor step_backward(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                const SolverConfig& cfg, ControlDiagnostics* diag = nullptr);

struct ValueSolution {
    std::vector<CoefficientTensor> tensors;  // n = 0..N
    SolverConfig config;
    std::shared_ptr<const ControlledGenerator> generator;
    ControlDiagnostics diagnostics;
};

/// Feedback control u(n, state) on a time grid t_n = n T / N, with the box the
/// strategy is defined on.
class StrategyField {
public:
    using Fn = std::function<Controls(int n, std::span<const double> state)>;

    StrategyField(Fn fn, int N, double T, DomainBox box) : fn_(std::move(fn)), N_(N), T_(T), box_(std::move(box)) {}

    Controls operator()(int n, std::span<const double> state) const { return fn_(n, state); }

    /// Nearest grid index to t.
    int index(double t) const;
    Controls at_time(double t, std::span<const double> state) const { return fn_(index(t), state); }

    int steps() const noexcept { return N_; }
    double horizon() const noexcept { return T_; }
    const DomainBox& box() const noexcept { return box_; }

    /// Same field with every control multiplied by `factor`.
    StrategyField scaled(double factor) const;

private:
    Fn fn_;
    int N_;
    double T_;
    DomainBox box_;
};

ValueSolution solve(const ControlledGenerator& gen, const StateFunction& terminal, const SolverConfig& cfg);

double value_at(const ValueSolution& sol, int n, std::span<const double> state);
Controls strategy_at(const ValueSolution& sol, int n, std::span<const double> state);
StrategyField strategy_field(const ValueSolution& sol);

}  // namespace deltahjb
