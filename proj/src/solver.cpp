#include "deltahjb/solver.hpp"

#include "deltahjb/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace deltahjb {

void SolverConfig::validate(int dim) const {
    if (N < 1) throw InputError("solver needs N >= 1 time steps");
    if (!(T > 0)) throw InputError("horizon T must be positive");
    if (static_cast<int>(orders.size()) != dim)
        throw InputError("solver orders have " + std::to_string(orders.size()) + " entries, generator has dimension " +
                         std::to_string(dim));
    if (box.dim() != dim) throw InputError("solver box dimension does not match the generator");
    for (int m : orders) {
        if (m < 0) throw InputError("truncation orders must be non-negative");
        if (quad_nodes < m + 1) throw InputError("quad_nodes must be at least max order + 1");
    }
    if (!(denom_floor > 0)) throw InputError("denom_floor must be positive");
}

std::pair<double, double> extend_window(double a, double b) {
    if (!(b > a)) throw InputError("window needs a < b");
    return {(3.0 * a - b) / 2.0, (9.0 * b - 7.0 * a) / 2.0};
}

Controls solve_controls(const ControlledGenerator& gen, std::span<const double> coeffs,
                        std::span<const double> derivs, double eps, ControlDiagnostics* diag) {
    Controls out{0.0, 0.0};
    for (std::size_t c = 0; c < gen.controls.size(); ++c) {
        double A = 0.0, B = 0.0;
        for (std::size_t i = 0; i < gen.terms.size(); ++i) {
            const int p = gen.terms[i].control_powers[c];
            if (p == 1) A += coeffs[i] * derivs[i];
            else if (p == 2) B += coeffs[i] * derivs[i];
        }
        const auto& spec = gen.controls[c];
        double u;
        if (std::abs(A) < eps && std::abs(B) < eps) {
            u = 0.0;
            if (diag) ++diag->flat;
        } else if (B < -eps) {
            u = std::clamp(-A / (2.0 * B), spec.lo, spec.hi);
        } else {
            // Not strictly concave: the sup over the box sits at an endpoint.
            const double f_lo = A * spec.lo + B * spec.lo * spec.lo;
            const double f_hi = A * spec.hi + B * spec.hi * spec.hi;
            u = f_hi > f_lo ? spec.hi : spec.lo;
            if (diag) ++diag->fallback;
        }
        if (spec.floor_at_zero) u = std::max(u, 0.0);
        out[c] = u;
    }
    return out;
}

namespace {

// D^alpha V at one state for every multi-index in `derivs`.
void point_derivatives(const CoefficientTensor& tensor, std::span<const double> state,
                       const std::vector<std::vector<int>>& derivs, std::span<double> out) {
    const int d = tensor.dim();
    std::vector<double> y(d);
    tensor.box().to_reference(state, y);
    // tables[j][order] = scaled basis derivatives along axis j
    std::vector<std::array<std::vector<double>, 3>> tables(d);
    for (int j = 0; j < d; ++j) {
        const OrthoBasis basis(BasisFamily::Legendre, tensor.orders()[j]);
        const double scale = tensor.box()[j].scale();
        for (int o = 0; o <= 2; ++o) {
            auto& t = tables[j][o];
            t.resize(basis.size());
            basis.eval_all(y[j], o, t);
            const double f = std::pow(scale, o);
            for (auto& v : t) v *= f;
        }
    }
    const auto values = tensor.values();
    std::vector<double> cur, next;
    for (std::size_t a = 0; a < derivs.size(); ++a) {
        // Contract the last axis first, as in reconstruct.
        cur.assign(values.begin(), values.end());
        for (int j = d - 1; j >= 0; --j) {
            const auto& g = tables[j][derivs[a][j]];
            const std::size_t m1 = g.size();
            const std::size_t outer = cur.size() / m1;
            next.assign(outer, 0.0);
            for (std::size_t o = 0; o < outer; ++o) {
                double s = 0.0;
                for (std::size_t k = 0; k < m1; ++k) s += cur[o * m1 + k] * g[k];
                next[o] = s;
            }
            cur.swap(next);
        }
        out[a] = cur[0];
    }
}

std::vector<int> term_deriv_index(const ControlledGenerator& gen, const std::vector<std::vector<int>>& derivs) {
    std::vector<int> idx;
    for (const auto& t : gen.terms)
        idx.push_back(static_cast<int>(std::find(derivs.begin(), derivs.end(), t.deriv) - derivs.begin()));
    return idx;
}

}  // namespace

Controls optimal_control(const ControlledGenerator& gen, const CoefficientTensor& tensor, double t,
                         std::span<const double> state, double eps, ControlDiagnostics* diag) {
    if (tensor.dim() != gen.dim) throw InputError("tensor and generator dimensions differ");
    // Only terms that carry a control matter for the first-order condition.
    std::vector<std::vector<int>> derivs;
    std::vector<int> which(gen.terms.size(), -1);
    for (std::size_t i = 0; i < gen.terms.size(); ++i) {
        const auto& term = gen.terms[i];
        if (term.control_powers[0] == 0 && term.control_powers[1] == 0) continue;
        auto it = std::find(derivs.begin(), derivs.end(), term.deriv);
        if (it == derivs.end()) {
            derivs.push_back(term.deriv);
            it = derivs.end() - 1;
        }
        which[i] = static_cast<int>(it - derivs.begin());
    }
    std::vector<double> dv(derivs.size());
    point_derivatives(tensor, state, derivs, dv);
    std::vector<double> coeffs(gen.terms.size(), 0.0), dterm(gen.terms.size(), 0.0);
    for (std::size_t i = 0; i < gen.terms.size(); ++i) {
        if (which[i] < 0) continue;
        coeffs[i] = gen.terms[i].coeff(t, state);
        dterm[i] = dv[which[i]];
    }
    return solve_controls(gen, coeffs, dterm, eps, diag);
}

GeneratorStepper::GeneratorStepper(ControlledGenerator gen, const SolverConfig& cfg)
    : gen_(std::move(gen)),
      cfg_(cfg),
      grid_(cfg.box, cfg.orders, std::vector<QuadratureRule>(cfg.box.dim(), gauss_legendre(cfg.quad_nodes))) {
    gen_.validate();
    cfg_.validate(gen_.dim);
    derivs_ = gen_.derivative_set();
    term_deriv_ = term_deriv_index(gen_, derivs_);
    nodes_ = grid_.node_states();
    cached_.resize(gen_.terms.size());
    const long long nn = static_cast<long long>(nodes_.size());
    for (std::size_t i = 0; i < gen_.terms.size(); ++i) {
        const auto& term = gen_.terms[i];
        if (term.time_dependent) continue;
        auto& c = cached_[i];
        c.resize(nodes_.size());
#pragma omp parallel for schedule(static)
        for (long long q = 0; q < nn; ++q) c[q] = term.coeff(0.0, nodes_[q]);
    }
}

GeneratorStepper::NodalResult GeneratorStepper::apply(const CoefficientTensor& V, double t,
                                                     std::span<const char> frozen) const {
    if (!V.same_shape(CoefficientTensor(cfg_.orders, cfg_.box)))
        throw InputError("tensor shape does not match the solver configuration");
    const std::size_t nn = nodes_.size();
    const std::size_t nt = gen_.terms.size();
    if (!frozen.empty() && frozen.size() != nn) throw InputError("frozen-control mask has the wrong length");
    std::vector<std::vector<double>> dv(derivs_.size());
    for (std::size_t a = 0; a < derivs_.size(); ++a) dv[a] = grid_.evaluate(V.values(), derivs_[a]);

    NodalResult res;
    res.generator.assign(nn, 0.0);
    res.controls.assign(nn, Controls{0.0, 0.0});
    long long fallback = 0, flat = 0;
#pragma omp parallel reduction(+ : fallback, flat)
    {
        std::vector<double> coeffs(nt), dterm(nt);
        ControlDiagnostics local;
#pragma omp for schedule(static)
        for (long long q = 0; q < static_cast<long long>(nn); ++q) {
            for (std::size_t i = 0; i < nt; ++i) {
                coeffs[i] = cached_[i].empty() ? gen_.terms[i].coeff(t, nodes_[q]) : cached_[i][q];
                dterm[i] = dv[term_deriv_[i]][q];
            }
            const Controls u = !frozen.empty() && frozen[q]
                                   ? Controls{0.0, 0.0}
                                   : solve_controls(gen_, coeffs, dterm, cfg_.denom_floor, &local);
            double lv = 0.0;
            for (std::size_t i = 0; i < nt; ++i) {
                double f = coeffs[i];
                for (int c = 0; c < 2; ++c)
                    for (int p = 0; p < gen_.terms[i].control_powers[c]; ++p) f *= u[c];
                lv += f * dterm[i];
            }
            res.generator[q] = lv;
            res.controls[q] = u;
        }
        fallback += local.fallback;
        flat += local.flat;
    }
    res.diag.fallback = fallback;
    res.diag.flat = flat;

    for (std::size_t q = 0; q < nn; ++q) {
        if (std::isfinite(res.generator[q])) continue;
        std::ostringstream msg;
        msg << "generator value not finite at node (";
        for (std::size_t j = 0; j < nodes_[q].size(); ++j) msg << (j ? ", " : "") << nodes_[q][j];
        msg << ")";
        for (std::size_t i = 0; i < nt; ++i) {
            const double c = cached_[i].empty() ? gen_.terms[i].coeff(t, nodes_[q]) : cached_[i][q];
            if (!std::isfinite(c * dv[term_deriv_[i]][q])) {
                msg << " in term '" << gen_.terms[i].label << "'";
                break;
            }
        }
        throw NumericalError(msg.str());
    }
    return res;
}

CoefficientTensor GeneratorStepper::step(const CoefficientTensor& next, double t_next, ControlDiagnostics* diag,
                                         std::span<const char> frozen) const {
    const auto res = apply(next, t_next, frozen);
    if (diag) *diag += res.diag;
    const auto lv = grid_.project(res.generator);
    const double h = cfg_.h();
    std::vector<double> out(lv.size());
    const auto v = next.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] + h * lv[i];
    return CoefficientTensor(cfg_.orders, cfg_.box, std::move(out), next.time_index() - 1);
}

CoefficientTensor step_backward(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                const SolverConfig& cfg, ControlDiagnostics* diag) {
    return GeneratorStepper(gen, cfg).step(next, t_next, diag);
}

int StrategyField::index(double t) const {
    const long n = std::lround(t / T_ * N_);
    return static_cast<int>(std::clamp<long>(n, 0, N_));
}

StrategyField StrategyField::scaled(double factor) const {
    auto base = fn_;
    return StrategyField(
        [base, factor](int n, std::span<const double> state) {
            Controls u = base(n, state);
            for (auto& c : u) c *= factor;
            return u;
        },
        N_, T_, box_);
}

ValueSolution solve(const ControlledGenerator& gen, const StateFunction& terminal, const SolverConfig& cfg) {
    const GeneratorStepper stepper(gen, cfg);
    ValueSolution sol;
    sol.config = cfg;
    sol.generator = std::make_shared<const ControlledGenerator>(gen);
    sol.tensors.resize(cfg.N + 1);
    try {
        sol.tensors[cfg.N] = project(terminal, cfg.box, cfg.orders, gauss_legendre(cfg.quad_nodes));
    } catch (const ProjectionError& e) {
        throw InputError(std::string("terminal condition: ") + e.what() +
                         "; shrink the box so the utility is finite (e.g. x_min > L)");
    }
    sol.tensors[cfg.N].set_time_index(cfg.N);
    for (int n = cfg.N - 1; n >= 0; --n) {
        try {
            sol.tensors[n] = stepper.step(sol.tensors[n + 1], cfg.time(n + 1), &sol.diagnostics);
        } catch (const NumericalError& e) {
            throw NumericalError("step " + std::to_string(n) + ": " + e.what());
        }
        if (n % 500 == 0) spdlog::debug("solve: step {} of {}", cfg.N - n, cfg.N);
    }
    spdlog::debug("solve: {} endpoint fallbacks, {} flat objectives", sol.diagnostics.fallback, sol.diagnostics.flat);
    return sol;
}

double value_at(const ValueSolution& sol, int n, std::span<const double> state) {
    if (n < 0 || n >= static_cast<int>(sol.tensors.size())) throw InputError("time index out of range");
    return reconstruct(sol.tensors[n], state);
}

Controls strategy_at(const ValueSolution& sol, int n, std::span<const double> state) {
    if (n < 0 || n >= static_cast<int>(sol.tensors.size())) throw InputError("time index out of range");
    return optimal_control(*sol.generator, sol.tensors[n], sol.config.time(n), state, sol.config.denom_floor);
}

StrategyField strategy_field(const ValueSolution& sol) {
    auto shared = std::make_shared<const ValueSolution>(sol);
    return StrategyField([shared](int n, std::span<const double> state) { return strategy_at(*shared, n, state); },
                         sol.config.N, sol.config.T, sol.config.box);
}

}  // namespace deltahjb
