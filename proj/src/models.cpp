#include "deltahjb/models.hpp"

#include "deltahjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deltahjb {

namespace {

std::vector<int> unit_deriv(int dim, std::initializer_list<std::pair<int, int>> entries) {
    std::vector<int> d(dim, 0);
    for (const auto& [axis, order] : entries) d[axis] += order;
    return d;
}

GeneratorTerm term(std::string label, std::array<int, 2> powers, std::vector<int> deriv, CoefficientFn coeff,
                   bool time_dependent = false) {
    GeneratorTerm t;
    t.label = std::move(label);
    t.control_powers = powers;
    t.deriv = std::move(deriv);
    t.coeff = std::move(coeff);
    t.time_dependent = time_dependent;
    return t;
}

ControlSpec pi_control() { return {"pi", -10.0, 10.0, false}; }
ControlSpec q_control() { return {"q", 0.0, 10.0, true}; }

}  // namespace

void ControlledGenerator::validate() const {
    if (dim < 1) throw InputError("generator dimension must be positive");
    if (controls.size() > 2) throw InputError("at most two controls (pi, q) are supported");
    for (const auto& t : terms) {
        if (static_cast<int>(t.deriv.size()) != dim)
            throw InputError("term '" + t.label + "' has a derivative index of the wrong length");
        int total = 0;
        for (int o : t.deriv) {
            if (o < 0 || o > 2) throw InputError("term '" + t.label + "' derivative order out of range");
            total += o;
        }
        if (total > 2) throw InputError("term '" + t.label + "' has total derivative order above 2");
        if (total == 0 && !t.zeroth_order_ok)
            throw InputError("term '" + t.label + "' is zeroth order without zeroth_order_ok");
        const int pp = t.control_powers[kPi], pq = t.control_powers[kQ];
        if (pp < 0 || pq < 0 || pp + pq > 2) throw InputError("term '" + t.label + "' control powers invalid");
        if (pp > 0 && pq > 0) throw InputError("term '" + t.label + "' mixes pi and q");
        for (int c = 0; c < 2; ++c)
            if (t.control_powers[c] > 0 && c >= static_cast<int>(controls.size()))
                throw InputError("term '" + t.label + "' uses an undeclared control");
        if (!t.coeff) throw InputError("term '" + t.label + "' has no coefficient");
    }
    for (std::size_t c = 0; c < controls.size(); ++c) {
        const bool has_square = std::any_of(terms.begin(), terms.end(),
                                            [&](const GeneratorTerm& t) { return t.control_powers[c] == 2; });
        if (!has_square) throw InputError("control '" + controls[c].name + "' has no quadratic term");
        if (!(controls[c].hi > controls[c].lo)) throw InputError("control box must be non-empty");
    }
}

std::vector<std::vector<int>> ControlledGenerator::derivative_set() const {
    std::vector<std::vector<int>> out;
    for (const auto& t : terms)
        if (std::find(out.begin(), out.end(), t.deriv) == out.end()) out.push_back(t.deriv);
    return out;
}

double apply_generator(const ControlledGenerator& gen, double t, std::span<const double> state,
                       const Controls& controls, const DerivativeFn& derivs) {
    double sum = 0.0;
    for (const auto& term : gen.terms) {
        double factor = term.coeff(t, state);
        for (int c = 0; c < 2; ++c)
            for (int p = 0; p < term.control_powers[c]; ++p) factor *= controls[c];
        if (factor == 0.0) continue;
        sum += factor * derivs(term.deriv);
    }
    return sum;
}

void HestonParams::validate() const {
    // Zero kappa/sigma/theta are legal degenerate cases (Merton and lifted-reduction checks).
    if (kappa < 0 || theta < 0 || sigma < 0 || !(v0 > 0))
        throw InputError("Heston parameters require kappa, theta, sigma >= 0 and V0 > 0");
    if (std::abs(rho) > 1.0) throw InputError("Heston correlation must lie in [-1, 1]");
}

void ReinsuranceParams::validate() const {
    if (!(c > 0) || !(b > 0)) throw InputError("claim rate c and volatility b must be positive");
    if (!(vartheta > eta)) throw InputError("reinsurer loading must exceed insurer loading (vartheta > eta)");
    if (L < 0) throw InputError("guaranteed threshold L must be non-negative");
}

void RoughKernelApprox::validate() const {
    if (weights.empty() || weights.size() != rates.size())
        throw InputError("kernel approximation needs matching, non-empty weights and rates");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0)) throw InputError("kernel weights must be positive");
        if (rates[i] < 0) throw InputError("kernel rates must be non-negative");
        if (i > 0 && rates[i] < rates[i - 1]) throw InputError("kernel rates must be non-decreasing");
    }
    if (!(alpha > 0 && alpha <= 1)) throw InputError("roughness alpha must lie in (0, 1]");
    heston.validate();
}

double PowerUtility::operator()(double x) const {
    const double z = x - L;
    if (z < 0) return -std::numeric_limits<double>::infinity();
    return std::pow(z, p) / p;
}

ControlledGenerator heston_investment_generator(const HestonParams& p) {
    p.validate();
    ControlledGenerator g;
    g.dim = 2;
    g.controls = {pi_control()};
    g.terms.push_back(term("lambda pi v x d_x", {1, 0}, unit_deriv(2, {{0, 1}}),
                           [lam = p.lambda](double, std::span<const double> s) { return lam * s[1] * s[0]; }));
    g.terms.push_back(term("kappa(theta - v) d_v", {0, 0}, unit_deriv(2, {{1, 1}}),
                           [k = p.kappa, th = p.theta](double, std::span<const double> s) { return k * (th - s[1]); }));
    g.terms.push_back(term("pi^2 v x^2/2 d_xx", {2, 0}, unit_deriv(2, {{0, 2}}),
                           [](double, std::span<const double> s) { return 0.5 * s[1] * s[0] * s[0]; }));
    g.terms.push_back(term("sigma^2 v/2 d_vv", {0, 0}, unit_deriv(2, {{1, 2}}),
                           [sg = p.sigma](double, std::span<const double> s) { return 0.5 * sg * sg * s[1]; }));
    g.terms.push_back(term("rho sigma pi x v d_xv", {1, 0}, unit_deriv(2, {{0, 1}, {1, 1}}),
                           [rs = p.rho * p.sigma](double, std::span<const double> s) { return rs * s[0] * s[1]; }));
    return g;
}

ControlledGenerator reinsurance_heston_generator(const HestonParams& p, const ReinsuranceParams& q) {
    q.validate();
    ControlledGenerator g = heston_investment_generator(p);
    g.controls = {pi_control(), q_control()};
    g.terms.push_back(term("r x d_x", {0, 0}, unit_deriv(2, {{0, 1}}),
                           [r = q.r](double, std::span<const double> s) { return r * s[0]; }));
    g.terms.push_back(term("c vartheta q x d_x", {0, 1}, unit_deriv(2, {{0, 1}}),
                           [cv = q.c * q.vartheta](double, std::span<const double> s) { return cv * s[0]; }));
    g.terms.push_back(term("b^2 q^2 x^2/2 d_xx", {0, 2}, unit_deriv(2, {{0, 2}}),
                           [b2 = q.b * q.b](double, std::span<const double> s) { return 0.5 * b2 * s[0] * s[0]; }));
    return g;
}

RoughKernelApprox kernel_nodes(double alpha, int factors, double gamma_max, const HestonParams& heston) {
    if (alpha == 1.0) throw InputError("alpha = 1 gives a degenerate kernel measure; use the classical model");
    if (!(alpha > 0 && alpha < 1)) throw InputError("roughness alpha must lie in (0, 1)");
    if (factors < 1) throw InputError("need at least one factor");
    if (!(gamma_max > 1)) throw InputError("gamma_max must exceed 1 for geometric cells");
    const double norm = std::tgamma(alpha) * std::tgamma(1.0 - alpha);
    RoughKernelApprox k;
    k.alpha = alpha;
    k.heston = heston;
    double lo = 0.0;
    for (int i = 1; i <= factors; ++i) {
        const double hi = std::pow(gamma_max, double(i) / factors);
        const double mass = (std::pow(hi, 1.0 - alpha) - std::pow(lo, 1.0 - alpha)) / ((1.0 - alpha) * norm);
        const double moment = (std::pow(hi, 2.0 - alpha) - std::pow(lo, 2.0 - alpha)) / ((2.0 - alpha) * norm);
        k.weights.push_back(mass);
        k.rates.push_back(moment / mass);
        lo = hi;
    }
    return k;
}

double fractional_kernel(double alpha, double t) {
    return std::pow(t, alpha - 1.0) / std::tgamma(alpha);
}

double smoothed_kernel(const RoughKernelApprox& k, double t) {
    double s = 0.0;
    for (int i = 0; i < k.factors(); ++i) s += k.weights[i] * std::exp(-k.rates[i] * t);
    return s;
}

double xi_curve(const RoughKernelApprox& k, double t) {
    if (t < 0) throw InputError("xi(t) requires t >= 0");
    const auto& h = k.heston;
    return h.v0 + h.kappa * h.theta * std::pow(t, k.alpha) / std::tgamma(k.alpha + 1.0);
}

double lifted_variance(const RoughKernelApprox& k, double t, std::span<const double> state) {
    double v = xi_curve(k, t);
    for (int l = 0; l < k.factors(); ++l) v += k.weights[l] * state[1 + l];
    return v;
}

ControlledGenerator rough_multifactor_generator(const RoughKernelApprox& k,
                                                const std::optional<ReinsuranceParams>& q) {
    k.validate();
    if (q) q->validate();
    const int ell = k.factors();
    const int d = ell + 1;
    const auto& h = k.heston;
    const double r = q ? q->r : h.r;
    auto V = [k](double t, std::span<const double> s) { return lifted_variance(k, t, s); };

    ControlledGenerator g;
    g.dim = d;
    g.controls = {pi_control()};
    if (q) g.controls.push_back(q_control());

    g.terms.push_back(term("r x d_x", {0, 0}, unit_deriv(d, {{0, 1}}),
                           [r](double, std::span<const double> s) { return r * s[0]; }));
    g.terms.push_back(term("lambda pi V x d_x", {1, 0}, unit_deriv(d, {{0, 1}}),
                           [V, lam = h.lambda](double t, std::span<const double> s) { return lam * V(t, s) * s[0]; },
                           true));
    g.terms.push_back(term("pi^2 V x^2/2 d_xx", {2, 0}, unit_deriv(d, {{0, 2}}),
                           [V](double t, std::span<const double> s) { return 0.5 * V(t, s) * s[0] * s[0]; }, true));
    if (q) {
        g.terms.push_back(term("c vartheta q x d_x", {0, 1}, unit_deriv(d, {{0, 1}}),
                               [cv = q->c * q->vartheta](double, std::span<const double> s) { return cv * s[0]; }));
        g.terms.push_back(term("b^2 q^2 x^2/2 d_xx", {0, 2}, unit_deriv(d, {{0, 2}}),
                               [b2 = q->b * q->b](double, std::span<const double> s) { return 0.5 * b2 * s[0] * s[0]; }));
    }
    for (int i = 0; i < ell; ++i) {
        g.terms.push_back(term("-(gamma_i v_i + kappa V) d_v" + std::to_string(i + 1), {0, 0},
                               unit_deriv(d, {{1 + i, 1}}),
                               [V, gi = k.rates[i], kap = h.kappa, i](double t, std::span<const double> s) {
                                   return -(gi * s[1 + i] + kap * V(t, s));
                               },
                               true));
    }
    // Literal double sum over all (i, j) pairs, each with the same coefficient.
    for (int i = 0; i < ell; ++i) {
        for (int j = 0; j < ell; ++j) {
            g.terms.push_back(term("sigma^2 V/2 d_v" + std::to_string(i + 1) + "v" + std::to_string(j + 1), {0, 0},
                                   unit_deriv(d, {{1 + i, 1}, {1 + j, 1}}),
                                   [V, s2 = h.sigma * h.sigma](double t, std::span<const double> s) {
                                       return 0.5 * s2 * V(t, s);
                                   },
                                   true));
        }
    }
    for (int i = 0; i < ell; ++i) {
        g.terms.push_back(term("rho sigma x pi V d_xv" + std::to_string(i + 1), {1, 0},
                               unit_deriv(d, {{0, 1}, {1 + i, 1}}),
                               [V, rs = h.rho * h.sigma](double t, std::span<const double> s) {
                                   return rs * s[0] * V(t, s);
                               },
                               true));
    }
    return g;
}

SLVModel slv_preset(std::string_view name, const SLVPresetParams& p) {
    SLVModel m;
    m.name = std::string(name);
    m.rho = p.rho;
    m.gamma = p.gamma;
    m.L = p.L;
    m.r = p.r;
    auto heston_drift = [r = p.r, lam = p.lambda](double s, double v) { return (r + lam * v) * s; };
    auto identity_local = [](double s) { return s; };
    auto sqrt_vol = [sg = p.sigma](double v) { return sg * std::sqrt(v); };
    if (name == "heston") {
        m.omega = heston_drift;
        m.eta = [](double v) { return std::sqrt(v); };
        m.local_vol = identity_local;
        m.beta = [k = p.kappa, th = p.theta](double v) { return k * (th - v); };
        m.zeta = sqrt_vol;
    } else if (name == "four_two") {
        m.omega = heston_drift;
        m.eta = [a = p.a, b = p.b](double v) { return a * std::sqrt(v) + b / std::sqrt(v); };
        m.local_vol = identity_local;
        m.beta = [k = p.kappa, th = p.theta](double v) { return k * (th - v); };
        m.zeta = sqrt_vol;
    } else if (name == "alpha_hyper") {
        m.omega = heston_drift;
        m.eta = [](double v) { return std::exp(v); };
        m.local_vol = identity_local;
        m.beta = [k = p.kappa, th = p.theta, a = p.a](double v) { return k * (th - std::exp(a * v)); };
        m.zeta = sqrt_vol;
    } else if (name == "sabr") {
        m.omega = [r = p.r](double s, double) { return r * s; };
        m.eta = [](double v) { return v; };
        m.local_vol = [be = p.beta_exp](double s) { return std::pow(s, be); };
        m.beta = [](double) { return 0.0; };
        m.zeta = [sv = p.sigma_v](double v) { return sv * v; };
    } else {
        throw InputError("unknown SLV preset '" + std::string(name) + "'");
    }
    return m;
}

ControlledGenerator slv_generator(const SLVModel& m) {
    if (m.gamma < 0) throw InputError("utility discount gamma must be non-negative");
    if (m.L < 0) throw InputError("wealth threshold L must be non-negative");
    ControlledGenerator g;
    g.dim = 3;
    g.controls = {pi_control()};
    // state = (x, s, v)
    auto eg2 = [m](std::span<const double> st) {
        const double e = m.eta(st[2]) * m.local_vol(st[1]);
        return e * e;
    };
    GeneratorTerm disc = term("-gamma f", {0, 0}, {0, 0, 0},
                              [gm = m.gamma](double, std::span<const double>) { return -gm; });
    disc.zeroth_order_ok = true;
    g.terms.push_back(std::move(disc));
    g.terms.push_back(term("r x d_x", {0, 0}, unit_deriv(3, {{0, 1}}),
                           [r = m.r](double, std::span<const double> s) { return r * s[0]; }));
    g.terms.push_back(term("(omega/s - r) pi x d_x", {1, 0}, unit_deriv(3, {{0, 1}}),
                           [m](double, std::span<const double> s) { return (m.omega(s[1], s[2]) / s[1] - m.r) * s[0]; }));
    g.terms.push_back(term("eta^2 Gamma^2/s^2 pi^2 x^2/2 d_xx", {2, 0}, unit_deriv(3, {{0, 2}}),
                           [eg2](double, std::span<const double> s) { return 0.5 * eg2(s) * s[0] * s[0] / (s[1] * s[1]); }));
    g.terms.push_back(term("omega d_s", {0, 0}, unit_deriv(3, {{1, 1}}),
                           [m](double, std::span<const double> s) { return m.omega(s[1], s[2]); }));
    g.terms.push_back(term("eta^2 Gamma^2/2 d_ss", {0, 0}, unit_deriv(3, {{1, 2}}),
                           [eg2](double, std::span<const double> s) { return 0.5 * eg2(s); }));
    g.terms.push_back(term("beta d_v", {0, 0}, unit_deriv(3, {{2, 1}}),
                           [m](double, std::span<const double> s) { return m.beta(s[2]); }));
    g.terms.push_back(term("zeta/2 d_vv", {0, 0}, unit_deriv(3, {{2, 2}}),
                           [m](double, std::span<const double> s) { return 0.5 * m.zeta(s[2]); }));
    g.terms.push_back(term("eta^2 Gamma^2 pi x/s d_xs", {1, 0}, unit_deriv(3, {{0, 1}, {1, 1}}),
                           [eg2](double, std::span<const double> s) { return eg2(s) * s[0] / s[1]; }));
    g.terms.push_back(term("zeta eta Gamma rho pi x/s d_xv", {1, 0}, unit_deriv(3, {{0, 1}, {2, 1}}),
                           [m](double, std::span<const double> s) {
                               return m.zeta(s[2]) * m.eta(s[2]) * m.local_vol(s[1]) * m.rho * s[0] / s[1];
                           }));
    g.terms.push_back(term("zeta eta Gamma rho d_sv", {0, 0}, unit_deriv(3, {{1, 1}, {2, 1}}),
                           [m](double, std::span<const double> s) {
                               return m.zeta(s[2]) * m.eta(s[2]) * m.local_vol(s[1]) * m.rho;
                           }));
    return g;
}

double wealth_shift(const ReinsuranceParams& q, double horizon, double t) {
    if (t < 0 || t > horizon) throw InputError("wealth_shift requires 0 <= t <= T");
    const double tau = horizon - t;
    if (q.r == 0.0) return q.c * (q.eta - q.vartheta) * tau;
    return q.c * (q.eta - q.vartheta) * (1.0 - std::exp(-q.r * tau)) / q.r;
}

}  // namespace deltahjb
