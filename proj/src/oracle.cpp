#include "deltahjb/oracle.hpp"

#include "deltahjb/csv.hpp"
#include "deltahjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace deltahjb {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream)
    : key_(splitmix(splitmix(splitmix(seed) ^ path) ^ (stream * 0x632be59bd9b4e019ULL))) {}

CounterRng::result_type CounterRng::operator()() { return splitmix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

RiccatiSolution::RiccatiSolution(double p, const HestonParams& params, double T, int steps)
    : p_(p), params_(params), T_(T), steps_(steps) {
    if (!(p > 0 && p < 1)) throw InputError("utility exponent p must lie in (0, 1)");
    if (!(T > 0) || steps < 1) throw InputError("Riccati solve needs T > 0 and steps >= 1");
    const double lam = params.lambda, rs = params.rho * params.sigma, k = params.kappa;
    const double s2 = params.sigma * params.sigma, kt = params.kappa * params.theta;
    // In time-to-go tau = T - t: b' = p (lambda + rho sigma b)^2 / (2(1-p)) - kappa b + sigma^2 b^2 / 2, a' = kappa theta b.
    auto fb = [=](double b) {
        const double m = lam + rs * b;
        return p * m * m / (2.0 * (1.0 - p)) - k * b + 0.5 * s2 * b * b;
    };
    const double dt = T / steps;
    a_.assign(steps + 1, 0.0);
    b_.assign(steps + 1, 0.0);
    da_.assign(steps + 1, 0.0);
    db_.assign(steps + 1, 0.0);
    db_[0] = fb(0.0);
    for (int i = 0; i < steps; ++i) {
        const double b = b_[i];
        const double k1 = fb(b);
        const double k2 = fb(b + 0.5 * dt * k1);
        const double k3 = fb(b + 0.5 * dt * k2);
        const double k4 = fb(b + dt * k3);
        b_[i + 1] = b + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(b_[i + 1]) || std::abs(b_[i + 1]) > 1e8)
            throw OracleUnavailable("Riccati solution blows up", T - (i + 1) * dt);
        db_[i + 1] = fb(b_[i + 1]);
        // a integrates kappa theta b; Simpson with the Hermite midpoint of b.
        const double bm = 0.5 * (b + b_[i + 1]) + dt / 8.0 * (db_[i] - db_[i + 1]);
        a_[i + 1] = a_[i] + kt * dt / 6.0 * (b + 4.0 * bm + b_[i + 1]);
        da_[i + 1] = kt * b_[i + 1];
    }
}

double RiccatiSolution::interp(const std::vector<double>& f, const std::vector<double>& df, double t) const {
    if (t < -1e-12 || t > T_ + 1e-12) throw InputError("oracle time outside [0, T]");
    const double tau = std::clamp(T_ - t, 0.0, T_);
    const double dt = T_ / steps_;
    const int i = std::min(static_cast<int>(tau / dt), steps_ - 1);
    const double s = (tau - i * dt) / dt;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * f[i] + h10 * dt * df[i] + h01 * f[i + 1] + h11 * dt * df[i + 1];
}

double RiccatiSolution::a(double t) const { return interp(a_, da_, t); }
double RiccatiSolution::b(double t) const { return interp(b_, db_, t); }

double RiccatiSolution::value(double t, double x, double v) const {
    if (!(x > 0)) throw DomainError("oracle value needs x > 0");
    return std::pow(x, p_) / p_ * std::exp(a(t) + b(t) * v);
}

double RiccatiSolution::strategy(double t) const {
    // From the ansatz: V_x = p V / x, V_xx = p(p-1) V / x^2, V_xv = p b V / x, so the
    // first-order condition -(lambda v x V_x + rho sigma x v V_xv) / (v x^2 V_xx) reduces to:
    return (params_.lambda + params_.rho * params_.sigma * b(t)) / (1.0 - p_);
}

OracleValue heston_closed_form(double p, const HestonParams& params, double T, double t, double x, double v) {
    const RiccatiSolution r(p, params, T);
    return {r.value(t, x, v), r.strategy(t)};
}

double merton_strategy(double p, double lambda) {
    if (!(p > 0) || p >= 1) throw InputError("Merton strategy needs 0 < p < 1");
    return lambda / (1.0 - p);
}

namespace {

struct PathResult {
    double terminal = 0.0;
    long long clamped = 0;
};

// One Euler path. `record` (optional) receives every time point including t = 0.
template <class Record>
PathResult run_path(const PathModel& model, const StrategyField& strategy, std::span<const double> init, double T,
                    int steps, std::uint64_t seed, std::uint64_t path, Record&& record) {
    const int nf = model.factors();
    const int d = 1 + nf;
    std::vector<double> state(init.begin(), init.end()), probe(d);
    CounterRng pair_rng(seed, path, 0), ins_rng(seed, path, 1);
    std::normal_distribution<double> pair_normal(0.0, 1.0), ins_normal(0.0, 1.0);
    const auto& h = model.heston;
    const double rho = h.rho, rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double dt = T / steps, sdt = std::sqrt(dt);
    const bool reins = model.kind != PathModelKind::HestonInvestment;
    const double r = reins ? model.reinsurance.r : 0.0;
    const double cv = model.reinsurance.c * model.reinsurance.vartheta, b = model.reinsurance.b;
    PathResult res;

    auto total_variance = [&](double t) {
        return model.kind == PathModelKind::ReinsuranceRough ? lifted_variance(model.rough, t, state) : state[1];
    };

    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        std::copy(state.begin(), state.end(), probe.begin());
        if (strategy.box().clamp(probe)) ++res.clamped;
        Controls u = strategy.at_time(t, probe);
        if (!reins) u[kQ] = 0.0;
        const double V = total_variance(t);
        record(t, state[0], V, u);
        if (k == steps) break;

        const double z1 = pair_normal(pair_rng), z2 = pair_normal(pair_rng);
        const double dw1 = sdt * z1, dw2 = sdt * (rho * z1 + rho_c * z2);
        const double dw = reins ? sdt * ins_normal(ins_rng) : 0.0;
        const double vp = std::max(V, 0.0), sv = std::sqrt(vp);
        const double x = state[0];
        state[0] = x + (r * x + u[kPi] * h.lambda * vp * x + u[kQ] * cv * x) * dt + u[kPi] * x * sv * dw1 +
                   u[kQ] * b * x * dw;
        if (model.kind == PathModelKind::ReinsuranceRough) {
            for (int i = 0; i < nf; ++i)
                state[1 + i] += -(model.rough.rates[i] * state[1 + i] + h.kappa * vp) * dt + h.sigma * sv * dw2;
        } else {
            state[1] += h.kappa * (h.theta - vp) * dt + h.sigma * sv * dw2;
        }
    }
    res.terminal = state[0];
    return res;
}

void check_init(const PathModel& model, std::span<const double> init) {
    if (static_cast<int>(init.size()) != 1 + model.factors())
        throw InputError("initial state must hold wealth plus " + std::to_string(model.factors()) + " variance factor(s)");
}

}  // namespace

McEstimate mc_policy_eval(const PathModel& model, const StrategyField& strategy, std::span<const double> init,
                          double T, int steps, long long paths, std::uint64_t seed) {
    check_init(model, init);
    if (steps < 1 || paths < 1) throw InputError("Monte Carlo needs steps >= 1 and paths >= 1");
    std::vector<double> payoff(paths);
    std::vector<long long> clamps(paths);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < paths; ++i) {
        const auto res = run_path(model, strategy, init, T, steps, seed, static_cast<std::uint64_t>(i),
                                  [](double, double, double, const Controls&) {});
        payoff[i] = model.utility(res.terminal);
        clamps[i] = res.clamped;
    }
    McEstimate est;
    est.paths = paths;
    est.seed = seed;
    long long bad = 0;
    double sum = 0.0;
    for (long long i = 0; i < paths; ++i) {
        if (!std::isfinite(payoff[i])) ++bad;
        sum += payoff[i];
        est.clamped += clamps[i];
    }
    if (bad > 0)
        throw NumericalError("Monte Carlo produced " + std::to_string(bad) + " non-finite payoffs (wealth below L)");
    est.mean = sum / paths;
    double ss = 0.0;
    for (long long i = 0; i < paths; ++i) ss += (payoff[i] - est.mean) * (payoff[i] - est.mean);
    est.std_error = paths > 1 ? std::sqrt(ss / (paths - 1) / paths) : 0.0;
    return est;
}

std::vector<PathRecord> simulate_paths(const PathModel& model, const StrategyField& strategy,
                                       std::span<const double> init, double T, int steps, std::uint64_t seed,
                                       long long count) {
    check_init(model, init);
    if (steps < 1 || count < 1) throw InputError("path simulation needs steps >= 1 and count >= 1");
    std::vector<std::vector<PathRecord>> per_path(count);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        auto& rec = per_path[i];
        rec.reserve(steps + 1);
        run_path(model, strategy, init, T, steps, seed, static_cast<std::uint64_t>(i),
                 [&](double t, double x, double V, const Controls& u) { rec.push_back({t, i, x, V, u[kPi], u[kQ]}); });
    }
    std::vector<PathRecord> out;
    out.reserve(static_cast<std::size_t>(count) * (steps + 1));
    long long bad = 0;
    for (auto& rec : per_path)
        for (const auto& r : rec) {
            if (!std::isfinite(r.wealth) || !std::isfinite(r.variance)) ++bad;
            out.push_back(r);
        }
    if (bad > 0) throw NumericalError("path simulation produced " + std::to_string(bad) + " non-finite records");
    return out;
}

void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& records) {
    os << "time,path_id,wealth,variance,pi,q\n";
    for (const auto& r : records)
        os << csv::num(r.time) << ',' << r.path_id << ',' << csv::num(r.wealth) << ',' << csv::num(r.variance) << ','
           << csv::num(r.pi) << ',' << csv::num(r.q) << '\n';
}

}  // namespace deltahjb
