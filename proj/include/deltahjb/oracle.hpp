#pragma once

#include "deltahjb/models.hpp"
#include "deltahjb/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace deltahjb {

/// Backward solution of the Riccati system behind V = (x^p/p) exp(a(t) + b(t) v)
/// for the Heston investment problem, sampled densely and interpolated with
/// cubic Hermite splines.
class RiccatiSolution {
public:
    RiccatiSolution(double p, const HestonParams& params, double T, int steps = 10000);

    double a(double t) const;
    double b(double t) const;
    double p() const noexcept { return p_; }
    double horizon() const noexcept { return T_; }

    double value(double t, double x, double v) const;
    /// pi* = (lambda + rho sigma b(t)) / (1 - p).
    double strategy(double t) const;

private:
    double interp(const std::vector<double>& f, const std::vector<double>& df, double t) const;

    double p_;
    HestonParams params_;
    double T_;
    int steps_;
    std::vector<double> a_, b_, da_, db_;
};

struct OracleValue {
    double value;
    double strategy;
};

OracleValue heston_closed_form(double p, const HestonParams& params, double T, double t, double x, double v);

/// lambda / (1 - p).
double merton_strategy(double p, double lambda);

enum class PathModelKind { HestonInvestment, ReinsuranceHeston, ReinsuranceRough };

struct PathModel {
    PathModelKind kind = PathModelKind::HestonInvestment;
    HestonParams heston;
    ReinsuranceParams reinsurance;
    RoughKernelApprox rough;
    PowerUtility utility;

    /// Number of variance coordinates after wealth.
    int factors() const noexcept { return kind == PathModelKind::ReinsuranceRough ? rough.factors() : 1; }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long paths = 0;
    std::uint64_t seed = 0;
    long long clamped = 0;  // strategy evaluations that needed the state clamped into the box
};

/// Sample mean of U(X_T) under the feedback strategy; init = (x0, v0) or (x0, v_1..v_l).
McEstimate mc_policy_eval(const PathModel& model, const StrategyField& strategy, std::span<const double> init,
                          double T, int steps, long long paths, std::uint64_t seed);

struct PathRecord {
    double time;
    long long path_id;
    double wealth;
    double variance;
    double pi;
    double q;
};

std::vector<PathRecord> simulate_paths(const PathModel& model, const StrategyField& strategy,
                                       std::span<const double> init, double T, int steps, std::uint64_t seed,
                                       long long count);

void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& records);

/// Stateless uniform bits keyed by (seed, path, stream); satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace deltahjb
