#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deltahjb {

/// Control values in fixed slots: [0] = pi (investment), [1] = q (reinsurance).
using Controls = std::array<double, 2>;
inline constexpr int kPi = 0;
inline constexpr int kQ = 1;

using CoefficientFn = std::function<double(double t, std::span<const double> state)>;

/// One summand  pi^{p_pi} q^{p_q} * coeff(t, state) * D^deriv f.
struct GeneratorTerm {
    std::array<int, 2> control_powers{0, 0};
    CoefficientFn coeff;
    std::vector<int> deriv;
    bool zeroth_order_ok = false;
    bool time_dependent = false;
    std::string label;
};

struct ControlSpec {
    std::string name;
    double lo = -10.0;
    double hi = 10.0;
    bool floor_at_zero = false;
};

/// Infinitesimal generator written as a polynomial in the controls whose
/// coefficients are state-dependent differential operators.
struct ControlledGenerator {
    int dim = 0;
    std::vector<GeneratorTerm> terms;
    std::vector<ControlSpec> controls;

    /// Throws InputError if a structural invariant is broken.
    void validate() const;

    /// Distinct derivative multi-indices used by the terms, in first-use order.
    std::vector<std::vector<int>> derivative_set() const;
};

/// Returns D^alpha f at the point being evaluated.
using DerivativeFn = std::function<double(std::span<const int> alpha)>;

double apply_generator(const ControlledGenerator& gen, double t, std::span<const double> state,
                       const Controls& controls, const DerivativeFn& derivs);

struct HestonParams {
    double r = 0.05;
    double lambda = 0.5;
    double kappa = 10.0;
    double theta = 0.05;
    double sigma = 0.5;
    double rho = -0.5;
    double v0 = 0.5;

    void validate() const;
};

struct ReinsuranceParams {
    double c = 0.13;
    double b = 0.6;
    double eta = 0.3;
    double vartheta = 0.5;
    double L = 0.0;
    double r = 0.05;

    void validate() const;
};

/// Multi-factor approximation of the fractional kernel t^{alpha-1}/Gamma(alpha)
/// by sum_i c_i exp(-gamma_i t), plus the variance parameters it drives.
struct RoughKernelApprox {
    double alpha = 1.0;
    std::vector<double> weights;
    std::vector<double> rates;
    HestonParams heston;

    int factors() const noexcept { return static_cast<int>(weights.size()); }
    void validate() const;
};

/// Power utility U(x) = x^p / p, optionally shifted by a wealth threshold L.
struct PowerUtility {
    double p = 0.5;
    double L = 0.0;

    double operator()(double x) const;
};

ControlledGenerator heston_investment_generator(const HestonParams& p);

ControlledGenerator reinsurance_heston_generator(const HestonParams& p, const ReinsuranceParams& q);

/// Geometric cells [0, g^{1/l}], ..., [g^{(l-1)/l}, g] of [0, gamma_max] (gamma_max > 1),
/// mass-preserving weights and mass-weighted centroid rates.
RoughKernelApprox kernel_nodes(double alpha, int factors, double gamma_max, const HestonParams& heston = {});

/// The fractional kernel K(t) = t^{alpha-1}/Gamma(alpha).
double fractional_kernel(double alpha, double t);

/// sum_i c_i exp(-gamma_i t).
double smoothed_kernel(const RoughKernelApprox& k, double t);

/// xi(t) = V0 + kappa*theta*t^alpha/Gamma(alpha+1).
double xi_curve(const RoughKernelApprox& k, double t);

/// Lifted total variance xi(t) + sum_l c_l v_l, with state = (x, v_1..v_l).
double lifted_variance(const RoughKernelApprox& k, double t, std::span<const double> state);

ControlledGenerator rough_multifactor_generator(const RoughKernelApprox& k,
                                                const std::optional<ReinsuranceParams>& q);

struct SLVModel {
    std::string name;
    std::function<double(double s, double v)> omega;
    std::function<double(double v)> eta;
    std::function<double(double s)> local_vol;
    std::function<double(double v)> beta;
    std::function<double(double v)> zeta;
    double rho = 0.0;
    double gamma = 0.0;
    double L = 0.0;
    double r = 0.0;
};

struct SLVPresetParams {
    double r = 0.05;
    double lambda = 0.5;
    double kappa = 10.0;
    double theta = 0.05;
    double sigma = 0.5;
    double rho = -0.5;
    double a = 0.5;
    double b = 0.04;
    double beta_exp = 0.5;
    double sigma_v = 0.3;
    double gamma = 0.15;
    double L = 1.0;
};

/// heston | four_two | alpha_hyper | sabr
SLVModel slv_preset(std::string_view name, const SLVPresetParams& params);

/// Generator over state (x, s, v) including the -gamma f discount term.
ControlledGenerator slv_generator(const SLVModel& m);

/// D(t) = c(eta - vartheta) * int_t^T exp(-r(s-t)) ds.
double wealth_shift(const ReinsuranceParams& q, double horizon, double t);

}  // namespace deltahjb
