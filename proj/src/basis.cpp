#include "deltahjb/basis.hpp"

#include "deltahjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace deltahjb {

namespace {

constexpr double kDomainTol = 1e-12;

void check_domain(BasisFamily family, double y) {
    switch (family) {
    case BasisFamily::Legendre:
        if (!(std::abs(y) <= 1.0 + kDomainTol))
            throw DomainError("Legendre argument outside [-1, 1]: " + std::to_string(y));
        break;
    case BasisFamily::Laguerre:
        if (!(y >= -kDomainTol))
            throw DomainError("Laguerre argument below 0: " + std::to_string(y));
        break;
    case BasisFamily::Hermite:
        if (!std::isfinite(y))
            throw DomainError("Hermite argument is not finite");
        break;
    }
}

// Generalized Laguerre L_k^{(alpha)}(y); zero for k < 0.
double generalized_laguerre(int k, double alpha, double y) {
    if (k < 0) return 0.0;
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = 1.0 + alpha - y;
    for (int j = 1; j < k; ++j) {
        const double next = ((2.0 * j + 1.0 + alpha - y) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

void legendre_all(int order, double y, int deriv, std::span<double> out) {
    // P, P', P'' recurrences; P'_{k+1} = P'_{k-1} + (2k+1) P_k avoids the 1/(1-y^2) form.
    double p_prev = 1.0, p_cur = y;
    double d1_prev = 0.0, d1_cur = 1.0;
    double d2_prev = 0.0, d2_cur = 0.0;
    for (int k = 0; k <= order; ++k) {
        double p, d1, d2;
        if (k == 0) {
            p = 1.0; d1 = 0.0; d2 = 0.0;
        } else if (k == 1) {
            p = y; d1 = 1.0; d2 = 0.0;
        } else {
            const int j = k - 1;
            p = ((2.0 * j + 1.0) * y * p_cur - j * p_prev) / (j + 1.0);
            d1 = d1_prev + (2.0 * j + 1.0) * p_cur;
            d2 = d2_prev + (2.0 * j + 1.0) * d1_cur;
            p_prev = p_cur; p_cur = p;
            d1_prev = d1_cur; d1_cur = d1;
            d2_prev = d2_cur; d2_cur = d2;
        }
        const double norm = std::sqrt(k + 0.5);
        out[k] = norm * (deriv == 0 ? p : deriv == 1 ? d1 : d2);
    }
}

void hermite_all(int order, double y, int deriv, std::span<double> out) {
    // Normalized Hermite functions psi_0..psi_{order+1}.
    std::vector<double> psi(order + 2);
    psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
    if (order + 1 >= 1) psi[1] = std::sqrt(2.0) * y * psi[0];
    for (int k = 1; k + 1 <= order + 1; ++k)
        psi[k + 1] = std::sqrt(2.0 / (k + 1)) * y * psi[k] - std::sqrt(double(k) / (k + 1)) * psi[k - 1];
    for (int k = 0; k <= order; ++k) {
        if (deriv == 0) {
            out[k] = psi[k];
        } else if (deriv == 1) {
            const double lower = k > 0 ? std::sqrt(k / 2.0) * psi[k - 1] : 0.0;
            out[k] = lower - std::sqrt((k + 1) / 2.0) * psi[k + 1];
        } else {
            out[k] = (y * y - (2.0 * k + 1.0)) * psi[k];
        }
    }
}

void laguerre_all(int order, double y, int deriv, std::span<double> out) {
    const double damp = std::exp(-0.5 * y);
    for (int k = 0; k <= order; ++k) {
        const double l0 = generalized_laguerre(k, 0.0, y);
        if (deriv == 0) {
            out[k] = damp * l0;
            continue;
        }
        const double l1 = -generalized_laguerre(k - 1, 1.0, y);
        if (deriv == 1) {
            out[k] = damp * (l1 - 0.5 * l0);
            continue;
        }
        const double l2 = generalized_laguerre(k - 2, 2.0, y);
        out[k] = damp * (l2 - l1 + 0.25 * l0);
    }
}

}  // namespace

double eval_polynomial(BasisFamily family, int k, double y) {
    if (k < 0) throw InputError("polynomial index must be non-negative");
    check_domain(family, y);
    switch (family) {
    case BasisFamily::Legendre: {
        double prev = 1.0, cur = y;
        if (k == 0) return prev;
        for (int j = 1; j < k; ++j) {
            const double next = ((2.0 * j + 1.0) * y * cur - j * prev) / (j + 1.0);
            prev = cur;
            cur = next;
        }
        return cur;
    }
    case BasisFamily::Hermite: {
        double prev = 1.0, cur = 2.0 * y;
        if (k == 0) return prev;
        for (int j = 1; j < k; ++j) {
            const double next = 2.0 * y * cur - 2.0 * j * prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    case BasisFamily::Laguerre:
        return generalized_laguerre(k, 0.0, y);
    }
    return 0.0;
}

OrthoBasis::OrthoBasis(BasisFamily family, int order) : family_(family), order_(order) {
    if (order < 0) throw InputError("basis order must be non-negative");
}

void OrthoBasis::eval_all(double y, int deriv_order, std::span<double> out) const {
    if (deriv_order < 0 || deriv_order > 2)
        throw InputError("unsupported derivative order " + std::to_string(deriv_order));
    if (out.size() < static_cast<std::size_t>(size()))
        throw InputError("output span too small for basis evaluation");
    check_domain(family_, y);
    switch (family_) {
    case BasisFamily::Legendre: legendre_all(order_, y, deriv_order, out); break;
    case BasisFamily::Hermite: hermite_all(order_, y, deriv_order, out); break;
    case BasisFamily::Laguerre: laguerre_all(order_, y, deriv_order, out); break;
    }
}

double OrthoBasis::eval(int k, double y, int deriv_order) const {
    if (k < 0 || k > order_)
        throw InputError("basis index " + std::to_string(k) + " exceeds order " + std::to_string(order_));
    std::vector<double> all(size());
    OrthoBasis truncated(family_, k);
    truncated.eval_all(y, deriv_order, all);
    return all[k];
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 200) throw InputError("Gauss-Legendre node count must be in [1, 200]");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            double p_prev = 1.0, p = z;
            for (int j = 1; j < n; ++j) {
                const double next = ((2.0 * j + 1.0) * z * p - j * p_prev) / (j + 1.0);
                p_prev = p;
                p = next;
            }
            if (n == 1) { p = z; p_prev = 1.0; }
            dp = n * (z * p - p_prev) / (z * z - 1.0);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) <= 1e-15) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericalError("Gauss-Legendre root " + std::to_string(i) + " did not converge");
        // Recompute the derivative at the converged root for the weight.
        double p_prev = 1.0, p = z;
        for (int j = 1; j < n; ++j) {
            const double next = ((2.0 * j + 1.0) * z * p - j * p_prev) / (j + 1.0);
            p_prev = p;
            p = next;
        }
        if (n == 1) { p = z; p_prev = 1.0; }
        dp = n * (z * p - p_prev) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // Guesses run from the largest root down; store ascending and mirror.
        rule.nodes[n - 1 - i] = z;
        rule.nodes[i] = -z;
        rule.weights[n - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

AffineMap::AffineMap(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InputError("interval requires finite lo < hi");
}

double AffineMap::inverse(double x) const {
    const double tol = kDomainTol * std::max(1.0, std::max(std::abs(lo_), std::abs(hi_)));
    if (!(x >= lo_ - tol && x <= hi_ + tol))
        throw DomainError("point " + std::to_string(x) + " outside [" + std::to_string(lo_) + ", " +
                          std::to_string(hi_) + "]");
    const double y = 2.0 * (x - lo_) / (hi_ - lo_) - 1.0;
    return std::clamp(y, -1.0, 1.0);
}

double delta_partial_sum(const OrthoBasis& basis, double y, double a) {
    std::vector<double> gy(basis.size()), ga(basis.size());
    basis.eval_all(y, 0, gy);
    basis.eval_all(a, 0, ga);
    double sum = 0.0;
    for (int k = 0; k < basis.size(); ++k) sum += gy[k] * ga[k];
    return sum;
}

}  // namespace deltahjb
