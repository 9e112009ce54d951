#pragma once

#include <span>
#include <vector>

namespace deltahjb {

enum class BasisFamily { Legendre, Hermite, Laguerre };

/// Raw orthogonal polynomial P_k, H_k (physicists') or L_k at y, by three-term recurrence.
double eval_polynomial(BasisFamily family, int k, double y);

/// Orthonormal functions g_0..g_M of one family on its reference domain.
///
/// Legendre: g_k = sqrt(k + 1/2) P_k on [-1, 1].
/// Hermite:  g_k = exp(-y^2/2) H_k / (pi^{1/4} 2^{k/2} sqrt(k!)) on the real line.
/// Laguerre: g_k = exp(-y/2) L_k on [0, inf).
///
/// Derivatives are taken with respect to the reference coordinate; callers working
/// on a physical interval multiply by AffineMap::scale() raised to the derivative order.
class OrthoBasis {
public:
    OrthoBasis(BasisFamily family, int order);

    BasisFamily family() const noexcept { return family_; }
    int order() const noexcept { return order_; }
    int size() const noexcept { return order_ + 1; }

    double eval(int k, double y, int deriv_order = 0) const;

    /// Fills out[0..order] with g_k^{(deriv_order)}(y). out.size() must be >= size().
    void eval_all(double y, int deriv_order, std::span<double> out) const;

private:
    BasisFamily family_;
    int order_;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int count() const noexcept { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending. 1 <= n <= 200.
QuadratureRule gauss_legendre(int n);

/// Affine map between the reference interval [-1, 1] and a physical interval [lo, hi].
class AffineMap {
public:
    AffineMap(double lo, double hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

    double forward(double y) const noexcept { return (hi_ - lo_) * (y + 1.0) / 2.0 + lo_; }

    /// Reference coordinate of x. Points within 1e-12 of the interval are clamped;
    /// anything further out throws DomainError.
    double inverse(double x) const;

    /// d(reference)/d(physical) = 2 / (hi - lo).
    double scale() const noexcept { return 2.0 / (hi_ - lo_); }

private:
    double lo_;
    double hi_;
};

/// Truncated completeness sum  sum_{k<=M} g_k(y) g_k(a).
double delta_partial_sum(const OrthoBasis& basis, double y, double a);

}  // namespace deltahjb
