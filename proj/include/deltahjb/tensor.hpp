#pragma once

#include "deltahjb/basis.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deltahjb {

/// Physical solve box; dimension 0 is always wealth.
class DomainBox {
public:
    DomainBox() = default;
    explicit DomainBox(std::vector<AffineMap> maps);
    DomainBox(std::initializer_list<std::pair<double, double>> intervals);

    int dim() const noexcept { return static_cast<int>(maps_.size()); }
    const AffineMap& operator[](int j) const { return maps_.at(j); }
    const std::vector<AffineMap>& maps() const noexcept { return maps_; }

    /// Reference coordinates of a physical point; throws DomainError outside the box.
    void to_reference(std::span<const double> state, std::span<double> y) const;

    /// Clamps each coordinate into [lo_j, hi_j]. Returns true if anything moved.
    bool clamp(std::span<double> state) const;

    bool contains(std::span<const double> state, double tol = 1e-12) const;

    friend bool operator==(const DomainBox& a, const DomainBox& b);

private:
    std::vector<AffineMap> maps_;
};

/// Dense coefficients V_m on a tensor-product Legendre basis, row-major with
/// dimension 0 slowest.
class CoefficientTensor {
public:
    CoefficientTensor() = default;
    CoefficientTensor(std::vector<int> orders, DomainBox box, std::vector<double> values = {},
                      int time_index = 0);

    int dim() const noexcept { return static_cast<int>(orders_.size()); }
    const std::vector<int>& orders() const noexcept { return orders_; }
    const DomainBox& box() const noexcept { return box_; }
    std::size_t size() const noexcept { return values_.size(); }
    int time_index() const noexcept { return time_index_; }
    void set_time_index(int n) noexcept { time_index_ = n; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double at(std::span<const int> k) const { return values_[flat_index(k)]; }
    double& at(std::span<const int> k) { return values_[flat_index(k)]; }

    std::size_t flat_index(std::span<const int> k) const;
    void multi_index(std::size_t flat, std::span<int> k) const;

    bool same_shape(const CoefficientTensor& other) const;

private:
    std::vector<int> orders_;
    DomainBox box_;
    std::vector<double> values_;
    int time_index_ = 0;
};

using StateFunction = std::function<double(std::span<const double>)>;

/// Coefficients of f on the reference cube by tensorized Gauss quadrature
/// (no affine Jacobian applied). One rule per dimension.
CoefficientTensor project(const StateFunction& f, const DomainBox& box, std::vector<int> orders,
                          const std::vector<QuadratureRule>& rules);

/// Same rule shared across all dimensions.
CoefficientTensor project(const StateFunction& f, const DomainBox& box, std::vector<int> orders,
                          const QuadratureRule& rule);

/// sum_m V_m prod_j g_{m_j}(x~_j(state_j)).
double reconstruct(const CoefficientTensor& tensor, std::span<const double> state);

/// Entrywise a*t1 + b*t2.
CoefficientTensor tensor_linear_combine(double a, const CoefficientTensor& t1, double b,
                                        const CoefficientTensor& t2);

// CSV layout:
//   dim,orders,box
//   <d>,<M_0 ... M_{d-1}>,<lo_0 hi_0 ... lo_{d-1} hi_{d-1}>
//   k_0,...,k_{d-1},value        (one row per multi-index, 17 significant digits)
void write_tensor_csv(std::ostream& os, const CoefficientTensor& tensor);
CoefficientTensor read_tensor_csv(std::istream& is);

}  // namespace deltahjb
