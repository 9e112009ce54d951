#pragma once

#include "deltahjb/basis.hpp"
#include "deltahjb/tensor.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace deltahjb {

/// out = A ×_axis in for a row-major tensor: replaces extent shape[axis] by `rows`.
/// A is rows × shape[axis], row-major. Each output entry is summed in ascending
/// order of the contracted index, so results do not depend on the thread count.
void contract_axis(std::span<const double> in, std::span<const int> shape, int axis,
                   std::span<const double> A, int rows, std::span<double> out);

/// Tensor-product Gauss-Legendre grid on a box with cached basis tables.
///
/// Nodes are flattened row-major with dimension 0 slowest, matching the
/// coefficient layout. All transforms are sum-factorized one axis at a time.
class SpectralGrid {
public:
    SpectralGrid(DomainBox box, std::vector<int> orders, std::vector<QuadratureRule> rules);

    int dim() const noexcept { return static_cast<int>(orders_.size()); }
    const DomainBox& box() const noexcept { return box_; }
    const std::vector<int>& orders() const noexcept { return orders_; }
    const std::vector<QuadratureRule>& rules() const noexcept { return rules_; }
    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_coeffs() const noexcept { return num_coeffs_; }

    /// Physical coordinates of node `flat`.
    void node_state(std::size_t flat, std::span<double> state) const;
    std::vector<std::vector<double>> node_states() const;

    /// Nodal values of D^alpha V, physical derivatives (chain-rule scale applied).
    std::vector<double> evaluate(std::span<const double> coeffs, std::span<const int> alpha) const;

    /// Coefficients from nodal values by tensorized quadrature.
    std::vector<double> project(std::span<const double> nodal) const;

    CoefficientTensor project_tensor(std::span<const double> nodal, int time_index = 0) const;

private:
    DomainBox box_;
    std::vector<int> orders_;
    std::vector<QuadratureRule> rules_;
    std::size_t num_nodes_ = 1;
    std::size_t num_coeffs_ = 1;
    // tables_[j][deriv]: n_q_j × (M_j+1), entries g_m^{(deriv)}(y_i) * scale_j^deriv
    std::vector<std::array<std::vector<double>, 3>> tables_;
    // projectors_[j]: (M_j+1) × n_q_j, entries w_i g_m(y_i)
    std::vector<std::vector<double>> projectors_;
    std::vector<std::vector<double>> node_coords_;
};

}  // namespace deltahjb
