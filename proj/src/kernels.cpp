#include "deltahjb/kernels.hpp"

#include "deltahjb/errors.hpp"

#include <cmath>

namespace deltahjb {

void contract_axis(std::span<const double> in, std::span<const int> shape, int axis,
                   std::span<const double> A, int rows, std::span<double> out) {
    std::size_t outer = 1, inner = 1;
    for (int j = 0; j < axis; ++j) outer *= shape[j];
    for (std::size_t j = axis + 1; j < shape.size(); ++j) inner *= shape[j];
    const int n = shape[axis];
    const long long tasks = static_cast<long long>(outer) * rows;

#pragma omp parallel for schedule(static)
    for (long long task = 0; task < tasks; ++task) {
        const std::size_t o = static_cast<std::size_t>(task / rows);
        const int r = static_cast<int>(task % rows);
        double* dst = out.data() + (o * rows + r) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] = 0.0;
        const double* arow = A.data() + static_cast<std::size_t>(r) * n;
        for (int c = 0; c < n; ++c) {
            const double a = arow[c];
            if (a == 0.0) continue;
            const double* src = in.data() + (o * n + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) dst[i] += a * src[i];
        }
    }
}

SpectralGrid::SpectralGrid(DomainBox box, std::vector<int> orders, std::vector<QuadratureRule> rules)
    : box_(std::move(box)), orders_(std::move(orders)), rules_(std::move(rules)) {
    const int d = dim();
    if (d < 1 || box_.dim() != d || static_cast<int>(rules_.size()) != d)
        throw InputError("grid dimension mismatch between box, orders and quadrature rules");
    tables_.resize(d);
    projectors_.resize(d);
    node_coords_.resize(d);
    for (int j = 0; j < d; ++j) {
        const int m1 = orders_[j] + 1;
        const int nq = rules_[j].count();
        if (orders_[j] < 0) throw InputError("negative truncation order");
        num_nodes_ *= nq;
        num_coeffs_ *= m1;
        const OrthoBasis basis(BasisFamily::Legendre, orders_[j]);
        const double scale = box_[j].scale();
        std::vector<double> g(m1);
        for (int deriv = 0; deriv <= 2; ++deriv) {
            auto& table = tables_[j][deriv];
            table.assign(static_cast<std::size_t>(nq) * m1, 0.0);
            const double factor = std::pow(scale, deriv);
            for (int i = 0; i < nq; ++i) {
                basis.eval_all(rules_[j].nodes[i], deriv, g);
                for (int m = 0; m < m1; ++m) table[i * m1 + m] = g[m] * factor;
            }
        }
        auto& proj = projectors_[j];
        proj.assign(static_cast<std::size_t>(m1) * nq, 0.0);
        for (int i = 0; i < nq; ++i) {
            basis.eval_all(rules_[j].nodes[i], 0, g);
            for (int m = 0; m < m1; ++m) proj[m * nq + i] = rules_[j].weights[i] * g[m];
        }
        node_coords_[j].resize(nq);
        for (int i = 0; i < nq; ++i) node_coords_[j][i] = box_[j].forward(rules_[j].nodes[i]);
    }
}

void SpectralGrid::node_state(std::size_t flat, std::span<double> state) const {
    for (int j = dim() - 1; j >= 0; --j) {
        const std::size_t nq = node_coords_[j].size();
        state[j] = node_coords_[j][flat % nq];
        flat /= nq;
    }
}

std::vector<std::vector<double>> SpectralGrid::node_states() const {
    std::vector<std::vector<double>> states(num_nodes_, std::vector<double>(dim()));
    for (std::size_t q = 0; q < num_nodes_; ++q) node_state(q, states[q]);
    return states;
}

std::vector<double> SpectralGrid::evaluate(std::span<const double> coeffs,
                                           std::span<const int> alpha) const {
    const int d = dim();
    if (coeffs.size() != num_coeffs_) throw InputError("coefficient count does not match grid");
    if (static_cast<int>(alpha.size()) != d) throw InputError("derivative multi-index has wrong length");
    std::vector<int> shape(orders_.begin(), orders_.end());
    for (auto& s : shape) s += 1;
    std::vector<double> cur(coeffs.begin(), coeffs.end());
    std::vector<double> next;
    for (int j = 0; j < d; ++j) {
        if (alpha[j] < 0 || alpha[j] > 2) throw InputError("derivative order per dimension must be 0..2");
        const int rows = rules_[j].count();
        std::size_t out_size = cur.size() / shape[j] * rows;
        next.assign(out_size, 0.0);
        contract_axis(cur, shape, j, tables_[j][alpha[j]], rows, next);
        shape[j] = rows;
        cur.swap(next);
    }
    return cur;
}

std::vector<double> SpectralGrid::project(std::span<const double> nodal) const {
    const int d = dim();
    if (nodal.size() != num_nodes_) throw InputError("nodal value count does not match grid");
    std::vector<int> shape(d);
    for (int j = 0; j < d; ++j) shape[j] = rules_[j].count();
    std::vector<double> cur(nodal.begin(), nodal.end());
    std::vector<double> next;
    for (int j = 0; j < d; ++j) {
        const int rows = orders_[j] + 1;
        next.assign(cur.size() / shape[j] * rows, 0.0);
        contract_axis(cur, shape, j, projectors_[j], rows, next);
        shape[j] = rows;
        cur.swap(next);
    }
    return cur;
}

CoefficientTensor SpectralGrid::project_tensor(std::span<const double> nodal, int time_index) const {
    return CoefficientTensor(orders_, box_, project(nodal), time_index);
}

}  // namespace deltahjb
