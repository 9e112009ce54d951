#include "deltahjb/tensor.hpp"

#include "deltahjb/csv.hpp"
#include "deltahjb/errors.hpp"
#include "deltahjb/kernels.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace deltahjb {

DomainBox::DomainBox(std::vector<AffineMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw InputError("box needs at least one dimension");
}

DomainBox::DomainBox(std::initializer_list<std::pair<double, double>> intervals) {
    for (const auto& [lo, hi] : intervals) maps_.emplace_back(lo, hi);
    if (maps_.empty()) throw InputError("box needs at least one dimension");
}

void DomainBox::to_reference(std::span<const double> state, std::span<double> y) const {
    if (state.size() < maps_.size()) throw InputError("state has fewer coordinates than the box");
    for (std::size_t j = 0; j < maps_.size(); ++j) y[j] = maps_[j].inverse(state[j]);
}

bool DomainBox::clamp(std::span<double> state) const {
    bool moved = false;
    for (std::size_t j = 0; j < maps_.size(); ++j) {
        const double c = std::clamp(state[j], maps_[j].lo(), maps_[j].hi());
        if (c != state[j]) {
            state[j] = c;
            moved = true;
        }
    }
    return moved;
}

bool DomainBox::contains(std::span<const double> state, double tol) const {
    for (std::size_t j = 0; j < maps_.size(); ++j)
        if (state[j] < maps_[j].lo() - tol || state[j] > maps_[j].hi() + tol) return false;
    return true;
}

bool operator==(const DomainBox& a, const DomainBox& b) {
    if (a.maps_.size() != b.maps_.size()) return false;
    for (std::size_t j = 0; j < a.maps_.size(); ++j)
        if (a.maps_[j].lo() != b.maps_[j].lo() || a.maps_[j].hi() != b.maps_[j].hi()) return false;
    return true;
}

CoefficientTensor::CoefficientTensor(std::vector<int> orders, DomainBox box, std::vector<double> values,
                                     int time_index)
    : orders_(std::move(orders)), box_(std::move(box)), values_(std::move(values)), time_index_(time_index) {
    if (orders_.empty() || static_cast<int>(orders_.size()) != box_.dim())
        throw InputError("tensor orders and box dimension differ");
    std::size_t n = 1;
    for (int m : orders_) {
        if (m < 0) throw InputError("negative truncation order");
        n *= static_cast<std::size_t>(m + 1);
    }
    if (values_.empty()) values_.assign(n, 0.0);
    if (values_.size() != n) throw InputError("tensor value count does not match orders");
}

std::size_t CoefficientTensor::flat_index(std::span<const int> k) const {
    std::size_t flat = 0;
    for (std::size_t j = 0; j < orders_.size(); ++j) {
        if (k[j] < 0 || k[j] > orders_[j]) throw InputError("multi-index out of range");
        flat = flat * (orders_[j] + 1) + k[j];
    }
    return flat;
}

void CoefficientTensor::multi_index(std::size_t flat, std::span<int> k) const {
    for (int j = dim() - 1; j >= 0; --j) {
        const std::size_t m1 = orders_[j] + 1;
        k[j] = static_cast<int>(flat % m1);
        flat /= m1;
    }
}

bool CoefficientTensor::same_shape(const CoefficientTensor& other) const {
    return orders_ == other.orders_ && box_ == other.box_;
}

CoefficientTensor project(const StateFunction& f, const DomainBox& box, std::vector<int> orders,
                          const std::vector<QuadratureRule>& rules) {
    const SpectralGrid grid(box, std::move(orders), rules);
    const std::size_t nodes = grid.num_nodes();
    std::vector<double> nodal(nodes);
    long long bad = -1;
#pragma omp parallel
    {
        std::vector<double> state(grid.dim());
#pragma omp for schedule(static)
        for (long long q = 0; q < static_cast<long long>(nodes); ++q) {
            grid.node_state(q, state);
            nodal[q] = f(state);
        }
    }
    for (std::size_t q = 0; q < nodes; ++q) {
        if (!std::isfinite(nodal[q])) {
            bad = static_cast<long long>(q);
            break;
        }
    }
    if (bad >= 0) {
        std::vector<double> state(grid.dim());
        grid.node_state(bad, state);
        std::ostringstream msg;
        msg << "state function is not finite at quadrature node (";
        for (std::size_t j = 0; j < state.size(); ++j) msg << (j ? ", " : "") << state[j];
        msg << ")";
        throw ProjectionError(msg.str());
    }
    return grid.project_tensor(nodal);
}

CoefficientTensor project(const StateFunction& f, const DomainBox& box, std::vector<int> orders,
                          const QuadratureRule& rule) {
    return project(f, box, std::move(orders), std::vector<QuadratureRule>(box.dim(), rule));
}

double reconstruct(const CoefficientTensor& tensor, std::span<const double> state) {
    const int d = tensor.dim();
    std::vector<double> y(d);
    tensor.box().to_reference(state, y);
    // Contract the last axis first: partial[outer] = sum_k V[outer, k] g_k(y_last).
    std::vector<double> cur(tensor.values().begin(), tensor.values().end());
    for (int j = d - 1; j >= 0; --j) {
        const int m1 = tensor.orders()[j] + 1;
        std::vector<double> g(m1);
        OrthoBasis(BasisFamily::Legendre, m1 - 1).eval_all(y[j], 0, g);
        const std::size_t outer = cur.size() / m1;
        for (std::size_t o = 0; o < outer; ++o) {
            double s = 0.0;
            for (int k = 0; k < m1; ++k) s += cur[o * m1 + k] * g[k];
            cur[o] = s;
        }
        cur.resize(outer);
    }
    return cur[0];
}

CoefficientTensor tensor_linear_combine(double a, const CoefficientTensor& t1, double b,
                                        const CoefficientTensor& t2) {
    if (!t1.same_shape(t2)) throw InputError("tensor shapes differ");
    std::vector<double> out(t1.size());
    auto v1 = t1.values();
    auto v2 = t2.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * v1[i] + b * v2[i];
    return CoefficientTensor(t1.orders(), t1.box(), std::move(out), t1.time_index());
}

void write_tensor_csv(std::ostream& os, const CoefficientTensor& tensor) {
    os << "dim,orders,box\n";
    os << tensor.dim() << ',';
    for (int j = 0; j < tensor.dim(); ++j) os << (j ? " " : "") << tensor.orders()[j];
    os << ',';
    for (int j = 0; j < tensor.dim(); ++j)
        os << (j ? " " : "") << csv::num(tensor.box()[j].lo()) << ' ' << csv::num(tensor.box()[j].hi());
    os << '\n';
    std::vector<int> k(tensor.dim());
    for (std::size_t i = 0; i < tensor.size(); ++i) {
        tensor.multi_index(i, k);
        for (int j = 0; j < tensor.dim(); ++j) os << k[j] << ',';
        os << csv::num(tensor.values()[i]) << '\n';
    }
}

CoefficientTensor read_tensor_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "dim,orders,box") throw InputError("missing tensor CSV header");
    if (!std::getline(is, line)) throw InputError("missing tensor CSV shape row");
    const auto fields = csv::split(line);
    if (fields.size() != 3) throw InputError("malformed tensor CSV shape row");
    const int d = std::stoi(fields[0]);
    std::vector<int> orders;
    {
        std::istringstream s(fields[1]);
        int m;
        while (s >> m) orders.push_back(m);
    }
    std::vector<AffineMap> maps;
    {
        std::istringstream s(fields[2]);
        double lo, hi;
        while (s >> lo >> hi) maps.emplace_back(lo, hi);
    }
    if (static_cast<int>(orders.size()) != d || static_cast<int>(maps.size()) != d)
        throw InputError("tensor CSV shape row disagrees with dim");
    CoefficientTensor tensor(orders, DomainBox(std::move(maps)));
    std::vector<int> k(d);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = csv::split(line);
        if (static_cast<int>(cells.size()) != d + 1) throw InputError("malformed tensor CSV row");
        for (int j = 0; j < d; ++j) k[j] = std::stoi(cells[j]);
        tensor.at(k) = std::stod(cells[d]);
        ++rows;
    }
    if (rows != tensor.size()) throw InputError("tensor CSV has wrong number of rows");
    return tensor;
}

}  // namespace deltahjb
