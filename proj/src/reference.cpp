#include "deltahjb/reference.hpp"

#include <cmath>

namespace deltahjb::reference {

namespace {

struct NodeBasis {
    // values[j][o][i * (M_j+1) + m] = g_m^{(o)}(y_i) * scale_j^o
    std::vector<std::vector<std::vector<double>>> values;
};

NodeBasis tabulate(const DomainBox& box, const std::vector<int>& orders, const QuadratureRule& rule) {
    NodeBasis nb;
    const int d = box.dim();
    nb.values.resize(d);
    for (int j = 0; j < d; ++j) {
        const OrthoBasis basis(BasisFamily::Legendre, orders[j]);
        const int m1 = basis.size();
        nb.values[j].resize(3);
        std::vector<double> g(m1);
        for (int o = 0; o <= 2; ++o) {
            auto& t = nb.values[j][o];
            t.resize(static_cast<std::size_t>(rule.count()) * m1);
            for (int i = 0; i < rule.count(); ++i) {
                basis.eval_all(rule.nodes[i], o, g);
                for (int m = 0; m < m1; ++m) t[i * m1 + m] = g[m] * std::pow(box[j].scale(), o);
            }
        }
    }
    return nb;
}

void unflatten(std::size_t flat, const std::vector<int>& extents, std::vector<int>& idx) {
    for (int j = static_cast<int>(extents.size()) - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(flat % extents[j]);
        flat /= extents[j];
    }
}

}  // namespace

std::vector<double> project_naive(const StateFunction& f, const DomainBox& box, const std::vector<int>& orders,
                                  int quad_nodes) {
    const int d = box.dim();
    const auto rule = gauss_legendre(quad_nodes);
    const auto nb = tabulate(box, orders, rule);
    std::vector<int> qext(d, quad_nodes), cext(d);
    std::size_t nodes = 1, coeffs = 1;
    for (int j = 0; j < d; ++j) {
        cext[j] = orders[j] + 1;
        nodes *= quad_nodes;
        coeffs *= cext[j];
    }
    std::vector<double> fq(nodes), state(d);
    std::vector<int> qi(d), mi(d);
    for (std::size_t q = 0; q < nodes; ++q) {
        unflatten(q, qext, qi);
        for (int j = 0; j < d; ++j) state[j] = box[j].forward(rule.nodes[qi[j]]);
        fq[q] = f(state);
    }
    std::vector<double> out(coeffs, 0.0);
    for (std::size_t m = 0; m < coeffs; ++m) {
        unflatten(m, cext, mi);
        double s = 0.0;
        for (std::size_t q = 0; q < nodes; ++q) {
            unflatten(q, qext, qi);
            double w = fq[q];
            for (int j = 0; j < d; ++j) w *= rule.weights[qi[j]] * nb.values[j][0][qi[j] * cext[j] + mi[j]];
            s += w;
        }
        out[m] = s;
    }
    return out;
}

std::vector<double> assemble_gram(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                  const SolverConfig& cfg) {
    const int d = gen.dim;
    const auto rule = gauss_legendre(cfg.quad_nodes);
    const auto nb = tabulate(cfg.box, cfg.orders, rule);
    std::vector<int> qext(d, cfg.quad_nodes), cext(d);
    std::size_t nodes = 1, C = 1;
    for (int j = 0; j < d; ++j) {
        cext[j] = cfg.orders[j] + 1;
        nodes *= cfg.quad_nodes;
        C *= cext[j];
    }
    std::vector<double> G(C * C, 0.0);
    std::vector<double> state(d), coeffs(gen.terms.size()), bm(C), lk(C);
    std::vector<std::vector<double>> bk(gen.terms.size(), std::vector<double>(C));
    std::vector<int> qi(d), ki(d);
    for (std::size_t q = 0; q < nodes; ++q) {
        unflatten(q, qext, qi);
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            state[j] = cfg.box[j].forward(rule.nodes[qi[j]]);
            w *= rule.weights[qi[j]];
        }
        // Control at this node from the first-order condition against `next`.
        const Controls u = optimal_control(gen, next, t_next, state, cfg.denom_floor);
        // Basis products and their derivatives at the node, per term.
        for (std::size_t k = 0; k < C; ++k) {
            unflatten(k, cext, ki);
            double g = 1.0;
            for (int j = 0; j < d; ++j) g *= nb.values[j][0][qi[j] * cext[j] + ki[j]];
            bm[k] = g;
            for (std::size_t i = 0; i < gen.terms.size(); ++i) {
                double dg = 1.0;
                for (int j = 0; j < d; ++j) dg *= nb.values[j][gen.terms[i].deriv[j]][qi[j] * cext[j] + ki[j]];
                bk[i][k] = dg;
            }
        }
        for (std::size_t i = 0; i < gen.terms.size(); ++i) {
            double c = gen.terms[i].coeff(t_next, state);
            for (int a = 0; a < 2; ++a)
                for (int p = 0; p < gen.terms[i].control_powers[a]; ++p) c *= u[a];
            coeffs[i] = c;
        }
        for (std::size_t k = 0; k < C; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < gen.terms.size(); ++i) s += coeffs[i] * bk[i][k];
            lk[k] = s;
        }
        for (std::size_t m = 0; m < C; ++m) {
            const double wm = w * bm[m];
            double* row = G.data() + m * C;
            for (std::size_t k = 0; k < C; ++k) row[k] += wm * lk[k];
        }
    }
    return G;
}

CoefficientTensor step_backward_gram(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                     const SolverConfig& cfg) {
    const auto G = assemble_gram(gen, next, t_next, cfg);
    const auto v = next.values();
    const std::size_t C = v.size();
    std::vector<double> out(C);
    for (std::size_t m = 0; m < C; ++m) {
        double s = 0.0;
        for (std::size_t k = 0; k < C; ++k) s += G[m * C + k] * v[k];
        out[m] = v[m] + cfg.h() * s;
    }
    return CoefficientTensor(cfg.orders, cfg.box, std::move(out), next.time_index() - 1);
}

}  // namespace deltahjb::reference
