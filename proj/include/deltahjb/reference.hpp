#pragma once

#include "deltahjb/models.hpp"
#include "deltahjb/solver.hpp"
#include "deltahjb/tensor.hpp"

#include <vector>

namespace deltahjb::reference {

// Serial, unfactorized versions of the hot kernels. Slow by design; they exist so
// tests and benchmarks have an independent path to compare against.

/// Coefficients by a direct sum over every quadrature node for every coefficient.
std::vector<double> project_naive(const StateFunction& f, const DomainBox& box, const std::vector<int>& orders,
                                  int quad_nodes);

/// Explicit Gram matrix G (row m, column k), row-major, size C x C with C the coefficient count.
std::vector<double> assemble_gram(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                  const SolverConfig& cfg);

/// next + h G next with G from assemble_gram.
CoefficientTensor step_backward_gram(const ControlledGenerator& gen, const CoefficientTensor& next, double t_next,
                                     const SolverConfig& cfg);

}  // namespace deltahjb::reference
