#pragma once

#include <vector>

#include "subdual/grids.hpp"
#include "subdual/kernels.hpp"

namespace subdual {

// Scalar Volterra machinery: relaxation s_g solving s + g(l*s) = 1, resolvent
// h_g solving h + g(h*l) = g l, and the regularized kernels k_n = g s_g = k*h_n.
// All solves are product integration with piecewise-constant cell unknowns and
// exact cell integrals of l, resolved by forward substitution.
struct ResolventFamily {
    double gamma = 0.0;
    std::vector<double> s;     // cell values, s_i ~ s(t_{i+1})
    std::vector<double> r;
    std::vector<double> h;
    std::vector<double> k_reg; // gamma * s
};

// y + gamma * (l*y) = rhs for cell series rhs
std::vector<double> solve_second_kind(const Kernel& l, double gamma,
                                      const std::vector<double>& rhs, const TimeGrid& grid);

// s_gamma; gamma >= 0. Monotonicity violations beyond 1e-10 indicate quadrature
// failure and abort with a diagnostic instead of being clipped.
std::vector<double> solve_relaxation(const Kernel& l, double gamma, const TimeGrid& grid);

// h_gamma; gamma > 0
std::vector<double> solve_resolvent(const Kernel& l, double gamma, const TimeGrid& grid);

ResolventFamily resolvent_family(const Kernel& l, double gamma, const TimeGrid& grid);

// k_n = n * s_n as a cell-tabulated kernel (nonnegative, nonincreasing, bounded)
Kernel regularized_kernel(const KernelPair& pair, int n, const TimeGrid& grid);

// discrete L_p distance ||h_n*f - f||_p for cell series f
double approx_identity_error(const KernelPair& pair, const std::vector<double>& f, int n,
                             const TimeGrid& grid, double p);

} // namespace subdual
