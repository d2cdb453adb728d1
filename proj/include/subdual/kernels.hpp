#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subdual/grids.hpp"

namespace subdual {

// g_beta(t) = t^{beta-1}/Gamma(beta). Diverges at 0+ for beta < 1; never call at t = 0.
double eval_standard(double beta, double t);

// Memory kernel: nonnegative, nonincreasing, locally integrable, singular at 0
// for every interesting variant. All quadrature goes through antiderivative()
// over cells; point evaluation at 0 is a domain error by design.
class Kernel {
public:
    enum class Tag { Standard, MultiTerm, ExpShifted, Tabulated };

    Kernel() = default; // g_{0.5}; use the factories for anything else

    Tag tag() const { return tag_; }
    bool completely_monotone() const { return completely_monotone_; }
    bool bounded_at_zero() const;

    double eval(double t) const;           // t > 0 (t >= 0 for tabulated)
    double antiderivative(double t) const; // int_0^t k, exact for parametric variants
    double derivative(double t) const;     // analytic k'(t); tabulated variants reject

    // g_beta; beta in (0,1] (beta = 1 is the constant kernel used in classical cross-checks)
    static Kernel standard(double beta);
    // sum_j w_j * g_{1-alpha_j}, w_j > 0, alpha_j in (0,1)
    static Kernel multi_term(std::vector<std::pair<double, double>> terms);
    // e^{-mu t} t^{-alpha} / Gamma(1-alpha); mu = 0 reduces to g_{1-alpha}
    static Kernel exp_shifted(double alpha, double mu);
    // piecewise-constant cell values on a uniform grid (nodes, N+1 antiderivative
    // samples, N cell values); the representation companion/resolvent solves produce
    static Kernel tabulated_cells(const TimeGrid& grid, std::vector<double> cell_values);
    // point samples (t_i, k_i), piecewise-linear eval, trapezoidal antiderivative
    static Kernel tabulated_samples(std::vector<double> t, std::vector<double> v);

    Kernel scaled(double c) const; // c*k

    // parametric kernels as power sums (w_j, beta_j) meaning sum w_j g_{beta_j};
    // used to build exact convolved-kernel operators. Empty for non-parametric.
    std::vector<std::pair<double, double>> power_terms() const;

    // tabulated accessors (cell representation)
    const std::vector<double>& tab_nodes() const { return tab_t_; }
    const std::vector<double>& tab_antiderivative() const { return tab_A_; }

private:
    Tag tag_ = Tag::Standard;
    bool completely_monotone_ = true;
    double amp_ = 1.0;                                // scale factor, all variants
    double beta_ = 0.5;                               // Standard
    std::vector<std::pair<double, double>> terms_;    // MultiTerm (w, alpha)
    double alpha_ = 0.5, mu_ = 0.0;                   // ExpShifted
    std::vector<double> tab_t_, tab_v_, tab_A_;       // Tabulated
    bool tab_cellwise_ = false;
};

// Pair (k,l) with k*l = 1 on (0,T). For the standard family the identity is
// analytic; numerically built companions carry it at the discrete level.
struct KernelPair {
    Kernel k;
    Kernel l;
    double eps_pair = 1e-8;
};

// (g_{1-alpha}, g_alpha), alpha in (0,1)
KernelPair standard_pair(double alpha);

// Discrete companion: cell values lambda solving sum_{j<=i} w_{i-j} lambda_j = 1
// for the cell-integral weights w of k (forward substitution; exact residual).
// A bounded kernel has a delta-type companion that the cell representation
// cannot express; `warning` is set and the triangular solve proceeds anyway.
Kernel companion_kernel(const Kernel& k, const TimeGrid& grid, std::string* warning = nullptr);

} // namespace subdual
