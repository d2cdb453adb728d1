#pragma once

#include <Eigen/Dense>

#include <vector>

#include "subdual/field.hpp"
#include "subdual/problem.hpp"
#include "subdual/solver.hpp"

namespace subdual {

// Fourier multiplier |xi|^beta on a periodic box of length L with M modes;
// the periodic truncation of the full-space fractional Laplacian. Constants
// are annihilated (lambda_0 = 0) and the multiplier is even in xi, so real
// fields map to real fields.
class SpectralOperator {
public:
    static SpectralOperator fractional(double L, int M, double beta);

    double L() const { return L_; }
    int modes() const { return M_; }
    double beta() const { return beta_; }
    const std::vector<double>& multiplier() const { return lambda_; }

    // multiplier lambda^power applied through the transform; power = 0.5 is A^{1/2}
    std::vector<double> apply(const std::vector<double>& v, double power = 1.0) const;

    // dense symmetric circulant of the operator (impulse-response columns);
    // used for the Newton linear solves at desk scale
    Eigen::MatrixXd dense(double power = 1.0) const;

private:
    SpectralOperator() = default;
    double L_ = 1.0;
    int M_ = 2;
    double beta_ = 2.0;
    std::vector<double> lambda_;
};

// Same time scheme as the stencil solver with the elliptic part replaced by the
// multiplier operator; spec.sgrid must be periodic and 1D.
Field solve_nonlocal_pme(const ProblemSpec& spec, const SpectralOperator& opr,
                         SolveStats* stats = nullptr);

// int_0^T [k(T-t)+k(t)] ||(l T* A^{1/2} w)(t)||_{L2}^2 dt for a cell series w;
// the singular weight is integrated cellwise via antiderivatives.
double half_power_seminorm(const SpectralOperator& opr, const Field& w_cells,
                           const KernelPair& pair, const TimeGrid& grid);

} // namespace subdual
