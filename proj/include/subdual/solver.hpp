#pragma once

#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "subdual/field.hpp"
#include "subdual/problem.hpp"

namespace subdual {

// L1-type history weights b_j = (1/dt) int_{t_j}^{t_{j+1}} k; positive and
// nonincreasing for every admissible kernel, which is what makes the implicit
// step an M-matrix and the scheme order-preserving.
std::vector<double> conv_weights(const KernelPair& pair, const TimeGrid& grid);

// Discrete -Laplacian (3-point / 5-point). Dirichlet rows see the boundary
// through the h^-2 diagonal; Neumann uses ghost-cell reflection (zero row sums);
// periodic wraps.
Eigen::SparseMatrix<double> neg_laplacian(const SpaceGrid& g);

enum class NonlinSolve {
    NewtonWithFallback, // damped Newton, fixed-point rescue before failing the step
    NewtonOnly,
    FixedPointOnly,     // frozen-coefficient iteration (power nonlinearity only)
};

struct SolveStats {
    long newton_iterations = 0;
    long picard_iterations = 0;
    int fallback_steps = 0;
    double max_step_residual = 0.0;
};

struct StepFailure : std::runtime_error {
    int step;
    double residual;
    StepFailure(int step_, double res, const std::string& what)
        : std::runtime_error(what), step(step_), residual(res) {}
};

// Implicit time stepping for d/dt(k*[u-u0]) - Lap(a Phi(u)) = f (the
// coefficient rides inside the Laplacian; constants survive only under
// spatially constant a).
// Each step solves b0 U + L(a Phi(U)) = f^n + b_{n-1} u0
// + sum_{j=1}^{n-1} (b_{n-j-1} - b_{n-j}) u^j to residual <= tol*(1+|rhs|).
Field solve(const ProblemSpec& spec, NonlinSolve method = NonlinSolve::NewtonWithFallback,
            SolveStats* stats = nullptr);

// Recomputes the discrete equation on a trajectory; rows 1..N hold per-node
// residuals (row 0 is zero). Defense in depth for solve's contract.
Field residual(const ProblemSpec& spec, const Field& u);

} // namespace subdual
