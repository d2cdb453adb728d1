#include "subdual/solver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

#include "subdual/util.hpp"

namespace subdual {

std::vector<double> conv_weights(const KernelPair& pair, const TimeGrid& grid) {
    std::vector<double> b(grid.N);
    for (int j = 0; j < grid.N; ++j)
        b[j] = (pair.k.antiderivative(grid.node(j + 1)) - pair.k.antiderivative(grid.node(j))) /
               grid.dt();
    return b;
}

namespace {

void add_axis_stencil(std::vector<Eigen::Triplet<double>>& trip, const SpaceGrid& g, int stride,
                      int other_count, int other_stride) {
    const double c = 1.0 / (g.h() * g.h());
    for (int o = 0; o < other_count; ++o) {
        const int base = o * other_stride;
        for (int i = 0; i < g.M; ++i) {
            const int row = base + i * stride;
            switch (g.bc) {
                case BC::Dirichlet:
                    trip.emplace_back(row, row, 2.0 * c);
                    if (i > 0) trip.emplace_back(row, row - stride, -c);
                    if (i < g.M - 1) trip.emplace_back(row, row + stride, -c);
                    break;
                case BC::Neumann:
                    // ghost-cell reflection: boundary rows see one neighbour, zero row sum
                    trip.emplace_back(row, row, ((i > 0) + (i < g.M - 1)) * c);
                    if (i > 0) trip.emplace_back(row, row - stride, -c);
                    if (i < g.M - 1) trip.emplace_back(row, row + stride, -c);
                    break;
                case BC::Periodic:
                    trip.emplace_back(row, row, 2.0 * c);
                    trip.emplace_back(row, base + ((i + 1) % g.M) * stride, -c);
                    trip.emplace_back(row, base + ((i + g.M - 1) % g.M) * stride, -c);
                    break;
            }
        }
    }
}

} // namespace

Eigen::SparseMatrix<double> neg_laplacian(const SpaceGrid& g) {
    const int n = g.npoints();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5) * n);
    if (g.dim == 1) {
        add_axis_stencil(trip, g, 1, 1, 0);
    } else {
        add_axis_stencil(trip, g, 1, g.M, g.M);   // x sweeps within each row
        add_axis_stencil(trip, g, g.M, g.M, 1);   // y sweeps within each column
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

namespace {

using Vec = Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double>;

Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// residual of one implicit step: F(U) = b0 U + A (a .* Phi(U)) - rhs
Vec step_residual(const Sparse& A, double b0, const Vec& a, const Phi& phi, const Vec& U,
                  const Vec& rhs) {
    Vec w(U.size());
    for (Eigen::Index i = 0; i < U.size(); ++i) w[i] = a[i] * phi(U[i]);
    return b0 * U + A * w - rhs;
}

// J = b0 I + A diag(a .* Phi'(U)); A's diagonal is structurally nonzero
Sparse step_jacobian(const Sparse& A, double b0, const Vec& a, const Phi& phi, const Vec& U) {
    Sparse J = A;
    for (int j = 0; j < J.outerSize(); ++j) {
        const double d = a[j] * phi.deriv(U[j]);
        for (Sparse::InnerIterator it(J, j); it; ++it) it.valueRef() *= d;
    }
    for (int j = 0; j < J.outerSize(); ++j) J.coeffRef(j, j) += b0;
    return J;
}

void project(Vec& U, bool nonneg) {
    if (!nonneg) return;
    // clip at 0 exactly: the b0 diagonal keeps the Jacobian regular there,
    // and any positive floor would contaminate identically-zero solutions
    for (Eigen::Index i = 0; i < U.size(); ++i) U[i] = std::max(U[i], 0.0);
}

struct StepContext {
    const Sparse& A;
    double b0;
    Vec a;
    const Phi& phi;
    Vec rhs;
    bool nonneg;
    const Tolerances& tol;
};

bool newton_step(const StepContext& c, Vec& U, SolveStats& stats, double& final_resid) {
    Eigen::SparseLU<Sparse> lu;
    const double target = c.tol.newton * (1.0 + c.rhs.norm());
    project(U, c.nonneg);
    Vec F = step_residual(c.A, c.b0, c.a, c.phi, U, c.rhs);
    double fn = F.norm();
    bool analyzed = false;
    for (int it = 0; it < c.tol.max_newton; ++it) {
        if (fn <= target) {
            final_resid = fn;
            return true;
        }
        const Sparse J = step_jacobian(c.A, c.b0, c.a, c.phi, U);
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) return false;
        const Vec delta = lu.solve(-F);
        ++stats.newton_iterations;

        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= c.tol.max_backtrack; ++bt) {
            Vec cand = U + lambda * delta;
            project(cand, c.nonneg);
            Vec Fc = step_residual(c.A, c.b0, c.a, c.phi, cand, c.rhs);
            const double fc = Fc.norm();
            if (fc <= (1.0 - 1e-4 * lambda) * fn || fc <= target) {
                U = std::move(cand);
                F = std::move(Fc);
                fn = fc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            final_resid = fn;
            return false;
        }
    }
    final_resid = fn;
    return fn <= target;
}

// frozen-coefficient iteration: solve (b0 I + A diag(a |U|^{m-1})) U' = rhs.
// Plain linear convergence; deliberately unaccelerated so it is a genuinely
// different path from Newton for the uniqueness diagnostic.
bool picard_step(const StepContext& c, Vec& U, SolveStats& stats, double& final_resid) {
    if (c.phi.kind() != Phi::Kind::Power)
        throw std::domain_error("solve: fixed-point path requires a power nonlinearity");
    const double m = c.phi.exponent();
    const double target = c.tol.newton * (1.0 + c.rhs.norm());
    Eigen::SparseLU<Sparse> lu;
    bool analyzed = false;
    project(U, c.nonneg);
    final_resid = step_residual(c.A, c.b0, c.a, c.phi, U, c.rhs).norm();
    for (int it = 0; it < c.tol.max_picard; ++it) {
        if (final_resid <= target) return true;
        Sparse J = c.A;
        for (int j = 0; j < J.outerSize(); ++j) {
            const double d = c.a[j] * (m == 1.0 ? 1.0 : std::pow(std::abs(U[j]), m - 1.0));
            for (Sparse::InnerIterator inner(J, j); inner; ++inner) inner.valueRef() *= d;
        }
        for (int j = 0; j < J.outerSize(); ++j) J.coeffRef(j, j) += c.b0;
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) return false;
        U = lu.solve(c.rhs);
        project(U, c.nonneg);
        ++stats.picard_iterations;
        final_resid = step_residual(c.A, c.b0, c.a, c.phi, U, c.rhs).norm();
    }
    return final_resid <= target;
}

} // namespace

Field solve(const ProblemSpec& spec, NonlinSolve method, SolveStats* stats) {
    spec.validate();
    const int N = spec.tgrid.N;
    const int M = spec.sgrid.npoints();
    const auto b = conv_weights(spec.pair, spec.tgrid);
    const Sparse A = neg_laplacian(spec.sgrid);

    Field u(N, M, spec.nonneg);
    const auto u0 = spec.u0_values();
    for (int j = 0; j < M; ++j) u.at(0, j) = u0[j];

    SolveStats local;
    const Vec u0v = to_vec(u0);
    Vec U = u0v;
    for (int n = 1; n <= N; ++n) {
        const double tn = spec.tgrid.node(n);
        Vec rhs = to_vec(spec.f_values(tn)) + b[n - 1] * u0v;
        for (int j = 1; j < n; ++j) {
            const double c = b[n - j - 1] - b[n - j];
            rhs += c * Eigen::Map<const Vec>(u.row(j), M);
        }
        StepContext ctx{A, b[0], to_vec(spec.a_values(tn)), spec.phi, std::move(rhs),
                        spec.nonneg, spec.tol};

        double resid = 0.0;
        bool ok = false;
        switch (method) {
            case NonlinSolve::NewtonOnly:
                ok = newton_step(ctx, U, local, resid);
                break;
            case NonlinSolve::FixedPointOnly:
                ok = picard_step(ctx, U, local, resid);
                break;
            case NonlinSolve::NewtonWithFallback:
                ok = newton_step(ctx, U, local, resid);
                if (!ok && spec.phi.kind() == Phi::Kind::Power) {
                    ++local.fallback_steps;
                    U = n == 1 ? u0v : Eigen::Map<const Vec>(u.row(n - 1), M);
                    ok = picard_step(ctx, U, local, resid);
                }
                break;
        }
        if (!ok)
            throw StepFailure(n, resid,
                              "solve: step " + std::to_string(n) + " failed (residual " +
                                  fmt17(resid) + ")");
        local.max_step_residual =
            std::max(local.max_step_residual, resid / (1.0 + ctx.rhs.norm()));
        for (int j = 0; j < M; ++j) u.at(n, j) = U[j];
    }
    u.check_invariants();
    if (stats) *stats = local;
    return u;
}

Field residual(const ProblemSpec& spec, const Field& u) {
    if (u.N != spec.tgrid.N || u.M != spec.sgrid.npoints())
        throw std::domain_error("residual: field shape mismatch");
    const int N = u.N, M = u.M;
    const auto b = conv_weights(spec.pair, spec.tgrid);
    const Sparse A = neg_laplacian(spec.sgrid);
    const Vec u0v = Eigen::Map<const Vec>(u.row(0), M);

    Field res(N, M, false);
    for (int n = 1; n <= N; ++n) {
        const double tn = spec.tgrid.node(n);
        Vec rhs = to_vec(spec.f_values(tn)) + b[n - 1] * u0v;
        for (int j = 1; j < n; ++j)
            rhs += (b[n - j - 1] - b[n - j]) * Eigen::Map<const Vec>(u.row(j), M);
        const Vec F = step_residual(A, b[0], to_vec(spec.a_values(tn)), spec.phi,
                                    Eigen::Map<const Vec>(u.row(n), M), rhs);
        for (int j = 0; j < M; ++j) res.at(n, j) = F[j];
    }
    return res;
}

} // namespace subdual
