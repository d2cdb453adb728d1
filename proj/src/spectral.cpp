#include "subdual/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "subdual/conv.hpp"
#include "subdual/util.hpp"

namespace subdual {

namespace {

// FFTW plan creation is not thread-safe; execution of distinct plans is
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

SpectralOperator SpectralOperator::fractional(double L, int M, double beta) {
    if (!(L > 0.0)) throw std::domain_error("SpectralOperator: L must be positive");
    if (M < 2) throw std::domain_error("SpectralOperator: M must be >= 2");
    if (!(beta > 0.0 && beta <= 2.0))
        throw std::domain_error("SpectralOperator: beta must be in (0,2]");
    SpectralOperator op;
    op.L_ = L;
    op.M_ = M;
    op.beta_ = beta;
    op.lambda_.resize(M);
    for (int j = 0; j < M; ++j) {
        const int kj = j <= M / 2 ? j : j - M;
        const double xi = 2.0 * M_PI * kj / L;
        op.lambda_[j] = j == 0 ? 0.0 : std::pow(std::abs(xi), beta);
    }
    return op;
}

std::vector<double> SpectralOperator::apply(const std::vector<double>& v, double power) const {
    if (static_cast<int>(v.size()) != M_)
        throw std::domain_error("SpectralOperator::apply: mode mismatch");
    const int nb = M_ / 2 + 1;
    std::vector<double> in(v);
    std::vector<fftw_complex> spec(nb);
    std::vector<double> out(M_);

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fwd = fftw_plan_dft_r2c_1d(M_, in.data(), spec.data(), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(M_, spec.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (int j = 0; j < nb; ++j) {
        const double lam = lambda_[j]; // bins 0..M/2 carry |xi_j|^beta directly
        const double f = lam == 0.0 ? 0.0 : std::pow(lam, power);
        spec[j][0] *= f / M_;
        spec[j][1] *= f / M_;
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    return out;
}

Eigen::MatrixXd SpectralOperator::dense(double power) const {
    Eigen::MatrixXd A(M_, M_);
    std::vector<double> e(M_, 0.0);
    for (int j = 0; j < M_; ++j) {
        e[j] = 1.0;
        const auto col = apply(e, power);
        for (int i = 0; i < M_; ++i) A(i, j) = col[i];
        e[j] = 0.0;
    }
    // impulse responses of a real even multiplier form a symmetric circulant;
    // symmetrize away the rounding skew so Newton sees an exactly symmetric matrix
    A = 0.5 * (A + A.transpose()).eval();
    return A;
}

namespace {

using Vec = Eigen::VectorXd;

Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec dense_residual(const Eigen::MatrixXd& A, double b0, const Vec& a, const Phi& phi,
                   const Vec& U, const Vec& rhs) {
    Vec w(U.size());
    for (Eigen::Index i = 0; i < U.size(); ++i) w[i] = a[i] * phi(U[i]);
    return b0 * U + A * w - rhs;
}

void project(Vec& U, bool nonneg) {
    if (!nonneg) return;
    for (Eigen::Index i = 0; i < U.size(); ++i) U[i] = std::max(U[i], 0.0);
}

} // namespace

Field solve_nonlocal_pme(const ProblemSpec& spec, const SpectralOperator& opr,
                         SolveStats* stats) {
    spec.validate();
    if (spec.sgrid.bc != BC::Periodic || spec.sgrid.dim != 1)
        throw std::domain_error("solve_nonlocal_pme: periodic 1D grid required");
    if (spec.sgrid.M != opr.modes() || spec.sgrid.L != opr.L())
        throw std::domain_error("solve_nonlocal_pme: grid/operator mismatch");

    const int N = spec.tgrid.N;
    const int M = spec.sgrid.M;
    const auto b = conv_weights(spec.pair, spec.tgrid);
    const Eigen::MatrixXd A = opr.dense(1.0);

    Field u(N, M, spec.nonneg);
    const auto u0 = spec.u0_values();
    for (int j = 0; j < M; ++j) u.at(0, j) = u0[j];

    SolveStats local;
    const Vec u0v = to_vec(u0);
    Vec U = u0v;
    for (int n = 1; n <= N; ++n) {
        const double tn = spec.tgrid.node(n);
        Vec rhs = to_vec(spec.f_values(tn)) + b[n - 1] * u0v;
        for (int j = 1; j < n; ++j)
            rhs += (b[n - j - 1] - b[n - j]) * Eigen::Map<const Vec>(u.row(j), M);
        const Vec a = to_vec(spec.a_values(tn));
        const double target = spec.tol.newton * (1.0 + rhs.norm());

        project(U, spec.nonneg);
        Vec F = dense_residual(A, b[0], a, spec.phi, U, rhs);
        double fn = F.norm();
        bool ok = false;
        for (int it = 0; it < spec.tol.max_newton; ++it) {
            if (fn <= target) {
                ok = true;
                break;
            }
            Eigen::MatrixXd J = A;
            for (int j = 0; j < M; ++j) J.col(j) *= a[j] * spec.phi.deriv(U[j]);
            J.diagonal().array() += b[0];
            const Vec delta = J.partialPivLu().solve(-F);
            ++local.newton_iterations;

            double lambda = 1.0;
            bool accepted = false;
            for (int bt = 0; bt <= spec.tol.max_backtrack; ++bt) {
                Vec cand = U + lambda * delta;
                project(cand, spec.nonneg);
                Vec Fc = dense_residual(A, b[0], a, spec.phi, cand, rhs);
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
            if (!accepted) break;
        }
        ok = ok || fn <= target;
        if (!ok)
            throw StepFailure(n, fn,
                              "solve_nonlocal_pme: step " + std::to_string(n) +
                                  " failed (residual " + fmt17(fn) + ")");
        local.max_step_residual = std::max(local.max_step_residual, fn / (1.0 + rhs.norm()));
        for (int j = 0; j < M; ++j) u.at(n, j) = U[j];
    }
    u.check_invariants();
    if (stats) *stats = local;
    return u;
}

double half_power_seminorm(const SpectralOperator& opr, const Field& w_cells,
                           const KernelPair& pair, const TimeGrid& grid) {
    const int N = grid.N;
    const int M = opr.modes();
    if (w_cells.N != N || w_cells.M != M)
        throw std::domain_error("half_power_seminorm: field shape mismatch");

    // G(cell i) = A^{1/2} w(cell i), then the dual convolution with l per column
    std::vector<std::vector<double>> G(N);
    for (int i = 0; i < N; ++i) G[i] = opr.apply(w_cells.row_vec(i + 1), 0.5);

    const auto lop = ConvOperator::from_kernel(pair.l, grid);
    std::vector<double> col(N), dcol;
    std::vector<double> acc(N, 0.0); // ||(l T* G)(cell i)||^2 accumulated over x
    const double hx = opr.L() / M;
    for (int x = 0; x < M; ++x) {
        for (int i = 0; i < N; ++i) col[i] = G[i][x];
        dcol = lop.dual(col);
        for (int i = 0; i < N; ++i) acc[i] += hx * dcol[i] * dcol[i];
    }

    // cell integrals of k(T-t) + k(t) via antiderivative differences
    const auto& K = pair.k;
    double out = 0.0;
    for (int i = 0; i < N; ++i) {
        const double wkt = K.antiderivative(grid.node(i + 1)) - K.antiderivative(grid.node(i));
        const double wkT = K.antiderivative(grid.T - grid.node(i)) -
                           K.antiderivative(grid.T - grid.node(i + 1));
        out += (wkt + wkT) * acc[i];
    }
    return out;
}

} // namespace subdual
