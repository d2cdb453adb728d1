#include "subdual/resolvent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "subdual/conv.hpp"
#include "subdual/util.hpp"

namespace subdual {

namespace {

std::vector<double> cell_integrals(const Kernel& l, const TimeGrid& grid) {
    std::vector<double> w(grid.N);
    for (int i = 0; i < grid.N; ++i)
        w[i] = l.antiderivative(grid.node(i + 1)) - l.antiderivative(grid.node(i));
    return w;
}

} // namespace

std::vector<double> solve_second_kind(const Kernel& l, double gamma,
                                      const std::vector<double>& rhs, const TimeGrid& grid) {
    if (!(gamma >= 0.0)) throw std::domain_error("solve_second_kind: gamma must be >= 0");
    if (static_cast<int>(rhs.size()) != grid.N)
        throw std::domain_error("solve_second_kind: rhs must be a cell series");
    const auto wl = cell_integrals(l, grid);
    std::vector<double> y(grid.N);
    const double diag = 1.0 + gamma * wl[0];
    for (int i = 0; i < grid.N; ++i) {
        double acc = rhs[i];
        for (int j = 0; j < i; ++j) acc -= gamma * wl[i - j] * y[j];
        y[i] = acc / diag;
    }
    return y;
}

std::vector<double> solve_relaxation(const Kernel& l, double gamma, const TimeGrid& grid) {
    if (!(gamma >= 0.0)) throw std::domain_error("solve_relaxation: gamma must be >= 0");
    auto s = solve_second_kind(l, gamma, std::vector<double>(grid.N, 1.0), grid);
    // 0 <= s <= 1 nonincreasing is a theorem for PC-kernels; a violation beyond
    // rounding means the quadrature broke down, so report instead of clipping
    for (int i = 0; i < grid.N; ++i) {
        if (s[i] < -1e-10 || s[i] > 1.0 + 1e-10)
            throw std::runtime_error("solve_relaxation: s out of [0,1] at cell " + std::to_string(i));
        if (i > 0 && s[i] > s[i - 1] + 1e-10)
            throw std::runtime_error("solve_relaxation: s increases at cell " + std::to_string(i));
    }
    return s;
}

std::vector<double> solve_resolvent(const Kernel& l, double gamma, const TimeGrid& grid) {
    if (!(gamma > 0.0)) throw std::domain_error("solve_resolvent: gamma must be > 0");
    const auto wl = cell_integrals(l, grid);
    std::vector<double> rhs(grid.N);
    for (int i = 0; i < grid.N; ++i) rhs[i] = gamma * wl[i] / grid.dt(); // cell averages of gamma*l
    auto h = solve_second_kind(l, gamma, rhs, grid);
    for (int i = 0; i < grid.N; ++i)
        if (h[i] < -1e-12)
            throw std::runtime_error("solve_resolvent: h negative at cell " + std::to_string(i));
    return h;
}

ResolventFamily resolvent_family(const Kernel& l, double gamma, const TimeGrid& grid) {
    if (!(gamma >= 0.0)) throw std::domain_error("resolvent_family: gamma must be >= 0");
    ResolventFamily fam;
    fam.gamma = gamma;
    fam.s = solve_relaxation(l, gamma, grid);
    const auto wl = cell_integrals(l, grid);
    std::vector<double> lbar(grid.N);
    for (int i = 0; i < grid.N; ++i) lbar[i] = wl[i] / grid.dt();
    // r and h from their own equations, not from each other: h = gamma*r is an
    // invariant to be checked, not an identity wired into the construction
    fam.r = solve_second_kind(l, gamma, lbar, grid);
    if (gamma > 0.0) {
        fam.h = solve_resolvent(l, gamma, grid);
    } else {
        fam.h.assign(grid.N, 0.0);
    }
    fam.k_reg.resize(grid.N);
    for (int i = 0; i < grid.N; ++i) fam.k_reg[i] = gamma * fam.s[i];
    return fam;
}

Kernel regularized_kernel(const KernelPair& pair, int n, const TimeGrid& grid) {
    if (n < 1) throw std::domain_error("regularized_kernel: n must be >= 1");
    auto s = solve_relaxation(pair.l, static_cast<double>(n), grid);
    for (double& v : s) v *= n;
    return Kernel::tabulated_cells(grid, std::move(s));
}

double approx_identity_error(const KernelPair& pair, const std::vector<double>& f, int n,
                             const TimeGrid& grid, double p) {
    if (!(p >= 1.0)) throw std::domain_error("approx_identity_error: p must be >= 1");
    if (static_cast<int>(f.size()) != grid.N)
        throw std::domain_error("approx_identity_error: f must be a cell series");
    const auto h = solve_resolvent(pair.l, static_cast<double>(n), grid);
    // h is a cell series; its exact cell integrals as convolution weights
    std::vector<double> wh(grid.N);
    for (int i = 0; i < grid.N; ++i) wh[i] = h[i] * grid.dt();
    const auto op = ConvOperator::from_weights(std::move(wh), grid, "resolvent");
    const auto hf = op.conv(f);
    double acc = 0.0;
    for (int i = 0; i < grid.N; ++i) acc += std::pow(std::abs(hf[i] - f[i]), p);
    return std::pow(grid.dt() * acc, 1.0 / p);
}

} // namespace subdual
