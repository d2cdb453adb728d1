#pragma once

#include <stdexcept>
#include <string>

namespace subdual {

// Uniform grid on (0,T). Unknowns of time-stepped quantities live on cells
// (t_i, t_{i+1}), i = 0..N-1; causal convolutions are evaluated at right cell
// endpoints, dual convolutions at left ones.
struct TimeGrid {
    double T = 1.0;
    int N = 1;

    TimeGrid() = default;
    TimeGrid(double T_, int N_) : T(T_), N(N_) {
        if (!(T > 0.0)) throw std::domain_error("TimeGrid: T must be positive");
        if (N < 1) throw std::domain_error("TimeGrid: N must be >= 1");
    }

    double dt() const { return T / N; }
    double node(int i) const { return T * i / N; }      // t_i, i = 0..N
    double right(int i) const { return node(i + 1); }   // right endpoint of cell i
    double mid(int i) const { return T * (2 * i + 1) / (2.0 * N); }
};

enum class BC { Dirichlet, Neumann, Periodic };

inline std::string bc_name(BC bc) {
    switch (bc) {
        case BC::Dirichlet: return "dirichlet";
        case BC::Neumann: return "neumann";
        case BC::Periodic: return "periodic";
    }
    return "?";
}

// Interval (dim 1) or box (dim 2), extent L per axis, M unknowns per axis.
// Dirichlet unknowns sit at interior nodes with spacing L/(M+1); Neumann and
// periodic unknowns are cell-centered / nodal with spacing L/M.
struct SpaceGrid {
    int dim = 1;
    double L = 1.0;
    int M = 2;
    BC bc = BC::Dirichlet;

    SpaceGrid() = default;
    SpaceGrid(int dim_, double L_, int M_, BC bc_) : dim(dim_), L(L_), M(M_), bc(bc_) {
        if (dim != 1 && dim != 2) throw std::domain_error("SpaceGrid: dim must be 1 or 2");
        if (!(L > 0.0)) throw std::domain_error("SpaceGrid: L must be positive");
        if (M < 2) throw std::domain_error("SpaceGrid: M must be >= 2");
    }

    double h() const { return bc == BC::Dirichlet ? L / (M + 1) : L / M; }
    int npoints() const { return dim == 1 ? M : M * M; }

    // coordinate of axis-index i
    double coord(int i) const {
        switch (bc) {
            case BC::Dirichlet: return (i + 1) * h();
            case BC::Neumann: return (i + 0.5) * h();
            case BC::Periodic: return i * h();
        }
        return 0.0;
    }

    double x_of(int j) const { return coord(dim == 1 ? j : j % M); }
    double y_of(int j) const { return dim == 1 ? 0.0 : coord(j / M); }
};

} // namespace subdual
