#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subdual/field.hpp"
#include "subdual/problem.hpp"
#include "subdual/reaction.hpp"
#include "subdual/spectral.hpp"

namespace subdual {

// Both sides of one a-priori inequality assembled from discrete solution data.
// Terms prefixed "lhs." / "rhs." sum to the respective side exactly; margin is
// rhs - lhs and the report passes iff margin >= -tol. A margin below -tol on a
// refined grid means the scheme is inconsistent, not that the inequality fails.
struct EstimateReport {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tol = 0.0;
    bool passed = true;
    std::vector<std::pair<std::string, double>> breakdown;
    std::vector<std::pair<std::string, std::string>> metadata;

    static EstimateReport make(std::string id,
                               std::vector<std::pair<std::string, double>> lhs_terms,
                               std::vector<std::pair<std::string, double>> rhs_terms,
                               double tol_override = 0.0);

    void add_meta(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }
    std::string to_json() const;
};

inline double estimate_tolerance(double lhs, double rhs) {
    return 1e-9 * std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

// int int w u + (1/2) int int [k(T-t)+k(t)] |l T* grad w|^2 <= int int (u0 + l*f) w
EstimateReport verify_basic(const Field& u, const Field& w, const std::vector<double>& u0,
                            const Field& f, const KernelPair& pair, const TimeGrid& tgrid,
                            const SpaceGrid& sgrid);

// variant with elliptic term int int (l * grad w) . grad w; an equality for
// exact solutions, so it is assembled with the discrete companion of k — that
// realization makes the discrete margin rounding-level instead of O(dt^{1-alpha})
EstimateReport verify_basic_alt(const Field& u, const Field& w, const std::vector<double>& u0,
                                const Field& f, const KernelPair& pair, const TimeGrid& tgrid,
                                const SpaceGrid& sgrid);

// adds (1/2) int int int s^{-1}[k(s)-k(2s)] |G(t)-G(t-s)|^2 on the left;
// completely monotone kernels only
EstimateReport verify_triple(const Field& u, const Field& w, const std::vector<double>& u0,
                             const Field& f, const KernelPair& pair, const TimeGrid& tgrid,
                             const SpaceGrid& sgrid);

// int v (g_alpha * v) >= cos(alpha pi/2) int |g_{alpha/2} * v|^2 for cell series v
EstimateReport verify_galpha(const std::vector<double>& v, double alpha, const TimeGrid& grid);

// int int u^{m+1} + (1/a1) int int [k(T-t)+k(t)] |l T* grad(a u^m)|^2
//   <= C(m) (a2/a1)^{m+1} (T ||u0||^{m+1} + ||l||_1^{m+1} ||f||^{m+1}),
// C(m) = 2(4m)^m/(m+1)^{m+1}
EstimateReport verify_pme(const Field& u, const ProblemSpec& spec);
double pme_constant(double m); // C(m) = 2(4m)^m/(m+1)^{m+1}

// triple-term weight constant for the standard kernel: (k(s)-k(2s))/s = c(alpha) s^{-alpha-1}
double c_alpha(double alpha);

// entropy bound for a strictly positive reaction run (m=1, nu_f=nu_b): the
// summed entropy z satisfies the scalar inequality with coefficient d_eff, so
// the L2 duality bound applies with (d_min, d_max); the species-wise constant
// 4 (d_max/d_min) sqrt(2T) lands in metadata
EstimateReport verify_entropy(const ReactionRun& run);

// periodic spectral run: inner-product inequality int(w,u) <= int(w, u0 + l*f)
// plus the Hoelder-processed bound
// a1 int int |u|^{m+1} <= ||w||_2 (sqrt(T)||u0||_2 + ||l||_1 ||f||_2)
EstimateReport verify_spectral(const Field& u, const ProblemSpec& spec,
                               const SpectralOperator& opr);

// data-derived helpers shared by verifiers and the CLI
Field derive_w(const ProblemSpec& spec, const Field& u);
Field derive_f_cells(const ProblemSpec& spec);

struct UniquenessResult {
    double gap = 0.0;     // max nodal |u_newton - u_fixed_point|
    double pairing = 0.0; // int int a (Phi(u1)-Phi(u2))(u1-u2)
    EstimateReport report;
};

// same problem through two genuinely different nonlinear-solver paths
UniquenessResult uniqueness_gap(const ProblemSpec& spec);

// int int (Phi(x)-Phi(y))(x-y) over cells; >= 0 pointwise by monotonicity
double monotone_pairing(const Field& u1, const Field& u2, const Phi& phi, const TimeGrid& tgrid,
                        const SpaceGrid& sgrid);

} // namespace subdual
