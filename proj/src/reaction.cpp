#include "subdual/reaction.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "subdual/solver.hpp"
#include "subdual/util.hpp"

namespace subdual {

namespace {

constexpr double sig[4] = {1.0, 1.0, -1.0, -1.0};

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

// rate without the nonnegativity guard: Newton iterates may dip negative
// transiently, integer powers stay well-defined
double rate_raw(const std::array<double, 4>& c, const ReactionSpec& s) {
    return -s.nu_f * ipow(c[0], s.stoich[0]) * ipow(c[1], s.stoich[1]) +
           s.nu_b * ipow(c[2], s.stoich[2]) * ipow(c[3], s.stoich[3]);
}

std::array<double, 4> rate_grad(const std::array<double, 4>& c, const ReactionSpec& s) {
    std::array<double, 4> g{};
    g[0] = -s.nu_f * s.stoich[0] * ipow(c[0], s.stoich[0] - 1) * ipow(c[1], s.stoich[1]);
    g[1] = -s.nu_f * s.stoich[1] * ipow(c[0], s.stoich[0]) * ipow(c[1], s.stoich[1] - 1);
    g[2] = s.nu_b * s.stoich[2] * ipow(c[2], s.stoich[2] - 1) * ipow(c[3], s.stoich[3]);
    g[3] = s.nu_b * s.stoich[3] * ipow(c[2], s.stoich[2]) * ipow(c[3], s.stoich[3] - 1);
    return g;
}

} // namespace

void ReactionSpec::validate() const {
    std::vector<std::string> errs;
    for (int i = 0; i < 4; ++i) {
        if (stoich[i] < 1) errs.push_back("stoichiometric coefficients must be positive integers");
        if (!(d[i] > 0.0)) errs.push_back("diffusion coefficients must be positive");
        if (!c0[i]) errs.push_back("initial concentration " + std::to_string(i + 1) + " missing");
    }
    if (!(nu_f >= 0.0) || !(nu_b >= 0.0)) errs.push_back("rate constants must be nonnegative");
    if (!(m >= 1.0)) errs.push_back("exponent m must be >= 1");
    if (!(tol.newton > 0.0)) errs.push_back("newton tolerance must be positive");
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

double reaction_rate(const std::array<double, 4>& c, const ReactionSpec& spec) {
    for (double v : c)
        if (v < 0.0) throw std::domain_error("reaction_rate: negative concentration");
    return rate_raw(c, spec);
}

ReactionRun simulate(const ReactionSpec& spec, const KernelPair& pair, const TimeGrid& tgrid,
                     const SpaceGrid& sgrid) {
    spec.validate();
    if (sgrid.bc != BC::Neumann)
        throw std::domain_error("simulate: reaction runs use Neumann walls");

    using Sparse = Eigen::SparseMatrix<double>;
    using Vec = Eigen::VectorXd;
    const int N = tgrid.N;
    const int M = sgrid.npoints();
    const int n4 = 4 * M;
    const auto b = conv_weights(pair, tgrid);
    const Sparse A = neg_laplacian(sgrid);
    const Phi phi = Phi::power(spec.m);

    ReactionRun run{spec, pair, tgrid, sgrid, {}, 0.0, {}};
    for (int s = 0; s < 4; ++s) {
        run.c[s] = Field(N, M, false);
        for (int j = 0; j < M; ++j) {
            const double v = spec.c0[s](sgrid.x_of(j), sgrid.y_of(j));
            if (!std::isfinite(v) || v < 0.0)
                throw std::domain_error("simulate: initial concentrations must be finite and >= 0");
            run.c[s].at(0, j) = v;
        }
    }
    run.min_concentration = run.c[0].at(0, 0);
    for (int s = 0; s < 4; ++s)
        for (int j = 0; j < sgrid.npoints(); ++j)
            run.min_concentration = std::min(run.min_concentration, run.c[s].at(0, j));

    auto residual_vec = [&](const Vec& C, const Vec& rhs) {
        Vec F(n4);
        for (int s = 0; s < 4; ++s) {
            Vec ph(M);
            for (int j = 0; j < M; ++j) ph[j] = phi(C[s * M + j]);
            F.segment(s * M, M) =
                b[0] * C.segment(s * M, M) + spec.d[s] * (A * ph) - rhs.segment(s * M, M);
        }
        for (int j = 0; j < M; ++j) {
            const std::array<double, 4> cj{C[j], C[M + j], C[2 * M + j], C[3 * M + j]};
            const double r = rate_raw(cj, spec);
            for (int s = 0; s < 4; ++s) F[s * M + j] -= sig[s] * spec.stoich[s] * r;
        }
        return F;
    };

    Eigen::SparseLU<Sparse> lu;
    bool analyzed = false;
    Vec C(n4);
    for (int s = 0; s < 4; ++s)
        for (int j = 0; j < M; ++j) C[s * M + j] = run.c[s].at(0, j);

    for (int n = 1; n <= N; ++n) {
        Vec rhs(n4);
        for (int s = 0; s < 4; ++s) {
            Vec r = b[n - 1] * Eigen::Map<const Vec>(run.c[s].row(0), M);
            for (int j = 1; j < n; ++j)
                r += (b[n - j - 1] - b[n - j]) * Eigen::Map<const Vec>(run.c[s].row(j), M);
            rhs.segment(s * M, M) = r;
        }
        const double target = spec.tol.newton * (1.0 + rhs.norm());

        Vec F = residual_vec(C, rhs);
        double fn = F.norm();
        bool ok = false;
        for (int it = 0; it < spec.tol.max_newton && !ok; ++it) {
            if (fn <= target) {
                ok = true;
                break;
            }
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<std::size_t>(n4) * 9);
            for (int s = 0; s < 4; ++s) {
                const int off = s * M;
                for (int col = 0; col < M; ++col) {
                    const double dcol = spec.d[s] * phi.deriv(C[off + col]);
                    for (Sparse::InnerIterator it2(A, col); it2; ++it2)
                        trip.emplace_back(off + static_cast<int>(it2.row()), off + col,
                                          it2.value() * dcol);
                    trip.emplace_back(off + col, off + col, b[0]);
                }
            }
            for (int j = 0; j < M; ++j) {
                const std::array<double, 4> cj{C[j], C[M + j], C[2 * M + j], C[3 * M + j]};
                const auto g = rate_grad(cj, spec);
                for (int s = 0; s < 4; ++s)
                    for (int p = 0; p < 4; ++p)
                        trip.emplace_back(s * M + j, p * M + j,
                                          -sig[s] * spec.stoich[s] * g[p]);
            }
            Sparse J(n4, n4);
            J.setFromTriplets(trip.begin(), trip.end());
            J.makeCompressed();
            if (!analyzed) {
                lu.analyzePattern(J);
                analyzed = true;
            }
            lu.factorize(J);
            if (lu.info() != Eigen::Success) break;
            const Vec delta = lu.solve(-F);
            ++run.stats.newton_iterations;

            double lambda = 1.0;
            bool accepted = false;
            for (int bt = 0; bt <= spec.tol.max_backtrack; ++bt) {
                Vec cand = C + lambda * delta;
                Vec Fc = residual_vec(cand, rhs);
                const double fc = Fc.norm();
                if (fc <= (1.0 - 1e-4 * lambda) * fn || fc <= target) {
                    C = std::move(cand);
                    F = std::move(Fc);
                    fn = fc;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) break;
            if (fn <= target) ok = true;
        }
        if (!ok)
            throw StepFailure(n, fn,
                              "simulate: step " + std::to_string(n) + " failed (residual " +
                                  fmt17(fn) + ")");
        run.stats.max_step_residual =
            std::max(run.stats.max_step_residual, fn / (1.0 + rhs.norm()));

        for (int s = 0; s < 4; ++s)
            for (int j = 0; j < M; ++j) {
                const double v = C[s * M + j];
                if (v < -1e-8)
                    throw std::runtime_error("simulate: positivity breach at step " +
                                             std::to_string(n) + ", species " +
                                             std::to_string(s + 1) + ", node " +
                                             std::to_string(j) + " (value " + fmt17(v) + ")");
                run.c[s].at(n, j) = v;
                run.min_concentration = std::min(run.min_concentration, v);
            }
    }
    return run;
}

MassCombination mass_combination(const ReactionRun& run) {
    const auto& a = run.spec.stoich;
    // combination coefficients pair each species with the stoichiometry of the
    // opposite side: u = a3 c1 + a4 c2 + a1 c3 + a2 c4
    const double comb[4] = {static_cast<double>(a[2]), static_cast<double>(a[3]),
                            static_cast<double>(a[0]), static_cast<double>(a[1])};
    const int N = run.tgrid.N, M = run.sgrid.npoints();
    const Phi phi = Phi::power(run.spec.m);

    MassCombination mc;
    mc.u = Field(N, M, false);
    mc.a_eff = Field(N, M, false);
    const double dmin = std::min({run.spec.d[0], run.spec.d[1], run.spec.d[2], run.spec.d[3]});
    const double dmax = std::max({run.spec.d[0], run.spec.d[1], run.spec.d[2], run.spec.d[3]});
    mc.a_lo = dmax;
    mc.a_hi = dmin;
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j < M; ++j) {
            double u = 0.0, num = 0.0;
            for (int s = 0; s < 4; ++s) {
                const double c = run.c[s].at(n, j);
                u += comb[s] * c;
                num += run.spec.d[s] * comb[s] * phi(c);
            }
            mc.u.at(n, j) = u;
            const double den = phi(u);
            if (den == 0.0) {
                if (std::abs(num) > 0.0)
                    throw std::runtime_error("mass_combination: u vanishes at node with "
                                             "nonvanishing concentrations");
                mc.a_eff.at(n, j) = 0.5 * (dmin + dmax); // unconstrained node
                continue;
            }
            const double ae = num / den;
            mc.a_eff.at(n, j) = ae;
            mc.a_lo = std::min(mc.a_lo, ae);
            mc.a_hi = std::max(mc.a_hi, ae);
        }
    mc.u0 = mc.u.row_vec(0);
    return mc;
}

std::vector<double> mass_combination_residuals(const ReactionRun& run,
                                               const MassCombination& mc) {
    using Vec = Eigen::VectorXd;
    const int N = run.tgrid.N, M = run.sgrid.npoints();
    const auto b = conv_weights(run.pair, run.tgrid);
    const auto A = neg_laplacian(run.sgrid);
    const Phi phi = Phi::power(run.spec.m);

    std::vector<double> out(N + 1, 0.0);
    const Vec u0 = Eigen::Map<const Vec>(mc.u.row(0), M);
    for (int n = 1; n <= N; ++n) {
        Vec rhs = b[n - 1] * u0;
        for (int j = 1; j < n; ++j)
            rhs += (b[n - j - 1] - b[n - j]) * Eigen::Map<const Vec>(mc.u.row(j), M);
        Vec w(M);
        for (int j = 0; j < M; ++j) w[j] = mc.a_eff.at(n, j) * phi(mc.u.at(n, j));
        const Vec F =
            b[0] * Eigen::Map<const Vec>(mc.u.row(n), M) + A * w - rhs;
        out[n] = F.cwiseAbs().maxCoeff();
    }
    return out;
}

double mass_combination_residual(const ReactionRun& run, const MassCombination& mc) {
    const auto per_node = mass_combination_residuals(run, mc);
    return *std::max_element(per_node.begin(), per_node.end());
}

namespace {

double entropy_phi(double s) { return s * std::log(s) - s + 1.0; }

} // namespace

EntropyFields entropy_fields(const ReactionRun& run) {
    const int N = run.tgrid.N, M = run.sgrid.npoints();
    double cmin = run.c[0].min_value();
    for (int s = 1; s < 4; ++s) cmin = std::min(cmin, run.c[s].min_value());
    if (!(cmin > 0.0))
        throw std::domain_error("entropy_fields: concentrations must be strictly positive");

    const double dmin = std::min({run.spec.d[0], run.spec.d[1], run.spec.d[2], run.spec.d[3]});
    const double dmax = std::max({run.spec.d[0], run.spec.d[1], run.spec.d[2], run.spec.d[3]});

    EntropyFields ef;
    ef.min_concentration = cmin;
    for (int s = 0; s < 4; ++s) ef.z[s] = Field(N, M, true);
    ef.zsum = Field(N, M, true);
    ef.d_eff = Field(N, M, false);
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j < M; ++j) {
            double zs = 0.0, num = 0.0;
            for (int s = 0; s < 4; ++s) {
                const double z = entropy_phi(run.c[s].at(n, j));
                ef.z[s].at(n, j) = z;
                zs += z;
                num += run.spec.d[s] * z;
            }
            ef.zsum.at(n, j) = zs;
            ef.d_eff.at(n, j) = zs > 0.0 ? num / zs : 0.5 * (dmin + dmax);
        }
    ef.z0 = ef.zsum.row_vec(0);
    return ef;
}

std::vector<double> reform_derivative(const Kernel& k, const std::vector<double>& v_nodes,
                                      const TimeGrid& grid) {
    if (!k.bounded_at_zero())
        throw std::domain_error("reform_derivative: kernel must be bounded at 0 "
                                "(regularize first)");
    const int N = grid.N;
    if (static_cast<int>(v_nodes.size()) != N + 1)
        throw std::domain_error("reform_derivative: v must be nodal (N+1 values)");

    std::vector<double> kn(N + 1);
    for (int q = 0; q <= N; ++q) kn[q] = k.eval(grid.node(q));

    std::vector<double> out(N + 1, 0.0);
    for (int i = 1; i <= N; ++i) {
        double mem = 0.0;
        for (int q = 0; q < i; ++q) {
            // s in cell q, tau = t_i - s in cell i-q-1; -k' mass = k(t_q) - k(t_{q+1})
            const double dv = v_nodes[i] - 0.5 * (v_nodes[i - q] + v_nodes[i - q - 1]);
            mem += (kn[q] - kn[q + 1]) * dv;
        }
        out[i] = kn[i] * (v_nodes[i] - v_nodes[0]) + mem;
    }
    return out;
}

double quasipositivity_min(const ReactionSpec& spec, int samples, unsigned long seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int it = 0; it < samples; ++it) {
        const int i = static_cast<int>(rng.next_u64() % 4);
        std::array<double, 4> c;
        for (int s = 0; s < 4; ++s) c[s] = rng.uniform(0.0, 3.0);
        c[i] = 0.0;
        const double comp = sig[i] * spec.stoich[i] * rate_raw(c, spec);
        worst = std::min(worst, comp);
    }
    return worst;
}

} // namespace subdual
