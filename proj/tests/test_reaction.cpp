#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subdual/reaction.hpp"
#include "subdual/solver.hpp"
#include "subdual/util.hpp"

using namespace subdual;

namespace {

const double euler_e = 2.718281828459045;

ReactionSpec uniform_spec() {
    ReactionSpec rs;
    for (int i = 0; i < 4; ++i) rs.c0[i] = [](double, double) { return 1.0; };
    return rs;
}

ReactionSpec smooth_spec() {
    ReactionSpec rs;
    rs.d = {0.8, 1.0, 1.2, 1.5};
    rs.c0[0] = [](double x, double) { return 1.0 + 0.4 * std::cos(M_PI * x); };
    rs.c0[1] = [](double x, double) { return 1.2 - 0.3 * std::cos(M_PI * x); };
    rs.c0[2] = [](double x, double) { return 0.9 + 0.2 * std::cos(2 * M_PI * x); };
    rs.c0[3] = [](double, double) { return 1.1; };
    return rs;
}

// a run fabricated node by node (bypasses simulate) for the pure field maps
ReactionRun handmade_run(const std::array<double, 4>& vals) {
    ReactionRun run;
    run.spec = uniform_spec();
    run.pair = standard_pair(0.5);
    run.tgrid = TimeGrid(1.0, 2);
    run.sgrid = SpaceGrid(1, 1.0, 3, BC::Neumann);
    for (int s = 0; s < 4; ++s) {
        run.c[s] = Field(2, 3, false);
        for (int n = 0; n <= 2; ++n)
            for (int j = 0; j < 3; ++j) run.c[s].at(n, j) = vals[s];
    }
    return run;
}

} // namespace

TEST_CASE("reaction_rate: closed forms") {
    ReactionSpec rs = uniform_spec();

    rs.nu_f = rs.nu_b = 3.7;
    CHECK(reaction_rate({1.0, 1.0, 1.0, 1.0}, rs) == 0.0);

    rs.nu_f = 2.0;
    rs.nu_b = 1.0;
    CHECK(reaction_rate({1.0, 2.0, 3.0, 4.0}, rs) == doctest::Approx(8.0).epsilon(1e-15));

    rs.nu_b = 0.0;
    CHECK(reaction_rate({0.0, 5.0, 7.0, 9.0}, rs) == 0.0);

    CHECK_THROWS_AS(reaction_rate({-0.1, 1.0, 1.0, 1.0}, rs), std::domain_error);

    // stoichiometry enters as exponents
    rs.stoich = {2, 1, 1, 1};
    rs.nu_f = 1.0;
    rs.nu_b = 0.0;
    CHECK(reaction_rate({3.0, 2.0, 1.0, 1.0}, rs) == doctest::Approx(-18.0).epsilon(1e-15));
}

TEST_CASE("spec validation") {
    ReactionSpec rs = uniform_spec();
    rs.stoich = {0, 1, 1, 1};
    rs.d = {1.0, -1.0, 1.0, 1.0};
    rs.m = 0.5;
    rs.nu_f = -2.0;
    try {
        rs.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.items.size() >= 4);
    }
}

TEST_CASE("simulate: homogeneous equilibrium is constant in time") {
    ReactionSpec rs = uniform_spec();
    rs.nu_f = rs.nu_b = 1.0;
    const auto run = simulate(rs, standard_pair(0.5), TimeGrid(0.5, 16), SpaceGrid(1, 1.0, 8, BC::Neumann));
    for (int s = 0; s < 4; ++s)
        for (double v : run.c[s].data) CHECK(std::abs(v - 1.0) <= 1e-11);
    CHECK(run.min_concentration >= 1.0 - 1e-11);
}

TEST_CASE("simulate: vanishing rates decouple into scalar solves") {
    ReactionSpec rs = smooth_spec();
    rs.nu_f = rs.nu_b = 0.0;
    const KernelPair pair = standard_pair(0.5);
    const TimeGrid tg(0.5, 24);
    const SpaceGrid sg(1, 1.0, 12, BC::Neumann);
    const auto run = simulate(rs, pair, tg, sg);
    for (int s = 0; s < 4; ++s) {
        ProblemSpec ps;
        ps.pair = pair;
        ps.tgrid = tg;
        ps.sgrid = sg;
        const double d = rs.d[s];
        ps.a = [d](double, double, double) { return d; };
        ps.a1 = ps.a2 = d;
        ps.u0 = rs.c0[s];
        ps.f = [](double, double, double) { return 0.0; };
        const Field u = solve(ps);
        for (std::size_t i = 0; i < u.data.size(); ++i)
            CHECK(std::abs(u.data[i] - run.c[s].data[i]) <= 1e-10);
    }
}

TEST_CASE("simulate: positivity monitor on a reacting run") {
    ReactionSpec rs = smooth_spec();
    rs.nu_f = rs.nu_b = 1.0;
    const auto run = simulate(rs, standard_pair(0.5), TimeGrid(0.5, 24), SpaceGrid(1, 1.0, 12, BC::Neumann));
    CHECK(run.min_concentration >= -1e-10);
    CHECK(run.min_concentration > 0.0); // this data never touches zero
    for (int s = 0; s < 4; ++s) run.c[s].check_invariants();
}

TEST_CASE("simulate: preconditions") {
    ReactionSpec rs = uniform_spec();
    CHECK_THROWS_AS(simulate(rs, standard_pair(0.5), TimeGrid(0.5, 4), SpaceGrid(1, 1.0, 4, BC::Dirichlet)),
                    std::domain_error);
    rs.c0[2] = [](double, double) { return -0.5; };
    CHECK_THROWS_AS(simulate(rs, standard_pair(0.5), TimeGrid(0.5, 4), SpaceGrid(1, 1.0, 4, BC::Neumann)),
                    std::domain_error);
}

TEST_CASE("mass combination") {
    const KernelPair pair = standard_pair(0.5);
    const TimeGrid tg(0.5, 24);
    const SpaceGrid sg(1, 1.0, 12, BC::Neumann);

    SUBCASE("equal diffusivities collapse a_eff to the common value") {
        ReactionSpec rs = smooth_spec();
        rs.d = {1.3, 1.3, 1.3, 1.3};
        const auto run = simulate(rs, pair, tg, sg);
        const auto mc = mass_combination(run);
        CHECK(std::abs(mc.a_lo - 1.3) <= 1e-12);
        CHECK(std::abs(mc.a_hi - 1.3) <= 1e-12);
    }

    SUBCASE("unit concentrations pick out the matching diffusivity") {
        for (int s = 0; s < 4; ++s) {
            std::array<double, 4> vals{0.0, 0.0, 0.0, 0.0};
            vals[s] = 2.0;
            ReactionRun run = handmade_run(vals);
            run.spec.d = {0.8, 1.0, 1.2, 1.5};
            const auto mc = mass_combination(run);
            CHECK(mc.a_lo == doctest::Approx(run.spec.d[s]).epsilon(1e-14));
            CHECK(mc.a_hi == doctest::Approx(run.spec.d[s]).epsilon(1e-14));
        }
    }

    SUBCASE("combined field satisfies the scalar equation") {
        ReactionSpec rs = smooth_spec();
        rs.nu_f = rs.nu_b = 1.0;
        const auto run = simulate(rs, pair, tg, sg);
        const auto mc = mass_combination(run);
        CHECK(mc.a_lo >= 0.8 - 1e-12);
        CHECK(mc.a_hi <= 1.5 + 1e-12);
        const auto res = mass_combination_residuals(run, mc);
        CHECK(res[0] == 0.0);
        CHECK(mass_combination_residual(run, mc) <= 10.0 * rs.tol.newton);
        // u0 is the combination of the initial data
        for (int j = 0; j < sg.npoints(); ++j) {
            const double expect = run.c[0].at(0, j) + run.c[1].at(0, j) + run.c[2].at(0, j) +
                                  run.c[3].at(0, j);
            CHECK(mc.u0[j] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
}

TEST_CASE("entropy fields") {
    SUBCASE("equilibrium has zero entropy") {
        const auto run = handmade_run({1.0, 1.0, 1.0, 1.0});
        const auto ef = entropy_fields(run);
        for (int s = 0; s < 4; ++s) CHECK(ef.z[s].max_abs() == 0.0);
        CHECK(ef.zsum.max_abs() == 0.0);
    }

    SUBCASE("phi(e) = 1") {
        const auto run = handmade_run({euler_e, 1.0, 1.0, 1.0});
        const auto ef = entropy_fields(run);
        for (int n = 0; n <= 2; ++n)
            for (int j = 0; j < 3; ++j) CHECK(ef.zsum.at(n, j) == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("d_eff stays within the diffusivity range") {
        ReactionRun run = handmade_run({0.5, 2.0, 1.0, 3.0});
        run.spec.d = {0.6, 1.0, 1.4, 2.0};
        const auto ef = entropy_fields(run);
        for (double v : ef.d_eff.data) {
            CHECK(v >= 0.6 - 1e-12);
            CHECK(v <= 2.0 + 1e-12);
        }
        for (int s = 0; s < 4; ++s)
            for (double v : ef.z[s].data) CHECK(v >= 0.0);
    }

    SUBCASE("nonpositive concentrations are rejected") {
        CHECK_THROWS_AS(entropy_fields(handmade_run({0.0, 1.0, 1.0, 1.0})), std::domain_error);
    }
}

TEST_CASE("entropy dissipativity over random states") {
    ReactionSpec rs = uniform_spec();
    rs.stoich = {1, 2, 1, 3};
    rs.nu_f = rs.nu_b = 1.7;
    const double sig[4] = {1.0, 1.0, -1.0, -1.0};
    Rng rng(99);
    for (int rep = 0; rep < 10000; ++rep) {
        std::array<double, 4> c;
        for (auto& v : c) v = rng.uniform(1e-3, 3.0);
        const double r = reaction_rate(c, rs);
        double diss = 0.0;
        for (int i = 0; i < 4; ++i) diss += sig[i] * rs.stoich[i] * r * std::log(c[i]);
        CHECK(diss <= 1e-12);
    }
}

TEST_CASE("quasipositivity on the boundary of the positive cone") {
    ReactionSpec rs = uniform_spec();
    rs.stoich = {2, 1, 1, 2};
    rs.nu_f = 1.3;
    rs.nu_b = 0.7;
    CHECK(quasipositivity_min(rs, 10000, 12345) >= 0.0);
}

TEST_CASE("reform derivative") {
    SUBCASE("constant path maps to zero") {
        const TimeGrid g(1.0, 64);
        const Kernel k = Kernel::standard(1.0);
        const auto out = reform_derivative(k, std::vector<double>(g.N + 1, 5.0), g);
        for (double v : out) CHECK(v == 0.0);
    }

    SUBCASE("exponential kernel, linear path: d/dt(k*t) = 1 - e^{-t}") {
        double prev = 1e300;
        for (int N : {256, 512}) {
            const TimeGrid g(1.0, N);
            std::vector<double> ts, vs;
            for (int i = 0; i <= 4 * N; ++i) {
                ts.push_back(g.T * i / (4 * N));
                vs.push_back(std::exp(-ts.back()));
            }
            const Kernel k = Kernel::tabulated_samples(ts, vs);
            std::vector<double> v(g.N + 1);
            for (int i = 0; i <= g.N; ++i) v[i] = g.node(i);
            const auto out = reform_derivative(k, v, g);
            double worst = 0.0;
            for (int i = 0; i <= g.N; ++i)
                worst = std::max(worst, std::abs(out[i] - (1.0 - std::exp(-g.node(i)))));
            CHECK(worst <= 1e-5);
            CHECK(worst < prev);
            prev = worst;
        }
    }

    SUBCASE("interior first touch of a minimum is certified negative") {
        const TimeGrid g(1.0, 128);
        std::vector<double> ts, vs;
        for (int i = 0; i <= 512; ++i) {
            ts.push_back(g.T * i / 512);
            vs.push_back(std::exp(-ts.back()));
        }
        const Kernel k = Kernel::tabulated_samples(ts, vs);
        std::vector<double> v(g.N + 1);
        int istar = 0;
        for (int i = 0; i <= g.N; ++i) {
            const double t = g.node(i);
            v[i] = (t - 0.6) * (t - 0.6);
            if (std::abs(t - 0.6) < std::abs(g.node(istar) - 0.6)) istar = i;
        }
        const auto out = reform_derivative(k, v, g);
        CHECK(out[istar] < 0.0);
    }

    SUBCASE("singular kernels are rejected") {
        const TimeGrid g(1.0, 16);
        CHECK_THROWS_AS(reform_derivative(Kernel::standard(0.5), std::vector<double>(17, 1.0), g),
                        std::domain_error);
        CHECK_THROWS_AS(reform_derivative(Kernel::standard(1.0), std::vector<double>(16, 1.0), g),
                        std::domain_error);
    }
}
