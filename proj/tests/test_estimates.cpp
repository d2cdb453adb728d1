#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "subdual/estimates.hpp"
#include "subdual/solver.hpp"
#include "subdual/util.hpp"

using namespace subdual;

namespace {

ProblemSpec dirichlet_spec(double alpha, double T, int N, int M) {
    ProblemSpec s;
    s.pair = standard_pair(alpha);
    s.tgrid = TimeGrid(T, N);
    s.sgrid = SpaceGrid(1, 1.0, M, BC::Dirichlet);
    s.phi = Phi::power(1.0);
    s.a = [](double, double, double) { return 1.0; };
    s.u0 = [](double, double) { return 0.0; };
    s.f = [](double, double, double) { return 0.0; };
    return s;
}

// u* = (1 + t^2) sin(pi x) solves the linear alpha-problem with
// f = 2 t^{2-alpha}/Gamma(3-alpha) sin(pi x) + pi^2 (1 + t^2) sin(pi x)
ProblemSpec manufactured(double alpha, int N, int M) {
    ProblemSpec s = dirichlet_spec(alpha, 1.0, N, M);
    s.u0 = [](double x, double) { return std::sin(M_PI * x); };
    s.f = [alpha](double t, double x, double) {
        const double core = 2.0 * std::pow(t, 2.0 - alpha) / std::tgamma(3.0 - alpha);
        return (core + M_PI * M_PI * (1.0 + t * t)) * std::sin(M_PI * x);
    };
    return s;
}

ReactionSpec smooth_reaction() {
    ReactionSpec rs;
    rs.nu_f = rs.nu_b = 1.0;
    rs.d = {0.8, 1.0, 1.2, 1.5};
    rs.c0[0] = [](double x, double) { return 1.0 + 0.4 * std::cos(M_PI * x); };
    rs.c0[1] = [](double x, double) { return 1.2 - 0.3 * std::cos(M_PI * x); };
    rs.c0[2] = [](double x, double) { return 0.9 + 0.2 * std::cos(2.0 * M_PI * x); };
    rs.c0[3] = [](double, double) { return 1.1; };
    return rs;
}

const std::string* find_meta(const EstimateReport& r, const std::string& key) {
    for (const auto& [k, v] : r.metadata)
        if (k == key) return &v;
    return nullptr;
}

// every breakdown key carries a side prefix and the sides sum back to lhs/rhs
void check_breakdown(const EstimateReport& r) {
    double lsum = 0.0, rsum = 0.0;
    for (const auto& [key, v] : r.breakdown) {
        const bool is_l = key.rfind("lhs.", 0) == 0;
        const bool is_r = key.rfind("rhs.", 0) == 0;
        CHECK((is_l || is_r));
        (is_l ? lsum : rsum) += v;
    }
    const double scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
    CHECK(std::abs(lsum - r.lhs) <= 1e-12 * scale);
    CHECK(std::abs(rsum - r.rhs) <= 1e-12 * scale);
    CHECK(std::abs(r.margin - (r.rhs - r.lhs)) <= 1e-12 * scale);
}

Field scale_field(Field f, double lam) {
    for (double& x : f.data) x *= lam;
    return f;
}

std::vector<double> scale_vec(std::vector<double> v, double lam) {
    for (double& x : v) x *= lam;
    return v;
}

} // namespace

TEST_CASE("pme_constant: closed forms and domain") {
    CHECK(pme_constant(1.0) == 2.0);
    CHECK(pme_constant(2.0) == 128.0 / 27.0);
    CHECK(pme_constant(3.0) == 13.5); // 2 * 12^3 / 4^4
    CHECK(pme_constant(1.5) == doctest::Approx(2.0 * std::pow(6.0, 1.5) / std::pow(2.5, 2.5))
                                   .epsilon(1e-15));
    CHECK_THROWS_AS(pme_constant(0.5), std::domain_error);
    CHECK_THROWS_AS(pme_constant(0.0), std::domain_error);
}

TEST_CASE("c_alpha: triple-weight constant") {
    CHECK(c_alpha(0.5) ==
          doctest::Approx((1.0 - std::pow(2.0, -0.5)) / std::tgamma(0.5)).epsilon(1e-15));
    CHECK(c_alpha(0.5) == doctest::Approx(0.165246).epsilon(1e-5));
    for (double alpha : {0.1, 0.3, 0.8, 0.99}) CHECK(c_alpha(alpha) > 0.0);
    CHECK_THROWS_AS(c_alpha(0.0), std::domain_error);
    CHECK_THROWS_AS(c_alpha(1.0), std::domain_error);
    CHECK_THROWS_AS(c_alpha(-0.3), std::domain_error);

    // the half-order coercivity weight is cos(pi/4) = sqrt(2)/2
    CHECK(std::abs(std::cos(0.5 * M_PI / 2.0) - std::sqrt(2.0) / 2.0) <= 1e-15);
}

TEST_CASE("EstimateReport::make assembles sides, margin, and tolerance") {
    SUBCASE("sums, prefixes, and default tolerance") {
        const auto r = EstimateReport::make("demo", {{"a", 1.5}, {"b", 0.25}}, {{"c", 2.5}});
        CHECK(r.id == "demo");
        CHECK(r.lhs == 1.75);
        CHECK(r.rhs == 2.5);
        CHECK(r.margin == 0.75);
        CHECK(r.tol == estimate_tolerance(1.75, 2.5));
        CHECK(r.passed);
        REQUIRE(r.breakdown.size() == 3);
        CHECK(r.breakdown[0].first == "lhs.a");
        CHECK(r.breakdown[0].second == 1.5);
        CHECK(r.breakdown[1].first == "lhs.b");
        CHECK(r.breakdown[2].first == "rhs.c");
        check_breakdown(r);
    }

    SUBCASE("negative margin beyond tolerance fails") {
        const auto r = EstimateReport::make("bad", {{"a", 2.0}}, {{"b", 1.0}});
        CHECK(r.margin == -1.0);
        CHECK_FALSE(r.passed);
    }

    SUBCASE("tolerance override rescues a small deficit") {
        const auto r = EstimateReport::make("loose", {{"a", 2.0}}, {{"b", 1.0}}, 1.5);
        CHECK(r.tol == 1.5);
        CHECK(r.passed);
    }

    SUBCASE("tolerance floor and scaling") {
        CHECK(estimate_tolerance(0.0, 0.0) == 1e-9);
        CHECK(estimate_tolerance(3.0, -5.0) == 5e-9);
        CHECK(estimate_tolerance(2e9, 1.0) == 2.0);
    }
}

TEST_CASE("EstimateReport::to_json round-trips through a parser") {
    SUBCASE("values, breakdown, metadata, escaping") {
        auto r = EstimateReport::make("demo", {{"a", 1.0 / 3.0}, {"b", 0.25}}, {{"c", 2.5}});
        r.add_meta("note", "x\"y\\z");
        const auto j = nlohmann::json::parse(r.to_json());
        CHECK(j["id"] == "demo");
        CHECK(j["lhs"].get<double>() == r.lhs);
        CHECK(j["rhs"].get<double>() == r.rhs);
        CHECK(j["margin"].get<double>() == r.margin);
        CHECK(j["tol"].get<double>() == r.tol);
        CHECK(j["passed"].get<bool>() == r.passed);
        CHECK(j["breakdown"]["lhs.a"].get<double>() == 1.0 / 3.0);
        CHECK(j["breakdown"]["rhs.c"].get<double>() == 2.5);
        CHECK(j["metadata"]["note"] == "x\"y\\z");
    }

    SUBCASE("empty breakdown and metadata stay valid") {
        const auto r = EstimateReport::make("empty", {}, {});
        const auto j = nlohmann::json::parse(r.to_json());
        CHECK(j["breakdown"].empty());
        CHECK(j["metadata"].empty());
        CHECK(j["margin"].get<double>() == 0.0);
    }
}

TEST_CASE("zero data gives exactly zero margins") {
    const auto s = dirichlet_spec(0.5, 1.0, 32, 15);
    const Field u(s.tgrid.N, s.sgrid.npoints());
    const Field w = derive_w(s, u);
    const Field f = derive_f_cells(s);
    const auto u0 = s.u0_values();

    const auto rb = verify_basic(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    const auto ra = verify_basic_alt(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    const auto rt = verify_triple(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    for (const auto& r : {rb, ra, rt}) {
        CHECK(r.margin == 0.0);
        CHECK(r.passed);
    }
    CHECK(rb.id == "basic");
    CHECK(ra.id == "basic-alt");
    CHECK(rt.id == "triple");

    const std::vector<double> v(32, 0.0);
    const auto rg = verify_galpha(v, 0.5, TimeGrid(1.0, 32));
    CHECK(rg.margin == 0.0);
    CHECK(rg.passed);
    CHECK(rg.id == "galpha");
}

TEST_CASE("basic family on a manufactured solution") {
    const auto s = manufactured(0.5, 64, 31);
    const Field u = solve(s);
    const Field w = derive_w(s, u);
    const Field f = derive_f_cells(s);
    const auto u0 = s.u0_values();

    const auto rb = verify_basic(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    const auto ra = verify_basic_alt(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    const auto rt = verify_triple(u, w, u0, f, s.pair, s.tgrid, s.sgrid);

    SUBCASE("basic holds with a solid margin") {
        CHECK(rb.passed);
        CHECK(rb.margin == doctest::Approx(0.194875).epsilon(1e-4));
        CHECK(rb.lhs == doctest::Approx(7.61934).epsilon(1e-4));
        CHECK(rb.rhs == doctest::Approx(7.81421).epsilon(1e-4));
        check_breakdown(rb);
        REQUIRE(rb.breakdown.size() == 3);
        CHECK(rb.breakdown[0].first == "lhs.state_pairing");
        CHECK(rb.breakdown[1].first == "lhs.weighted_gradient");
        CHECK(rb.breakdown[2].first == "rhs.data_pairing");
    }

    SUBCASE("alternative realization is an equality at rounding level") {
        CHECK(ra.passed);
        CHECK(std::abs(ra.margin) <= 1e-12);
        check_breakdown(ra);
        const auto* real = find_meta(ra, "l_realization");
        REQUIRE(real != nullptr);
        CHECK(*real == "discrete companion of k");
        REQUIRE(ra.breakdown.size() == 3);
        CHECK(ra.breakdown[1].first == "lhs.elliptic_pairing");
    }

    SUBCASE("triple variant keeps a positive history term inside the margin") {
        CHECK(rt.passed);
        CHECK(rt.margin == doctest::Approx(0.0965816).epsilon(1e-4));
        CHECK(rt.margin < rb.margin); // the extra left-hand term eats margin
        check_breakdown(rt);
        const auto* hist = find_meta(rt, "history_term");
        REQUIRE(hist != nullptr);
        CHECK(std::stod(*hist) > 0.0);
        CHECK(std::stod(*hist) == doctest::Approx(rb.margin - rt.margin).epsilon(1e-10));
    }
}

TEST_CASE("pme bound on a manufactured solution") {
    const auto s = manufactured(0.5, 64, 31);
    const Field u = solve(s);

    const auto rp = verify_pme(u, s);
    CHECK(rp.id == "pme");
    CHECK(rp.passed);
    CHECK(rp.margin == doctest::Approx(246.014).epsilon(1e-4));
    CHECK(rp.lhs == doctest::Approx(14.2921).epsilon(1e-4));
    CHECK(rp.rhs == doctest::Approx(260.306).epsilon(1e-4));
    check_breakdown(rp);
    REQUIRE(rp.breakdown.size() == 4);
    CHECK(rp.breakdown[0].first == "lhs.state_mass");
    CHECK(rp.breakdown[1].first == "lhs.weighted_gradient");
    CHECK(rp.breakdown[2].first == "rhs.initial_data");
    CHECK(rp.breakdown[3].first == "rhs.source_data");
    const auto* cm = find_meta(rp, "C_m");
    REQUIRE(cm != nullptr);
    CHECK(std::stod(*cm) == 2.0);
    const auto* m = find_meta(rp, "m");
    REQUIRE(m != nullptr);
    CHECK(std::stod(*m) == 1.0);

    SUBCASE("consistent with the basic estimate on the same run") {
        const Field w = derive_w(s, u);
        const Field f = derive_f_cells(s);
        const auto rb = verify_basic(u, w, s.u0_values(), f, s.pair, s.tgrid, s.sgrid);
        CHECK(rb.passed);
        CHECK(rp.passed);
    }

    SUBCASE("shape and nonlinearity preconditions") {
        const Field wrong(12, 31);
        CHECK_THROWS_AS(verify_pme(wrong, s), std::domain_error);
        ProblemSpec tab = s;
        std::vector<double> xs{0.0, 1.0, 2.0}, ys{0.0, 1.0, 4.0};
        tab.phi = Phi::table(xs, ys);
        CHECK_THROWS_AS(verify_pme(u, tab), std::domain_error);
    }
}

TEST_CASE("scaling a linear run scales the basic margin quadratically") {
    const auto s = manufactured(0.5, 48, 23);
    const Field u = solve(s);
    const Field w = derive_w(s, u);
    const Field f = derive_f_cells(s);
    const auto u0 = s.u0_values();

    const auto r1 = verify_basic(u, w, u0, f, s.pair, s.tgrid, s.sgrid);
    const double lam = 3.0;
    const auto r2 = verify_basic(scale_field(u, lam), scale_field(w, lam), scale_vec(u0, lam),
                                 scale_field(f, lam), s.pair, s.tgrid, s.sgrid);

    // every term in the m = 1 estimate is bilinear, so margins scale by lam^2
    CHECK(r2.margin / r1.margin == doctest::Approx(lam * lam).epsilon(1e-12));
    CHECK(r1.passed == r2.passed);
    CHECK((r1.margin > 0.0) == (r2.margin > 0.0));
}

TEST_CASE("triple variant requires a completely monotone kernel") {
    const TimeGrid tgrid(1.0, 16);
    const SpaceGrid sgrid(1, 1.0, 7, BC::Dirichlet);
    std::vector<double> ts, vs;
    for (int i = 0; i <= 64; ++i) {
        ts.push_back(i / 64.0);
        vs.push_back(std::exp(-ts.back()));
    }
    const Kernel tab = Kernel::tabulated_samples(ts, vs);
    const KernelPair pair{tab, companion_kernel(tab, tgrid), 1e-8};
    const Field u(16, 7), w(16, 7), f(16, 7);
    const std::vector<double> u0(7, 0.0);
    CHECK_FALSE(tab.completely_monotone());
    CHECK_THROWS_AS(verify_triple(u, w, u0, f, pair, tgrid, sgrid), std::domain_error);
}

TEST_CASE("galpha coercivity") {
    SUBCASE("random cell series all pass") {
        Rng rng(777);
        const double alphas[3] = {0.3, 0.5, 0.8};
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> p(64);
            for (double& x : p) x = rng.uniform(-1.0, 1.0);
            const auto r = verify_galpha(p, alphas[rep % 3], TimeGrid(1.0, 64));
            CHECK(r.passed);
            CHECK(r.margin >= -r.tol);
            check_breakdown(r);
        }
    }

    SUBCASE("weight constant lands in metadata") {
        std::vector<double> p(32, 0.0);
        p[3] = 1.0;
        p[17] = -0.5;
        const auto r = verify_galpha(p, 0.5, TimeGrid(1.0, 32));
        CHECK(r.passed);
        REQUIRE(r.breakdown.size() == 2);
        CHECK(r.breakdown[0].first == "lhs.weighted_half_power");
        CHECK(r.breakdown[1].first == "rhs.state_pairing");
        const auto* g = find_meta(r, "gamma_alpha");
        REQUIRE(g != nullptr);
        CHECK(std::stod(*g) == doctest::Approx(std::cos(0.25 * M_PI)).epsilon(1e-15));
    }

    SUBCASE("preconditions") {
        std::vector<double> p(32, 0.0);
        CHECK_THROWS_AS(verify_galpha(p, 0.0, TimeGrid(1.0, 32)), std::domain_error);
        CHECK_THROWS_AS(verify_galpha(p, 1.0, TimeGrid(1.0, 32)), std::domain_error);
        CHECK_THROWS_AS(verify_galpha(p, 0.5, TimeGrid(1.0, 31)), std::domain_error);
    }
}

TEST_CASE("monotone pairing is nonnegative") {
    const TimeGrid tgrid(1.0, 8);
    const SpaceGrid sgrid(1, 1.0, 6, BC::Neumann);
    const Phi phi = Phi::power(2.0);

    SUBCASE("identical fields pair to zero") {
        Field u(8, 6);
        Rng rng(5);
        for (double& x : u.data) x = rng.uniform(0.0, 2.0);
        CHECK(monotone_pairing(u, u, phi, tgrid, sgrid) == 0.0);
    }

    SUBCASE("random nonnegative pairs stay above the floor") {
        Rng rng(20260814);
        for (int rep = 0; rep < 100; ++rep) {
            Field u1(8, 6), u2(8, 6);
            for (double& x : u1.data) x = rng.uniform(0.0, 2.0);
            for (double& x : u2.data) x = rng.uniform(0.0, 2.0);
            CHECK(monotone_pairing(u1, u2, phi, tgrid, sgrid) >= -1e-12);
        }
    }

    SUBCASE("shape mismatch is rejected") {
        const Field u1(8, 6), u2(8, 5);
        CHECK_THROWS_AS(monotone_pairing(u1, u2, phi, tgrid, sgrid), std::domain_error);
    }
}

TEST_CASE("uniqueness gap across genuinely different solver paths") {
    ProblemSpec s = dirichlet_spec(0.5, 0.5, 64, 31);
    s.phi = Phi::power(2.0);
    s.nonneg = true;
    s.u0 = [](double x, double) { return std::sin(M_PI * x); };
    s.f = [](double t, double x, double) {
        return std::max(0.5 * std::exp(-t) * std::sin(2.0 * M_PI * x), 0.0);
    };

    const auto res = uniqueness_gap(s);
    CHECK(res.gap >= 0.0);
    CHECK(res.gap <= 1e-8);
    CHECK(std::abs(res.pairing) <= 1e-12);
    CHECK(res.pairing >= -1e-12);

    const auto& r = res.report;
    CHECK(r.id == "uniqueness");
    CHECK(r.passed);
    check_breakdown(r);
    REQUIRE(r.breakdown.size() == 2);
    CHECK(r.breakdown[0].first == "lhs.path_gap");
    CHECK(r.breakdown[1].first == "rhs.gap_budget");
    CHECK(r.breakdown[1].second == 1e-8);
    const auto* mp = find_meta(r, "monotone_pairing");
    REQUIRE(mp != nullptr);
    CHECK(std::stod(*mp) == res.pairing);
    const auto* ni = find_meta(r, "newton_iterations");
    REQUIRE(ni != nullptr);
    CHECK(std::stoi(*ni) > 0);
    const auto* pi = find_meta(r, "picard_iterations");
    REQUIRE(pi != nullptr);
    CHECK(std::stoi(*pi) > 0);
}

TEST_CASE("entropy verifier") {
    SUBCASE("equilibrium run carries zero entropy") {
        ReactionSpec rs;
        rs.nu_f = rs.nu_b = 1.0;
        rs.d = {1.0, 1.0, 1.0, 1.0};
        for (int sp = 0; sp < 4; ++sp) rs.c0[sp] = [](double, double) { return 1.0; };
        const auto run =
            simulate(rs, standard_pair(0.5), TimeGrid(0.5, 16), SpaceGrid(1, 1.0, 8, BC::Neumann));
        const auto r = verify_entropy(run);
        CHECK(r.id == "entropy");
        CHECK(r.margin == 0.0);
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs == 0.0);
        CHECK(r.passed);
    }

    SUBCASE("smooth positive run passes with species metadata") {
        const auto run = simulate(smooth_reaction(), standard_pair(0.5), TimeGrid(0.5, 24),
                                  SpaceGrid(1, 1.0, 12, BC::Neumann));
        const auto r = verify_entropy(run);
        CHECK(r.passed);
        CHECK(r.margin == doctest::Approx(0.0435013).epsilon(1e-4));
        check_breakdown(r);
        REQUIRE(r.breakdown.size() == 3);
        CHECK(r.breakdown[0].first == "lhs.entropy_mass");
        CHECK(r.breakdown[1].first == "lhs.weighted_gradient");
        CHECK(r.breakdown[2].first == "rhs.initial_entropy");

        const auto* cent = find_meta(r, "C_ent");
        REQUIRE(cent != nullptr);
        CHECK(*cent == "7.5"); // 4 (1.5/0.8) sqrt(2 * 0.5)
        const auto* sp = find_meta(r, "species_passed");
        REQUIRE(sp != nullptr);
        CHECK(*sp == "true");
        const auto* sl = find_meta(r, "species_lhs");
        const auto* sr = find_meta(r, "species_rhs");
        REQUIRE(sl != nullptr);
        REQUIRE(sr != nullptr);
        CHECK(std::stod(*sl) <= std::stod(*sr));
        const auto* mc = find_meta(r, "min_concentration");
        REQUIRE(mc != nullptr);
        CHECK(std::stod(*mc) == doctest::Approx(0.60342205545047589).epsilon(1e-12));
    }

    SUBCASE("near-floor concentrations flip the report to skipped") {
        auto run = simulate(smooth_reaction(), standard_pair(0.5), TimeGrid(0.5, 8),
                            SpaceGrid(1, 1.0, 6, BC::Neumann));
        run.c[0].at(1, 0) = 5e-11;
        const auto r = verify_entropy(run);
        CHECK(r.passed);
        CHECK(r.margin == 0.0);
        CHECK(r.breakdown.empty());
        REQUIRE(!r.metadata.empty());
        CHECK(r.metadata[0].first == "skipped");
        CHECK(r.metadata[0].second == "min concentration below 1e-10");
    }

    SUBCASE("unbalanced rates are rejected") {
        auto run = simulate(smooth_reaction(), standard_pair(0.5), TimeGrid(0.5, 8),
                            SpaceGrid(1, 1.0, 6, BC::Neumann));
        run.spec.nu_f = 2.0;
        CHECK_THROWS_AS(verify_entropy(run), std::domain_error);
    }
}

TEST_CASE("spectral verifier") {
    ProblemSpec s;
    s.pair = standard_pair(0.5);
    s.tgrid = TimeGrid(0.5, 32);
    s.sgrid = SpaceGrid(1, 1.0, 32, BC::Periodic);
    s.phi = Phi::power(2.0);
    s.a = [](double, double, double) { return 1.0; };
    s.u0 = [](double x, double) { return 1.0 + 0.5 * std::sin(2.0 * M_PI * x); };
    s.f = [](double, double, double) { return 0.0; };
    const auto opr = SpectralOperator::fractional(1.0, 32, 1.0);

    SUBCASE("zero data gives a zero margin") {
        ProblemSpec z = s;
        z.u0 = [](double, double) { return 0.0; };
        const Field u = solve_nonlocal_pme(z, opr);
        const auto r = verify_spectral(u, z, opr);
        CHECK(r.margin == 0.0);
        CHECK(r.passed);
    }

    SUBCASE("half-order nonlinear run passes with Hoelder metadata") {
        const Field u = solve_nonlocal_pme(s, opr);
        const auto r = verify_spectral(u, s, opr);
        CHECK(r.id == "spectral");
        CHECK(r.passed);
        CHECK(r.margin == doctest::Approx(0.0120768).epsilon(1e-4));
        check_breakdown(r);
        REQUIRE(r.breakdown.size() == 2);
        CHECK(r.breakdown[0].first == "lhs.state_pairing");
        CHECK(r.breakdown[1].first == "rhs.data_pairing");

        const auto* hp = find_meta(r, "holder_passed");
        REQUIRE(hp != nullptr);
        CHECK(*hp == "true");
        const auto* hl = find_meta(r, "holder_lhs");
        const auto* hr = find_meta(r, "holder_rhs");
        REQUIRE(hl != nullptr);
        REQUIRE(hr != nullptr);
        CHECK(std::stod(*hl) <= std::stod(*hr));
        const auto* beta = find_meta(r, "beta");
        REQUIRE(beta != nullptr);
        CHECK(std::stod(*beta) == 1.0);
    }

    SUBCASE("non-periodic runs and shape mismatches are rejected") {
        ProblemSpec d = s;
        d.sgrid = SpaceGrid(1, 1.0, 32, BC::Dirichlet);
        const Field u(32, 32);
        CHECK_THROWS_AS(verify_spectral(u, d, opr), std::domain_error);
        const Field wrong(32, 33);
        CHECK_THROWS_AS(verify_spectral(wrong, s, opr), std::domain_error);
    }
}

TEST_CASE("derived data helpers") {
    ProblemSpec s = dirichlet_spec(0.5, 1.0, 16, 7);
    s.a = [](double, double, double) { return 2.0; };
    s.a1 = 1.0;
    s.a2 = 3.0;
    s.u0 = [](double x, double) { return std::sin(M_PI * x); };
    s.f = [](double t, double x, double) { return t * x; };
    const Field u = solve(s);

    SUBCASE("w is the coefficient-weighted nonlinearity of the state") {
        const Field w = derive_w(s, u);
        CHECK(w.N == u.N);
        CHECK(w.M == u.M);
        for (int n = 0; n <= u.N; ++n)
            for (int j = 0; j < u.M; ++j) CHECK(w.at(n, j) == 2.0 * u.at(n, j));
    }

    SUBCASE("f cells sample the source at right endpoints") {
        const Field fc = derive_f_cells(s);
        CHECK(fc.N == s.tgrid.N);
        CHECK(fc.M == s.sgrid.npoints());
        for (int j = 0; j < fc.M; ++j) CHECK(fc.at(0, j) == 0.0);
        for (int n = 1; n <= fc.N; ++n)
            for (int j = 0; j < fc.M; ++j)
                CHECK(fc.at(n, j) ==
                      doctest::Approx(s.tgrid.node(n) * s.sgrid.coord(j)).epsilon(1e-14));
    }
}
