#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "subdual/conv.hpp"
#include "subdual/grids.hpp"
#include "subdual/kernels.hpp"

using namespace subdual;

namespace {

const double inv_sqrt_pi = 0.5641895835477563; // 1/sqrt(pi)

Kernel multi_example() {
    // g_{0.7} + 2 g_{0.3}
    return Kernel::multi_term({{1.0, 0.3}, {2.0, 0.7}});
}

} // namespace

TEST_CASE("eval_standard: closed forms") {
    // g_1 = 1, g_2(t) = t, g_{1/2}(1) = 1/sqrt(pi)
    for (double t : {0.1, 1.0, 7.5}) CHECK(eval_standard(1.0, t) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval_standard(2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(eval_standard(0.5, 1.0) == doctest::Approx(inv_sqrt_pi).epsilon(1e-9));
    CHECK(std::abs(eval_standard(0.5, 1.0) - 0.5641896) < 1e-6);

    CHECK_THROWS_AS(eval_standard(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(eval_standard(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(eval_standard(-1.0, 1.0), std::domain_error);
}

TEST_CASE("antiderivative: exact for parametric kernels") {
    const Kernel k = Kernel::standard(0.5);
    CHECK(k.antiderivative(0.0) == 0.0);
    // int_0^1 g_{0.5} = g_{1.5}(1) = 1/Gamma(1.5)
    CHECK(k.antiderivative(1.0) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-15));
    CHECK(k.antiderivative(1.0) == doctest::Approx(1.1283791670955126).epsilon(1e-15));

    // weighted sum: int_0^1 (g_{0.7} + 2 g_{0.3}) = g_{1.7}(1) + 2 g_{1.3}(1)
    const Kernel mk = multi_example();
    const double expect = 1.0 / std::tgamma(1.7) + 2.0 / std::tgamma(1.3);
    CHECK(mk.antiderivative(1.0) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(mk.antiderivative(0.0) == 0.0);

    // consistency with eval by midpoint quadrature on [0.5, 1]
    for (const Kernel& kk : {k, mk, Kernel::exp_shifted(0.4, 2.0)}) {
        const int n = 20000;
        const double a = 0.5, b = 1.0, h = (b - a) / n;
        double q = 0.0;
        for (int i = 0; i < n; ++i) q += h * kk.eval(a + (i + 0.5) * h);
        CHECK(kk.antiderivative(b) - kk.antiderivative(a) == doctest::Approx(q).epsilon(1e-8));
    }
}

TEST_CASE("kernel factories: domain validation") {
    CHECK_THROWS_AS(Kernel::standard(0.0), std::domain_error);
    CHECK_THROWS_AS(Kernel::standard(1.5), std::domain_error);
    CHECK_THROWS_AS(Kernel::multi_term({}), std::domain_error);
    CHECK_THROWS_AS(Kernel::multi_term({{-1.0, 0.5}}), std::domain_error);
    CHECK_THROWS_AS(Kernel::multi_term({{1.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(Kernel::exp_shifted(1.2, 1.0), std::domain_error);
    CHECK_THROWS_AS(Kernel::exp_shifted(0.5, -1.0), std::domain_error);
    CHECK_THROWS_AS(Kernel::standard(0.5).eval(0.0), std::domain_error);
    CHECK_THROWS_AS(Kernel::standard(0.5).scaled(0.0), std::domain_error);
}

TEST_CASE("tabulated kernels") {
    // piecewise-linear samples of e^{-t}
    std::vector<double> ts, vs;
    for (int i = 0; i <= 100; ++i) {
        ts.push_back(i / 100.0);
        vs.push_back(std::exp(-ts.back()));
    }
    const Kernel k = Kernel::tabulated_samples(ts, vs);
    CHECK(k.bounded_at_zero());
    CHECK(k.eval(0.0) == doctest::Approx(1.0));
    CHECK(k.eval(0.505) == doctest::Approx(std::exp(-0.505)).epsilon(1e-4));
    CHECK(k.antiderivative(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
    CHECK_THROWS_AS(k.derivative(0.5), std::domain_error);
    CHECK_THROWS_AS(k.eval(2.0), std::domain_error); // beyond tabulated range
    CHECK(k.power_terms().empty());

    CHECK_THROWS_AS(Kernel::tabulated_samples({0.0}, {1.0}), std::domain_error);
    CHECK_THROWS_AS(Kernel::tabulated_samples({0.0, 0.0}, {1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(Kernel::tabulated_samples({0.0, 1.0}, {1.0, -1.0}), std::domain_error);

    const TimeGrid grid(1.0, 4);
    CHECK_THROWS_AS(Kernel::tabulated_cells(grid, {1.0, 1.0}), std::domain_error);
    const Kernel kc = Kernel::tabulated_cells(grid, {4.0, 3.0, 2.0, 1.0});
    CHECK(kc.antiderivative(1.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(kc.eval(0.1) == doctest::Approx(4.0));
}

TEST_CASE("scaled kernels") {
    const Kernel k = Kernel::standard(0.5).scaled(3.0);
    CHECK(k.eval(1.0) == doctest::Approx(3.0 * inv_sqrt_pi).epsilon(1e-12));
    CHECK(k.antiderivative(1.0) == doctest::Approx(3.0 / std::tgamma(1.5)).epsilon(1e-12));
    CHECK(k.derivative(1.0) == doctest::Approx(3.0 * (-0.5) * inv_sqrt_pi).epsilon(1e-12));
}

TEST_CASE("standard_pair: (g_{1-alpha}, g_alpha)") {
    for (double alpha : {0.5, 0.3, 0.999}) {
        const KernelPair p = standard_pair(alpha);
        CHECK(p.k.eval(1.0) == doctest::Approx(eval_standard(1.0 - alpha, 1.0)).epsilon(1e-15));
        CHECK(p.l.eval(1.0) == doctest::Approx(eval_standard(alpha, 1.0)).epsilon(1e-15));
        // k*l = 1: discrete conv of k against cell averages of l settles on 1
        // away from the singular head
        const TimeGrid grid(1.0, 256);
        const auto op = ConvOperator::from_kernel(p.k, grid);
        std::vector<double> lam(grid.N);
        for (int i = 0; i < grid.N; ++i)
            lam[i] = (p.l.antiderivative(grid.right(i)) - p.l.antiderivative(grid.node(i))) /
                     grid.dt();
        const auto one = op.conv(lam);
        for (int i = grid.N / 4; i < grid.N; ++i) CHECK(std::abs(one[i] - 1.0) < 5e-3);
        CHECK(p.eps_pair > 0.0);
    }
    CHECK_THROWS_AS(standard_pair(0.0), std::domain_error);
    CHECK_THROWS_AS(standard_pair(1.0), std::domain_error);
}

TEST_CASE("companion_kernel: discrete inverse under convolution") {
    SUBCASE("standard alpha=0.5 companion approximates g_{0.5} on the tail") {
        const TimeGrid grid(1.0, 512);
        const Kernel k = Kernel::standard(0.5); // k = g_{0.5}, companion ~ g_{0.5}
        const Kernel lam = companion_kernel(k, grid);
        double worst = 0.0;
        for (int i = 0; i < grid.N; ++i) {
            const double t = grid.mid(i);
            if (t < grid.T / 4) continue; // cell values can't track the singular head
            const double exact = eval_standard(0.5, t);
            worst = std::max(worst, std::abs(lam.eval(t) - exact) / exact);
        }
        CHECK(worst <= 5e-3);
    }

    SUBCASE("exact discrete identity for the multi-term kernel") {
        const TimeGrid grid(1.0, 256);
        const Kernel k = multi_example();
        const Kernel lam = companion_kernel(k, grid);
        const auto op = ConvOperator::from_kernel(k, grid);
        std::vector<double> cells(grid.N);
        for (int i = 0; i < grid.N; ++i) cells[i] = lam.eval(grid.mid(i));
        const auto conv = op.conv(cells);
        for (double v : conv) CHECK(std::abs(v - 1.0) <= 1e-8);
    }

    SUBCASE("scaling: companion of c*k is companion(k)/c") {
        const TimeGrid grid(1.0, 64);
        const Kernel k = Kernel::standard(0.4);
        const Kernel a = companion_kernel(k, grid);
        const Kernel b = companion_kernel(k.scaled(2.5), grid);
        for (int i = 0; i < grid.N; ++i)
            CHECK(b.eval(grid.mid(i)) == doctest::Approx(a.eval(grid.mid(i)) / 2.5).epsilon(1e-12));
    }

    SUBCASE("bounded kernel raises the delta warning") {
        const TimeGrid grid(1.0, 32);
        std::string warning;
        const Kernel lam = companion_kernel(Kernel::standard(1.0), grid, &warning);
        CHECK(!warning.empty());
        (void)lam;
    }
}

TEST_CASE("monotonicity invariants of admissible kernels") {
    const std::vector<Kernel> kernels = {Kernel::standard(0.5), Kernel::standard(0.2),
                                         multi_example(), Kernel::exp_shifted(0.5, 3.0)};
    for (const Kernel& k : kernels) {
        double prev = k.eval(1.0 / 1024.0);
        CHECK(prev > 0.0);
        for (int j = 9; j >= -3; --j) { // t = 2^{-j} increasing
            const double t = std::ldexp(1.0, -j);
            const double v = k.eval(t);
            CHECK(v >= 0.0);
            CHECK(v <= prev * (1 + 1e-12));
            prev = v;
        }
        // antiderivative nondecreasing
        double aprev = 0.0;
        for (double t : {0.25, 0.5, 1.0, 2.0}) {
            const double a = k.antiderivative(t);
            CHECK(a >= aprev);
            aprev = a;
        }
    }
}

TEST_CASE("t*k(t) vanishes along t = 2^{-j}") {
    const std::vector<Kernel> kernels = {Kernel::standard(0.5), Kernel::standard(0.2),
                                         multi_example(), Kernel::exp_shifted(0.5, 1.0)};
    for (const Kernel& k : kernels) {
        double prev = 1e300;
        for (int j = 1; j <= 120; ++j) {
            const double t = std::ldexp(1.0, -j);
            const double tk = t * k.eval(t);
            CHECK(tk <= prev * (1 + 1e-12));
            prev = tk;
        }
        CHECK(prev < 1e-6);
    }
}

TEST_CASE("convexity consequence: -k'(t) >= (k(t) - k(2t))/t") {
    const std::vector<Kernel> kernels = {Kernel::standard(0.5), Kernel::standard(0.8),
                                         multi_example(), Kernel::exp_shifted(0.3, 2.0)};
    for (const Kernel& k : kernels)
        for (double t : {0.01, 0.1, 0.5, 1.0, 2.0}) {
            const double slope = (k.eval(t) - k.eval(2 * t)) / t;
            CHECK(-k.derivative(t) >= slope * (1 - 1e-12));
        }
}

TEST_CASE("s|k'(s)| accumulates to a finite integral") {
    // dyadic midpoint quadrature of int_0^1 s|k'(s)| ds; contributions must
    // decay geometrically, so the cumulative sum settles
    const std::vector<Kernel> kernels = {Kernel::standard(0.5), multi_example(),
                                         Kernel::exp_shifted(0.4, 1.0)};
    for (const Kernel& k : kernels) {
        double total = 0.0, last = 1e300;
        for (int j = 0; j < 200; ++j) {
            const double hi = std::ldexp(1.0, -j), lo = hi / 2;
            const double mid = 0.5 * (lo + hi);
            const double piece = (hi - lo) * mid * std::abs(k.derivative(mid));
            if (j >= 20) CHECK(piece <= last * (1 + 1e-12));
            last = piece;
            total += piece;
        }
        CHECK(std::isfinite(total));
        CHECK(total < 10.0);
    }
    // the g_{0.5} value is known: int_0^1 (1/2) s^{-1/2}/Gamma(1/2) ds = 1/sqrt(pi)
    double total = 0.0;
    const Kernel g = Kernel::standard(0.5);
    for (int j = 0; j < 400; ++j) {
        const double hi = std::ldexp(1.0, -j), lo = hi / 2;
        // exact cell integral of s|k'| = (1/2) s^{-1/2}/Gamma(1/2)
        total += (std::sqrt(hi) - std::sqrt(lo)) * inv_sqrt_pi;
    }
    CHECK(total == doctest::Approx(inv_sqrt_pi).epsilon(1e-12));
}

TEST_CASE("power_terms expose the parametric representation") {
    const auto pt = multi_example().power_terms();
    REQUIRE(pt.size() == 2);
    for (const auto& [w, beta] : pt) // order g_{1-alpha}: weight 1 -> g_{0.7}, weight 2 -> g_{0.3}
        CHECK(beta == doctest::Approx(w == doctest::Approx(1.0) ? 0.7 : 0.3));
    CHECK(Kernel::standard(0.5).power_terms().size() == 1);
    CHECK(Kernel::exp_shifted(0.5, 1.0).power_terms().empty());
}

TEST_CASE("completely monotone flags") {
    CHECK(Kernel::standard(0.5).completely_monotone());
    CHECK(multi_example().completely_monotone());
    CHECK(Kernel::exp_shifted(0.5, 2.0).completely_monotone());
    std::vector<double> ts{0.0, 0.5, 1.0}, vs{1.0, 0.6, 0.4};
    CHECK(!Kernel::tabulated_samples(ts, vs).completely_monotone());
}
