#include "doctest.h"

#include "schrolab/parallel.hpp"
#include "schrolab/propagator.hpp"

#include <cmath>

using namespace schrolab;

TEST_CASE("free evolution at t = 0 and x = 0 recovers the integral of fhat")
{
    for (int d : {1, 2, 3}) {
        const auto f = SpectrumDescriptor::case1(d, 4.0);
        const cplx v = evaluate_free(f, {std::vector<double>(d, 0.0), 0.0});
        CHECK(v.real() == doctest::Approx(std::pow(two_pi, -d)).epsilon(1e-10));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("narrow plane-wave surrogate matches the single-frequency oracle")
{
    const std::vector<double> xi0{12.0, -5.0};
    const double width = 1e-3 * std::hypot(xi0[0], xi0[1]);
    const auto f = SpectrumDescriptor::plane_wave(xi0, width, 1.5);
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        const SpaceTimePoint p{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 0.05)};
        const double phase = p.x[0] * xi0[0] + p.x[1] * xi0[1] + p.t * 169.0;
        const cplx got = evaluate_free(f, p) * std::pow(two_pi, 2);
        const cplx want = 1.5 * std::polar(1.0, phase);
        CHECK(std::abs(std::arg(got / want)) < 1e-3);
        CHECK(std::abs(got) == doctest::Approx(1.5).epsilon(1e-3));

        const double gamma = 1.5;
        const double ratio = std::abs(evaluate_p_gamma(f, gamma, p)) / std::abs(evaluate_free(f, p));
        CHECK(ratio == doctest::Approx(std::exp(-std::pow(p.t, gamma) * 169.0)).epsilon(1e-3));
    }
}

TEST_CASE("evaluate_free is linear in the amplitude")
{
    const auto f1 = SpectrumDescriptor::plane_wave({3.0, 1.0}, 0.5, 1.0);
    const auto f3 = SpectrumDescriptor::plane_wave({3.0, 1.0}, 0.5, -2.5);
    const SpaceTimePoint p{{0.3, -0.7}, 0.2};
    const cplx a = evaluate_free(f1, p), b = evaluate_free(f3, p);
    CHECK(std::abs(b - (-2.5) * a) <= 1e-12 * std::abs(b));
}

TEST_CASE("P_gamma at t = 0 is the free evolution at t = 0")
{
    const auto f = SpectrumDescriptor::annulus(2, 4.0);
    const SpaceTimePoint p{{0.2, 0.1}, 0.0};
    CHECK(evaluate_p_gamma(f, 2.0, p) == evaluate_free(f, p));
    CHECK_THROWS_AS(evaluate_p_gamma(f, 0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_p_gamma(f, 1.0, {{0.0, 0.0}, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_p_gamma(f, 1.0, {{0.0}, 0.0}), std::invalid_argument);
}

TEST_CASE("uniform modulus bound by the L1 norm of fhat")
{
    const std::vector<SpectrumDescriptor> fs{SpectrumDescriptor::case1(2, 4.0), SpectrumDescriptor::annulus(2, 2.0),
                                             SpectrumDescriptor::modulated(SpectrumDescriptor::case1(2, 4.0),
                                                                           {2.0, 1.0}, 4.0)};
    Rng rng(11);
    for (const auto& f : fs) {
        const double bound = f.l1_norm() * std::pow(two_pi, -2);
        for (int i = 0; i < 1000 / static_cast<int>(fs.size()); ++i) {
            const SpaceTimePoint p{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 1)};
            const double gamma = rng.uniform(0.3, 3.0);
            CHECK(std::abs(evaluate_p_gamma(f, gamma, p)) <= bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("t -> 0 recovery")
{
    const auto f = SpectrumDescriptor::annulus(2, 8.0);
    const SpaceTimePoint p0{{0.3, -0.2}, 0.0};
    const cplx v0 = evaluate_free(f, p0);
    const double l1 = f.l1_norm() * std::pow(two_pi, -2);
    const double rmax = f.support().outer;
    double prev = 1e300;
    for (int k = 8; k <= 20; k += 4) {
        const double t = std::ldexp(1.0, -k);
        const double diff = std::abs(evaluate_p_gamma(f, 1.5, {p0.x, t}) - v0);
        // |e^{i t r^2 - t^g r^2} - 1| <= (t + t^g) r^2
        CHECK(diff <= l1 * rmax * rmax * (t + std::pow(t, 1.5)));
        CHECK(diff <= prev);
        prev = diff;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("dissipative tail bound")
{
    const auto f = SpectrumDescriptor::annulus(2, 1024.0);
    const auto chk = dissipative_tail_bound(f, 2.0, 0.1, 1024.0);
    CHECK(chk.bound == doctest::Approx(std::exp(-2.0) * 1024.0 * l2_norm(f)).epsilon(1e-12));
    CHECK(chk.bound / l2_norm(f) == doctest::Approx(138.58).epsilon(1e-3));
    CHECK(chk.holds);
    CHECK(chk.sampled_sup <= 10.0 * chk.bound);
    CHECK_THROWS_AS(dissipative_tail_bound(f, 0.0, 0.1, 1024.0), std::invalid_argument);
    CHECK_THROWS_AS(dissipative_tail_bound(f, -1.0, 0.1, 1024.0), std::invalid_argument);

    // The analytic bound decreases with R once e^{-R^eps} dominates.
    auto expr = [](double R) { return std::exp(-std::pow(R, 0.1)) * R; };
    for (double R = std::pow(2.0, 40); R < std::pow(2.0, 60); R *= 2.0) CHECK(expr(2.0 * R) < expr(R));
}

TEST_CASE("torus coefficients")
{
    const double R = 64.0, gamma = 2.0;
    const double t_hi = std::pow(R, -2.0 / gamma + 0.1);

    // l = 0, t -> 0: the integral of the radial bump, by a direct polar oracle.
    const RadialBump phi;
    double radial = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double r = phi.inner + (phi.outer - phi.inner) * (i + 0.5) / n;
        radial += phi.profile(r) * r;
    }
    radial *= two_pi * (phi.outer - phi.inner) / n;
    const auto c0 = torus_coefficient({0, 0}, 1e-12, R, gamma);
    CHECK(c0.value.real() == doctest::Approx(radial / (two_pi * two_pi)).epsilon(1e-6));

    for (std::vector<std::int64_t> l : {std::vector<std::int64_t>{3, -2}, {7, 1}, {0, 5}}) {
        const auto a = torus_coefficient(l, 0.5 * t_hi, R, gamma);
        const auto b = torus_coefficient({-l[0], -l[1]}, 0.5 * t_hi, R, gamma);
        CHECK(std::abs(b.value - std::conj(a.value)) <= 1e-12);
    }
    // Brute-force cube oracle for one l.
    {
        const std::vector<std::int64_t> l{3, -2};
        const double t = 0.5 * t_hi;
        const double a = std::pow(t, gamma) * R * R;
        const int m = 1200;
        const double h = 2.0 * pi / m;
        cplx acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double u = -pi + (i + 0.5) * h;
            for (int j = 0; j < m; ++j) {
                const double v = -pi + (j + 0.5) * h;
                const double r = std::hypot(u, v);
                acc += phi.profile(r) * std::exp(-a * r * r) * std::polar(1.0, -(u * l[0] + v * l[1]));
            }
        }
        acc *= h * h / (two_pi * two_pi);
        CHECK(std::abs(torus_coefficient(l, t, R, gamma).value - acc) < 1e-7);
    }
    CHECK_THROWS_AS(torus_coefficient({0, 0}, 2.0 * t_hi, R, gamma), std::invalid_argument);
    CHECK_THROWS_AS(torus_coefficient({0, 0}, 0.0, R, gamma), std::invalid_argument);
}

TEST_CASE("torus coefficient decay order")
{
    const double R = 64.0, gamma = 2.0;
    const double t_hi = std::pow(R, -2.0 / gamma + 0.1);
    CHECK(fit_coefficient_decay(1, 0.5 * t_hi, R, gamma, 64).slope <= -2.0);

    // Bound shape |C_l| <= K (1+|l|)^{-(d+1)}: K read off n <= 32 still
    // covers 32 < n <= 64.
    for (int d : {1, 2, 3}) {
        for (double t : {1e-4, 0.5 * t_hi, t_hi}) {
            double k_head = 0.0, k_tail = 0.0;
            for (int n = 1; n <= 64; ++n) {
                std::vector<std::int64_t> l(d, 0);
                l[0] = n;
                const double v = std::abs(torus_coefficient(l, t, R, gamma).value) * std::pow(1.0 + n, d + 1);
                (n <= 32 ? k_head : k_tail) = std::max(n <= 32 ? k_head : k_tail, v);
            }
            CHECK(k_tail <= 1.1 * k_head);
        }
    }
}

namespace {

SpaceTimePoint random_box_point(const CounterexampleParams& cp, Rng& rng, bool window)
{
    const double w = cp.k.c1 * std::pow(cp.R(), cp.gamma() / 2.0 - 1.0);
    SpaceTimePoint p;
    p.x.push_back(rng.uniform(-w, -w / 2.0));
    for (int j = 1; j < cp.d(); ++j) p.x.push_back(rng.uniform(-cp.k.c1, cp.k.c1));
    const double t0 = -p.x[0] / (2.0 * cp.r_half);
    const double win = cp.k.c2 * std::pow(cp.R(), -(cp.gamma() + 1.0) / 2.0);
    p.t = window ? t0 + rng.uniform(-win, win) : rng.uniform(0.0, 2.0 * t0);
    return p;
}

}  // namespace

TEST_CASE("factorized evaluation matches direct quadrature")
{
    for (double gamma : {1.5, 2.0}) {
        const auto cp = CounterexampleParams::make({2, gamma, 256.0, 0.0});
        const auto f = SpectrumDescriptor::case3(cp);
        Rng rng(5);
        for (int i = 0; i < 20; ++i) {
            const auto p = random_box_point(cp, rng, i % 2 == 0);
            const auto fe = factorized_evaluate(cp, p);
            CHECK(fe.ij.size() == 1);
            CHECK(fe.product_modulus == doctest::Approx(std::abs(fe.i1) * std::abs(fe.ij[0])).epsilon(1e-15));
            const double direct = std::pow(two_pi, 2) * std::abs(evaluate_p_gamma(f, gamma, p));
            CHECK(std::abs(fe.product_modulus - direct) <= 1e-4 * direct);
        }
    }
    const auto cp3 = CounterexampleParams::make({3, 2.0, 4096.0, 0.0});
    Rng rng(9);
    const auto p3 = random_box_point(cp3, rng, true);
    const auto fe3 = factorized_evaluate(cp3, p3);
    CHECK(fe3.ij.size() == 2);
    const double direct3 = std::pow(two_pi, 3) * std::abs(evaluate_p_gamma(SpectrumDescriptor::case3(cp3), 2.0, p3));
    CHECK(std::abs(fe3.product_modulus - direct3) <= 1e-4 * direct3);
}

TEST_CASE("factorized evaluation rejects points outside the box")
{
    const auto cp = CounterexampleParams::make({2, 2.0, 256.0, 0.0});
    CHECK_THROWS_AS(factorized_evaluate(cp, {{0.5, 0.0}, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(factorized_evaluate(cp, {{-0.01, 0.5}, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(factorized_evaluate(cp, {{-0.01}, 0.0}), std::invalid_argument);
}

TEST_CASE("first factor stays large in the time window")
{
    for (int k : {8, 12, 16, 20}) {
        const auto cp = CounterexampleParams::make({2, 2.0, std::pow(2.0, k), 0.0});
        Rng rng(k);
        for (int i = 0; i < 50; ++i) {
            const auto p = random_box_point(cp, rng, true);
            CHECK(std::abs(factorized_evaluate(cp, p).i1) > 1.0 - cp.k.c0);
        }
    }
}

TEST_CASE("Abel split: residual below the E_j(1) bound")
{
    for (double gamma : {1.5, 2.0}) {
        const auto cp = CounterexampleParams::make({2, gamma, 256.0, 0.0});
        Rng rng(21);
        for (int i = 0; i < 20; ++i) {
            const auto p = random_box_point(cp, rng, i % 2 == 0);
            const auto split = abel_main_plus_error(cp, p, 1);
            const auto fe = factorized_evaluate(cp, p);
            CHECK(std::abs(split.direct - fe.ij[0]) <= 1e-12 * std::abs(fe.ij[0]) + 1e-14);
            CHECK(split.residual == doctest::Approx(std::abs(fe.ij[0] - split.main)).epsilon(1e-9));
            CHECK(split.residual <= split.e1_bound);
        }
    }
}

TEST_CASE("Abel split at t = 0 has a zero error bound")
{
    const auto cp = CounterexampleParams::make({2, 2.0, 256.0, 0.0});
    const auto split = abel_main_plus_error(cp, {{-0.01, 0.003}, 0.0}, 1);
    CHECK(split.e1_bound == 0.0);
    CHECK(split.residual <= 1e-12 * std::abs(split.direct));
    CHECK_THROWS_AS(abel_main_plus_error(cp, {{-0.01, 0.0}, 0.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(abel_main_plus_error(cp, {{-0.01, 0.0}, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("Abel error bound: which summand leads at the selected time")
{
    // With |x1| = (3/4) c1 R^{g/2-1} and t = |x1| / (2 R^{g/2}):
    // R^{g/2} t = (3/8) c1 R^{g/2-1} and (tR)^g = ((3/8) c1)^g.  The second
    // summand is R-independent, so for gamma < 2 it takes over once
    // R^{1-g/2} > ((3/8) c1)^{1-g}; at gamma = 2 the first always leads.
    for (double gamma : {1.5, 1.8, 2.0}) {
        for (int k : {16, 24, 40}) {
            const double R = std::pow(2.0, k);
            const auto cp = CounterexampleParams::make({2, gamma, R, 0.0});
            const double x1 = -0.75 * cp.k.c1 * std::pow(R, gamma / 2.0 - 1.0);
            const double t = -x1 / (2.0 * cp.r_half);
            const double first = cp.r_half * t, second = std::pow(t * R, gamma);
            const double a = 0.375 * cp.k.c1;
            CHECK(second / first == doctest::Approx(std::pow(a, gamma - 1.0) * std::pow(R, 1.0 - gamma / 2.0)));
            const bool second_leads = gamma < 2.0 && std::pow(R, 1.0 - gamma / 2.0) > std::pow(a, 1.0 - gamma);
            CHECK((second > first) == second_leads);
        }
    }
    const auto cp = CounterexampleParams::make({2, 1.5, std::pow(2.0, 24), 0.0});
    const double x1 = -0.75 * cp.k.c1 * std::pow(cp.R(), -0.25);
    const double t = -x1 / (2.0 * cp.r_half);
    CHECK(std::pow(t * cp.R(), 1.5) > cp.r_half * t);
}
