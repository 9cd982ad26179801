#include "doctest.h"

#include "schrolab/numbertheory.hpp"
#include "schrolab/parallel.hpp"

#include <bit>
#include <cmath>
#include <numbers>

using namespace schrolab::nt;
using schrolab::Rng;

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

cplx gauss_direct(i64 a, i64 b, i64 q)
{
    cplx acc = 0.0;
    for (i64 l = 1; l <= q; ++l) {
        const double ld = static_cast<double>(l);
        acc += std::polar(1.0, tau * (ld * b + ld * ld * a) / static_cast<double>(q));
    }
    return acc;
}

i64 totient_sieve(i64 q)
{
    i64 n = 0;
    for (i64 a = 1; a <= q; ++a) n += gcd(a, q) == 1;
    return n;
}

// Inclusion-exclusion over all subfamilies: exact for small families.
double union_by_inclusion_exclusion(const std::vector<std::vector<std::pair<double, double>>>& boxes)
{
    const std::size_t n = boxes.size();
    double total = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::pair<double, double>> inter = boxes[std::countr_zero(mask)];
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1u)) continue;
            for (std::size_t j = 0; j < inter.size(); ++j) {
                inter[j].first = std::max(inter[j].first, boxes[i][j].first);
                inter[j].second = std::min(inter[j].second, boxes[i][j].second);
            }
        }
        double vol = 1.0;
        for (const auto& [lo, hi] : inter) vol *= std::max(0.0, hi - lo);
        total += (std::popcount(mask) % 2 ? 1.0 : -1.0) * vol;
    }
    return total;
}

}  // namespace

TEST_CASE("gauss sum examples")
{
    const cplx g1 = gauss_sum({1, 0, 4});
    CHECK(g1.real() == doctest::Approx(2.0));
    CHECK(g1.imag() == doctest::Approx(2.0));
    CHECK(std::abs(g1) == doctest::Approx(std::sqrt(8.0)));
    const cplx g2 = gauss_sum({1, 2, 4});
    CHECK(g2.real() == doctest::Approx(2.0));
    CHECK(g2.imag() == doctest::Approx(-2.0));
    for (i64 a : {-5, 0, 3, 17})
        for (i64 b : {-2, 0, 9}) {
            const cplx g = gauss_sum({a, b, 1});
            CHECK(g.real() == doctest::Approx(1.0));
            CHECK(std::abs(g.imag()) < 1e-15);
        }
}

TEST_CASE("gauss sum agrees with the direct floating sum")
{
    for (i64 q = 1; q <= 40; ++q)
        for (i64 a = -3; a <= q; a += 2)
            for (i64 b = -1; b <= q; b += 3) CHECK(std::abs(gauss_sum({a, b, q}) - gauss_direct(a, b, q)) < 1e-10);
}

TEST_CASE("gauss modulus law and its hypotheses")
{
    CHECK(gauss_modulus_law({1, 0, 4}).status == LawStatus::pass);
    const auto q6 = gauss_modulus_law({1, 0, 6});
    CHECK(q6.status == LawStatus::precondition);
    CHECK(q6.reason.find("4") != std::string::npos);
    const auto a2 = gauss_modulus_law({2, 0, 4});
    CHECK(a2.status == LawStatus::precondition);
    CHECK(a2.reason.find("gcd") != std::string::npos);
    CHECK(gauss_modulus_law({1, 1, 4}).status == LawStatus::precondition);

    const auto sweep = gauss_law_sweep(256);
    CHECK(sweep.checked > 0);
    CHECK(sweep.failures == 0);
    CHECK(sweep.max_deviation <= 1e-9);
    CHECK(sweep.max_over_q <= 1.0);
}

TEST_CASE("gauss sum never exceeds q")
{
    for (i64 q = 1; q <= 64; ++q)
        for (i64 a = 0; a < q; ++a)
            for (i64 b = 0; b < q; ++b) CHECK(std::abs(gauss_sum({a, b, q})) <= static_cast<double>(q) + 1e-9);
}

TEST_CASE("weyl sum examples")
{
    CHECK(std::abs(weyl_sum({0.0, 0.0, 0, 37, 0, 1}) - cplx(37.0)) < 1e-12);
    CHECK(std::abs(weyl_sum({0.5, 0.0, 0, 4, 1, 2})) < 1e-12);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const i64 q = 1 + static_cast<i64>(rng.below(50));
        i64 a = static_cast<i64>(rng.below(static_cast<std::uint64_t>(q)));
        while (gcd(a, q) != 1) a = (a + 1) % q;
        const double alpha = static_cast<double>(a) / q + rng.uniform(-1.0, 1.0) / (q * q);
        const double beta = rng.uniform(-1, 1);
        const i64 M = static_cast<i64>(rng.below(200)) - 100;
        const i64 N = 1 + static_cast<i64>(rng.below(300));
        const cplx s = weyl_sum({alpha, beta, M, N, a, q});
        const cplx c = weyl_sum({-alpha, -beta, M, N, -a, q});
        CHECK(std::abs(c - std::conj(s)) < 1e-12 * N);
    }
    CHECK_THROWS_AS(weyl_sum({0.1, 0.0, 0, 4, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(weyl_sum({0.5, 0.0, 0, 4, 2, 4}), std::invalid_argument);
}

TEST_CASE("rational weyl sums match the floating path")
{
    for (i64 q : {3, 7, 16, 61})
        for (i64 a = 1; a < q; a += 2) {
            if (gcd(a, q) != 1) continue;
            for (auto [bn, bd] : {std::pair<i64, i64>{0, 1}, {1, 3}, {1, 2}})
                for (i64 M : {0, -50, 13}) {
                    const double alpha = static_cast<double>(a) / q, beta = static_cast<double>(bn) / bd;
                    const cplx f = weyl_sum({alpha, beta, M, 400, a, q});
                    // a/q is itself rounded, so the floating path drifts by ~eps * n^2 per term.
                    CHECK(std::abs(weyl_sum_rational(a, q, bn, bd, M, 400) - f) < 1e-8);
                }
        }
}

TEST_CASE("weyl bound right-hand side")
{
    CHECK(weyl_bound_rhs(7, 7).value == doctest::Approx((7.0 / std::sqrt(7.0) + std::sqrt(7.0)) * std::sqrt(std::log(7.0))));
    CHECK(weyl_bound_rhs(7, 7).value == doctest::Approx(7.38).epsilon(2e-3));
    CHECK(weyl_bound_rhs(1, 2).value == doctest::Approx(1.766).epsilon(1e-3));
    const auto t = weyl_bound_rhs(50, 1);
    CHECK(t.trivial);
    CHECK(t.value == 50.0);
    // N / sqrt(q) + sqrt(q) is minimized at q = N with value 2 sqrt(N).
    const i64 N = 400;
    double best = 1e300;
    i64 arg = 0;
    for (i64 q = 2; q <= 4 * N; ++q) {
        const double v = N / std::sqrt(double(q)) + std::sqrt(double(q));
        if (v < best) {
            best = v;
            arg = q;
        }
    }
    CHECK(arg == N);
    CHECK(best == doctest::Approx(2.0 * std::sqrt(double(N))));
}

TEST_CASE("weyl calibration shows no growth")
{
    const auto cal = weyl_calibrate(16, 64, 1024, 1);
    CHECK(cal.rho_small > 0.0);
    CHECK(cal.rho_large >= cal.rho_small);
    CHECK(cal.rho_large < 2.0 * cal.rho_small);
    // The recorded argmax reproduces the calibrated value.
    const double beta_den = cal.argmax_beta == 0.0 ? 1 : (cal.argmax_beta == 0.5 ? 2 : 3);
    const i64 bn = cal.argmax_beta == 0.0 ? 0 : 1;
    const cplx s = weyl_sum_rational(cal.argmax_a, cal.argmax_q, bn, static_cast<i64>(beta_den), cal.argmax_M,
                                     cal.argmax_N);
    CHECK(std::abs(s) / weyl_bound_rhs(cal.argmax_N, cal.argmax_q).value == doctest::Approx(cal.rho_large));
    // Worker count does not change the result.
    const auto cal4 = weyl_calibrate(16, 64, 1024, 4);
    CHECK(cal4.rho_large == cal.rho_large);
    CHECK(cal4.rho_small == cal.rho_small);
}

TEST_CASE("abel summation examples")
{
    const std::vector<cplx> ones(4, 1.0);
    const auto r = abel_sum_identity(ones, [](double u) { return cplx(u); }, 0);
    CHECK(r.lhs == cplx(6.0));
    CHECK(r.rhs == cplx(6.0));

    const std::vector<cplx> seq{{1.0, 2.0}, {-3.0, 0.5}, {0.25, 0.0}};
    const auto c = abel_sum_identity(seq, [](double) { return cplx(2.5, -1.0); }, 7);
    CHECK(std::abs(c.rhs - (seq[0] + seq[1] + seq[2]) * cplx(2.5, -1.0)) < 1e-15);

    const std::vector<cplx> one{{3.0, -1.0}};
    const auto s = abel_sum_identity(one, [](double u) { return cplx(u * u, 1.0); }, 5);
    CHECK(s.lhs == s.rhs);
    CHECK(s.lhs == cplx(3.0, -1.0) * cplx(25.0, 1.0));
}

TEST_CASE("abel identity on random polynomial instances")
{
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const i64 M = static_cast<i64>(rng.below(200)) - 100;
        const std::size_t N = rng.below(60);
        std::vector<cplx> a(N + 1);
        for (auto& v : a) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<cplx> coef(1 + rng.below(5));
        for (auto& v : coef) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto h = [&](double u) {
            cplx acc = 0.0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * u + *it;
            return acc;
        };
        const auto r = abel_sum_identity(a, h, M);
        double scale = 0.0;
        for (std::size_t k = 0; k <= N; ++k) scale += std::abs(a[k]) * std::abs(h(double(M + k)));
        CHECK(std::abs(r.lhs - r.rhs) <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("totient")
{
    CHECK(totient(1) == 1);
    CHECK(totient(12) == 4);
    CHECK(totient(35) == totient(5) * totient(7));
    CHECK(totient(35) == 24);
    for (i64 q = 1; q <= 500; ++q) CHECK(totient(q) == totient_sieve(q));
}

TEST_CASE("dirichlet simultaneous approximation")
{
    const std::vector<double> zero{0.0, 0.0};
    const auto z = dirichlet_simultaneous(zero, 10.0);
    CHECK(z.q == 1);
    CHECK(z.a == std::vector<i64>{0, 0});

    const std::vector<double> t38{tau * 3.0 / 8.0};
    const auto r = dirichlet_simultaneous(t38, 8.0);
    CHECK(r.q <= 8);
    CHECK(std::abs(t38[0] - tau * r.a[0] / r.q) <= tau / (r.q * 8.0) + 1e-12);
    // Exhaustive oracle: nothing smaller than the returned q works.
    for (i64 q = 1; q < r.q; ++q) {
        const i64 a = std::llround(t38[0] * q / tau);
        CHECK(std::abs(t38[0] - tau * a / q) > tau / (q * 8.0));
    }

    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        const std::vector<double> t{rng.uniform(0, tau), rng.uniform(0, tau)};
        const auto d = dirichlet_simultaneous(t, 64.0);
        CHECK(d.q >= 1);
        CHECK(d.q <= 64);
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(t[j] - tau * d.a[j] / d.q) <= tau / (d.q * 8.0) * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(dirichlet_simultaneous(zero, 0.5), std::invalid_argument);
}

TEST_CASE("dirichlet cells cover the torus")
{
    Rng rng(8);
    const double Q = 27.0;
    for (int i = 0; i < 10000; ++i) {
        const std::vector<double> t{rng.uniform(0, tau), rng.uniform(0, tau), rng.uniform(0, tau)};
        CHECK_NOTHROW(dirichlet_simultaneous(t, Q));
    }
}

TEST_CASE("vitali examples")
{
    CubeFamily one{{{{0.0, 0.0}, 1.0}}, 0.5};
    const auto r = vitali_scaled_union(one);
    CHECK(r.union_measure == doctest::Approx(1.0));
    CHECK(r.scaled_union_measure == doctest::Approx(0.25));
    CHECK(r.holds);
    CHECK(r.bound == doctest::Approx(0.25 / 9.0));

    CubeFamily disjoint{{{{0.0, 0.0}, 1.0}, {{5.0, 5.0}, 2.0}, {{-4.0, 2.0}, 0.5}}, 0.3};
    const auto d = vitali_scaled_union(disjoint);
    CHECK(d.union_measure == doctest::Approx(1.0 + 4.0 + 0.25));
    CHECK(d.scaled_union_measure == doctest::Approx(0.09 * d.union_measure));
    CHECK(d.scaled_union_measure == doctest::Approx(9.0 * d.bound));

    CHECK_THROWS_AS(vitali_scaled_union({{{{0.0}, 0.0}}, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(vitali_scaled_union({{{{0.0}, 1.0}}, 1.5}), std::invalid_argument);
}

TEST_CASE("union measure matches inclusion-exclusion")
{
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        const std::size_t k = 1 + rng.below(3);
        const std::size_t n = 1 + rng.below(8);
        std::vector<std::vector<std::pair<double, double>>> boxes;
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<std::pair<double, double>> box;
            for (std::size_t j = 0; j < k; ++j) {
                const double lo = rng.uniform(0, 3), w = rng.uniform(0.1, 2);
                box.push_back({lo, lo + w});
            }
            boxes.push_back(box);
        }
        CHECK(union_measure(boxes) == doctest::Approx(union_by_inclusion_exclusion(boxes)).epsilon(1e-10));
    }
}

TEST_CASE("vitali bound on random overlapping families")
{
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 1 + i % 3;
        CubeFamily fam;
        fam.c = rng.uniform(0.05, 0.95);
        const std::size_t n = 1 + rng.below(12);
        for (std::size_t b = 0; b < n; ++b) {
            Cube c;
            for (std::size_t j = 0; j < k; ++j) c.center.push_back(rng.uniform(0, 4));
            c.side = rng.uniform(0.1, 3);
            fam.cubes.push_back(c);
        }
        CHECK(vitali_scaled_union(fam).holds);
    }
}
