#include "doctest.h"

#include "schrolab/maximal.hpp"
#include "schrolab/propagator.hpp"

#include <cmath>

using namespace schrolab;

TEST_CASE("hybrid time grid layout")
{
    const double R = 64.0;
    const auto g = TimeGrid::hybrid(R);
    CHECK(g.geometric == 64);
    CHECK(g.t[63] == doctest::Approx(1.0 / (R * R)));
    CHECK(g.spacing == doctest::Approx(0.25 / (R * R)));
    CHECK(g.uniform == 16380);
    CHECK(g.tail == 0);
    CHECK(g.t_max() == doctest::Approx(1.0));

    const auto capped = TimeGrid::hybrid(2 * R);
    CHECK(capped.uniform == 1u << 14);
    CHECK(capped.tail == 64);
    CHECK(capped.t_max() == 1.0);
    CHECK(capped.count() == 64 + (1u << 14) + 64);

    const auto small = TimeGrid::hybrid(4.0);
    CHECK(small.tail == 0);
    CHECK(small.t_max() <= 1.0);

    const auto r = g.refined();
    CHECK(r.geometric == 128);
    CHECK(r.spacing == doctest::Approx(g.spacing / 2));

    CHECK_THROWS_AS(TimeGrid::uniform_grid(0.5, 0.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::single(2.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::hybrid(0.5), std::invalid_argument);
}

TEST_CASE("plane-wave supremum is the t -> 0 value")
{
    const std::vector<double> xi0{6.0, -3.0};
    const auto f = SpectrumDescriptor::plane_wave(xi0, 0.05);
    const std::vector<double> x{0.2, 0.4};
    for (double gamma : {0.5, 1.0, 2.0}) {
        const double s = sup_over_time(f, gamma, x, TimeGrid::uniform_grid(0.0, 1.0, 101));
        const double at0 = std::abs(evaluate_p_gamma(f, gamma, {x, 0.0}));
        CHECK(s == doctest::Approx(at0).epsilon(1e-9));
    }
}

TEST_CASE("single-point time grid returns the sample")
{
    const auto f = SpectrumDescriptor::case1(2, 8.0);
    const std::vector<double> x{0.05, -0.1};
    const double t = 3e-3;
    const double s = sup_over_time(f, 2.0, x, TimeGrid::single(t));
    CHECK(s == doctest::Approx(std::abs(evaluate_p_gamma(f, 2.0, {x, t}))).epsilon(1e-9));
}

TEST_CASE("sup over time matches a direct evaluation scan")
{
    const double R = 8.0;
    const auto f = SpectrumDescriptor::annulus(2, R);
    const std::vector<double> x{0.3, -0.2};
    const auto tg = TimeGrid::uniform_grid(1e-4, 0.05, 60);
    double direct = 0.0;
    for (double t : tg.t) direct = std::max(direct, std::abs(evaluate_p_gamma(f, 2.0, {x, t})));
    const double s = sup_over_time(f, 2.0, x, tg);
    CHECK(s >= direct * (1 - 1e-9));
    CHECK(s <= direct * 1.05);
}

TEST_CASE("doubling the time grid barely moves the supremum at R = 64")
{
    const double R = 64.0;
    const auto f = SpectrumDescriptor::case1(2, R);
    const auto tg = TimeGrid::hybrid(R);
    for (const std::vector<double>& x : {std::vector<double>{0.0, 0.0}, std::vector<double>{0.01, -0.02}}) {
        const double a = sup_over_time(f, 2.0, x, tg);
        const double b = sup_over_time(f, 2.0, x, tg.refined());
        CHECK(std::abs(a - b) <= 1e-3 * b);
    }
}

TEST_CASE("ball norm oracles")
{
    const SpaceGrid g{1.0, 128};
    std::vector<double> one(128 * 128, 1.0);
    CHECK(l2_ball_norm(one, g, 2) == doctest::Approx(std::sqrt(pi)).epsilon(1e-2));

    std::vector<double> v(one.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * i);
    const double n = l2_ball_norm(v, g, 2);
    auto w = v;
    for (auto& e : w) e *= -2.5;
    CHECK(std::abs(l2_ball_norm(w, g, 2) - 2.5 * n) <= 1e-12 * n);

    // Row-major with the last axis fastest: first half of the rows is x1 < 0.
    std::vector<double> half(one.size(), 0.0);
    for (std::size_t i = 0; i < half.size() / 2; ++i) half[i] = 1.0;
    CHECK(l2_ball_norm(half, g, 2) == doctest::Approx(std::sqrt(pi / 2)).epsilon(1e-2));

    const SpaceGrid g3{1.0, 40};
    std::vector<double> one3(40 * 40 * 40, 1.0);
    CHECK(l2_ball_norm(one3, g3, 3) == doctest::Approx(std::sqrt(4 * pi / 3)).epsilon(1e-2));

    one.pop_back();
    CHECK_THROWS_AS(l2_ball_norm(one, g, 2), std::invalid_argument);
}

TEST_CASE("maximal ratio matches per-point suprema on a coarse grid")
{
    const double R = 8.0;
    const auto f = SpectrumDescriptor::case1(2, R);
    const auto tg = TimeGrid::hybrid(R);
    const SpaceGrid sg{1.0, 8};
    const auto m = maximal_ratio(f, 2.0, tg, sg);
    const auto axis = sg.axis();
    std::vector<double> sup;
    for (double a : axis)
        for (double b : axis) sup.push_back(sup_over_time(f, 2.0, {a, b}, tg));
    const double want = l2_ball_norm(sup, sg, 2) / l2_norm(f);
    CHECK(m.ratio == doctest::Approx(want).epsilon(1e-6));
    CHECK(m.f_norm == doctest::Approx(l2_norm(f)));
}

TEST_CASE("non-separable profiles take the generic path")
{
    const double R = 4.0;
    const auto f = SpectrumDescriptor::annulus(2, R);
    REQUIRE_FALSE(f.separable());
    const auto tg = TimeGrid::uniform_grid(1e-3, 0.2, 12);
    const SpaceGrid sg{1.0, 4};
    const auto m = maximal_ratio(f, 2.0, tg, sg, {5, 1e-6, 1});
    CHECK(m.ratio > 0.0);
    CHECK(m.times_used == tg.count());
}

TEST_CASE("heavy dissipation keeps the ratio bounded")
{
    std::vector<ScalingEntry> entries;
    for (double R : {4.0, 8.0, 16.0, 32.0}) {
        const auto m = maximal_ratio(SpectrumDescriptor::case1(2, R), 0.5, TimeGrid::hybrid(R), {1.0, 64});
        CHECK(m.ratio < 2.0);
        entries.push_back({R, m.ratio, 0, 0, 64, 0.0});
    }
    const auto rep = make_scaling_report(entries, theoretical_exponent(2, 0.5), FamilyKind::upper);
    CHECK(rep.fitted_slope <= 0.05);
    CHECK(rep.verdict);
}

TEST_CASE("modulation translates the field")
{
    const double R = 8.0;
    const auto f = SpectrumDescriptor::case1(2, R);
    const std::vector<double> l{0.2, -0.1};
    const auto g = SpectrumDescriptor::modulated(f, l, R);
    const auto tg = TimeGrid::hybrid(R, 16, 1.0, 1 << 10, 16);
    for (const std::vector<double>& x : {std::vector<double>{0.0, 0.0}, std::vector<double>{0.3, -0.6}}) {
        const std::vector<double> moved{x[0] + l[0] / R, x[1] + l[1] / R};
        CHECK(sup_over_time(g, 2.0, x, tg) == doctest::Approx(sup_over_time(f, 2.0, moved, tg)).epsilon(1e-9));
    }
    const SpaceGrid sg{1.0, 64};
    const double a = maximal_ratio(f, 2.0, tg, sg).ratio;
    const double b = maximal_ratio(g, 2.0, tg, sg).ratio;
    CHECK(std::abs(a - b) <= 1e-3 * a);
}

TEST_CASE("zero profile is rejected")
{
    const auto f = SpectrumDescriptor::plane_wave({3.0, 0.0}, 0.1, 0.0);
    CHECK_THROWS_AS(maximal_ratio(f, 2.0, TimeGrid::single(0.1), {1.0, 4}), std::invalid_argument);
}

TEST_CASE("grid convergence at R = 64")
{
    const double R = 64.0;
    const auto f = SpectrumDescriptor::case1(2, R);
    const auto tg = TimeGrid::hybrid(R);
    const SpaceGrid sg{1.0, 64};
    const double a = maximal_ratio(f, 0.5, tg, sg).ratio;
    const double b = maximal_ratio(f, 0.5, tg.refined(), sg.refined()).ratio;
    CHECK(std::abs(a - b) < 0.01 * b);
}

TEST_CASE("theoretical exponent")
{
    CHECK(theoretical_exponent(2, 2.0) == doctest::Approx(1.0 / 3));
    CHECK(theoretical_exponent(2, 1.0) == 0.0);
    CHECK(theoretical_exponent(2, 0.5) == 0.0);
    CHECK(theoretical_exponent(3, 3.0) == doctest::Approx(3.0 / 8));
    for (int d : {1, 2, 3, 4}) {
        double prev = -1.0;
        for (double g = 0.25; g < 8.0; g += 0.25) {
            const double e = theoretical_exponent(d, g);
            CHECK(e >= prev);
            prev = e;
            if (g >= 2.0) CHECK(e == doctest::Approx(d / (2.0 * (d + 1))));
        }
    }
    CHECK_THROWS_AS(theoretical_exponent(0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(theoretical_exponent(2, 0.0), std::invalid_argument);
}

TEST_CASE("lemma bound branches")
{
    for (int d : {1, 2, 3})
        for (double R : {4.0, 64.0, 1024.0}) {
            const double eps = 0.01;
            const double lo = lemma1_bound(R, 1.0 / R, eps, d) - 1.0;
            const double hi = lemma1_bound(R, std::nextafter(1.0 / R, 1.0), eps, d);
            CHECK(lo == doctest::Approx(hi).epsilon(1e-12));
        }
    CHECK(lemma1_bound(64.0, 1e-300, 0.0, 2) == doctest::Approx(1.0));
    CHECK(lemma1_bound(64.0, 1.0, 0.0, 2) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(lemma1_bound(0.5, 0.1, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(lemma1_bound(4.0, 0.0, 0.0, 2), std::invalid_argument);
}

TEST_CASE("scaling report on constant ratios")
{
    std::vector<ScalingEntry> entries;
    for (double R : {128.0, 16.0, 64.0, 32.0}) entries.push_back({R, 1.7, 0, 0, 0, 0.0});
    const auto rep = make_scaling_report(entries, 0.0, FamilyKind::upper);
    CHECK(std::abs(rep.fitted_slope) <= 1e-6);
    CHECK(rep.entries.front().R == 16.0);
    CHECK(rep.verdict);
    const auto run = rep.running_slopes();
    CHECK(std::isnan(run[0]));
    CHECK(std::abs(run[3]) <= 1e-6);

    std::vector<ScalingEntry> grow;
    for (double R : {16.0, 32.0, 64.0, 128.0}) grow.push_back({R, std::pow(R, 0.3), 0, 0, 0, 0.0});
    const auto ext = make_scaling_report(grow, 1.0 / 3, FamilyKind::extremal);
    CHECK(ext.fitted_slope == doctest::Approx(0.3));
    CHECK(ext.verdict);
    CHECK_FALSE(make_scaling_report(grow, 0.0, FamilyKind::upper).verdict);
    grow.pop_back();
    CHECK_THROWS_AS(make_scaling_report(grow, 0.0, FamilyKind::upper), std::invalid_argument);
}

TEST_CASE("sweep is reproducible and keeps partial results")
{
    SweepOptions opt;
    opt.space_count = 12;
    opt.cap = 256;
    auto family = [](double R) { return SpectrumDescriptor::case1(2, R); };
    const std::vector<double> ladder{4.0, 8.0, 16.0, 32.0};
    const auto a = exponent_sweep(family, 0.5, 2, ladder, FamilyKind::upper, opt);
    const auto b = exponent_sweep(family, 0.5, 2, ladder, FamilyKind::upper, opt);
    REQUIRE(a.entries.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.entries[i].ratio == b.entries[i].ratio);
    CHECK(a.fitted_slope == b.fitted_slope);
    CHECK(a.target == 0.0);

    auto failing = [](double R) {
        if (R > 10.0) throw std::runtime_error("boom");
        return SpectrumDescriptor::case1(2, R);
    };
    try {
        exponent_sweep(failing, 0.5, 2, ladder, FamilyKind::upper, opt);
        FAIL("expected SweepError");
    } catch (const SweepError& e) {
        CHECK(e.partial().entries.size() == 2);
        CHECK(e.partial().entries[1].ratio == a.entries[1].ratio);
    }
    CHECK_THROWS_AS(exponent_sweep(family, 0.5, 2, {4.0, 8.0, 16.0}, FamilyKind::upper, opt), std::invalid_argument);
}

TEST_CASE("case 3 ratios as a scaling report")
{
    LowerBoundResult r;
    r.target_ratio_slope = 1.0 / 3;
    for (double R : {1 << 16, 1 << 18, 1 << 20, 1 << 22}) {
        LowerBoundRecord rec;
        rec.R = R;
        rec.ratio_estimate = std::pow(R, 0.3);
        r.records.push_back(rec);
    }
    LowerBoundRecord bad;
    bad.R = 1 << 24;
    bad.aborted = true;
    r.records.push_back(bad);
    const auto rep = case3_scaling_report(r, 2);
    CHECK(rep.entries.size() == 4);
    CHECK(rep.kind == FamilyKind::extremal);
    CHECK(rep.fitted_slope == doctest::Approx(0.3));
    CHECK(rep.verdict);
}
