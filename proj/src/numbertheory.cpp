#include "schrolab/numbertheory.hpp"

#include "schrolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace schrolab::nt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

cplx unit_root(i64 r, i64 m)
{
    return std::polar(1.0, two_pi * static_cast<double>(r) / static_cast<double>(m));
}

}  // namespace

i64 gcd(i64 a, i64 b)
{
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) {
        const i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i64 mod(i64 x, i64 m)
{
    const i64 r = x % m;
    return r < 0 ? r + m : r;
}

cplx gauss_sum(const GaussSumParams& p)
{
    if (p.q < 1) throw std::invalid_argument("q: must be >= 1");
    std::vector<i64> count(static_cast<std::size_t>(p.q), 0);
    const i64 a = mod(p.a, p.q), b = mod(p.b, p.q);
    for (i64 l = 1; l <= p.q; ++l) {
        const i64 ll = mod(l, p.q);
        ++count[static_cast<std::size_t>(mod(b * ll + mod(a * ll, p.q) * ll, p.q))];
    }
    cplx acc = 0.0;
    for (i64 r = 0; r < p.q; ++r)
        if (count[r]) acc += static_cast<double>(count[r]) * unit_root(r, p.q);
    return acc;
}

GaussLawCheck gauss_modulus_law(const GaussSumParams& p, double tol)
{
    GaussLawCheck out;
    if (p.q < 1) out.reason = "q must be >= 1";
    else if (p.q % 4 != 0) out.reason = "q is not divisible by 4";
    else if (gcd(p.a, p.q) != 1) out.reason = "gcd(a, q) != 1";
    else if (mod(p.b, 2) != 0) out.reason = "b is odd";
    if (!out.reason.empty()) return out;
    out.modulus = std::abs(gauss_sum(p));
    out.expected = std::sqrt(2.0 * static_cast<double>(p.q));
    out.status = std::abs(out.modulus - out.expected) <= tol * std::sqrt(static_cast<double>(p.q)) ? LawStatus::pass
                                                                                                    : LawStatus::fail;
    return out;
}

GaussSweep gauss_law_sweep(i64 q_max, double tol)
{
    GaussSweep out;
    for (i64 q = 4; q <= q_max; q += 4) {
        for (i64 a = 1; a <= q; ++a) {
            if (gcd(a, q) != 1) continue;
            for (i64 b = 0; b < q; b += 2) {
                const auto chk = gauss_modulus_law({a, b, q}, tol);
                ++out.checked;
                if (chk.status != LawStatus::pass) ++out.failures;
                const double sq = std::sqrt(static_cast<double>(q));
                out.max_deviation = std::max(out.max_deviation, std::abs(chk.modulus - chk.expected) / sq);
                out.max_over_q = std::max(out.max_over_q, chk.modulus / static_cast<double>(q));
            }
        }
    }
    return out;
}

// -----------------------------------------------------------------------------

void WeylPhase::validate() const
{
    if (N < 1) throw std::invalid_argument("N: must be >= 1");
    if (q < 1) throw std::invalid_argument("q: must be >= 1");
    if (gcd(a, q) != 1) throw std::invalid_argument("a: must be coprime to q");
    const double qq = static_cast<double>(q);
    if (std::abs(alpha - static_cast<double>(a) / qq) > 1.0 / (qq * qq) * (1.0 + 1e-12))
        throw std::invalid_argument("alpha: must lie within 1/q^2 of a/q");
}

cplx weyl_sum(const WeylPhase& w)
{
    w.validate();
    cplx acc = 0.0;
    for (i64 n = w.M; n < w.M + w.N; ++n) {
        const double nd = static_cast<double>(n);
        // Reduce each product mod 1 before adding so large n keep their phase.
        const double a2 = w.alpha * nd * nd;
        const double b1 = w.beta * nd;
        const double frac = (a2 - std::floor(a2)) + (b1 - std::floor(b1));
        acc += std::polar(1.0, two_pi * frac);
    }
    return acc;
}

cplx weyl_sum_rational(i64 a, i64 q, i64 b, i64 c, i64 M, i64 N)
{
    if (q < 1 || c < 1) throw std::invalid_argument("weyl_sum_rational: denominators must be >= 1");
    const i64 m = q * c;
    std::vector<i64> count(static_cast<std::size_t>(m), 0);
    for (i64 n = M; n < M + N; ++n) {
        const i64 r = mod(n, m);
        ++count[static_cast<std::size_t>(mod(mod(a * c, m) * mod(r * r, m) + mod(b * q, m) * r, m))];
    }
    cplx acc = 0.0;
    for (i64 r = 0; r < m; ++r)
        if (count[r]) acc += static_cast<double>(count[r]) * unit_root(r, m);
    return acc;
}

WeylBound weyl_bound_rhs(i64 N, i64 q)
{
    if (N < 1) throw std::invalid_argument("N: must be >= 1");
    if (q < 1) throw std::invalid_argument("q: must be >= 1");
    if (q == 1) return {static_cast<double>(N), true};
    const double qq = static_cast<double>(q);
    return {(static_cast<double>(N) / std::sqrt(qq) + std::sqrt(qq)) * std::sqrt(std::log(qq)), false};
}

WeylCalibration weyl_calibrate(i64 q_max, i64 n_small, i64 n_large, unsigned workers)
{
    struct Job {
        i64 q, a;
    };
    std::vector<Job> jobs;
    for (i64 q = 2; q <= q_max; ++q)
        for (i64 a = 1; a <= q; ++a)
            if (gcd(a, q) == 1) jobs.push_back({q, a});

    const i64 betas[3][2] = {{0, 1}, {1, 3}, {1, 2}};
    struct Best {
        double small = 0.0, large = 0.0;
        i64 N = 0, M = 0;
        double beta = 0.0;
    };
    std::vector<Best> best(jobs.size());

    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const auto [q, a] = jobs[i];
        const i64 lo = -(n_large / 2);
        const i64 hi = n_large;  // prefix covers [lo, hi)
        std::vector<double> rhs(static_cast<std::size_t>(n_large + 1));
        for (i64 N = 1; N <= n_large; ++N) rhs[N] = weyl_bound_rhs(N, q).value;
        Best b;
        std::vector<cplx> prefix(static_cast<std::size_t>(hi - lo + 1));
        for (const auto& bt : betas) {
            const i64 bn = bt[0], bd = bt[1];
            const i64 m = q * bd;
            std::vector<cplx> roots(static_cast<std::size_t>(m));
            for (i64 r = 0; r < m; ++r) roots[r] = unit_root(r, m);
            const i64 ac = mod(a * bd, m), bq = mod(bn * q, m);
            prefix[0] = 0.0;
            for (i64 n = lo; n < hi; ++n) {
                const i64 r = mod(n, m);
                prefix[n - lo + 1] = prefix[n - lo] + roots[mod(ac * mod(r * r, m) + bq * r, m)];
            }
            for (i64 N = 1; N <= n_large; ++N) {
                for (i64 M : {i64{0}, -(N / 2)}) {
                    const double s = std::abs(prefix[M + N - lo] - prefix[M - lo]) / rhs[N];
                    if (N <= n_small) b.small = std::max(b.small, s);
                    if (s > b.large) {
                        b.large = s;
                        b.N = N;
                        b.M = M;
                        b.beta = static_cast<double>(bn) / bd;
                    }
                }
            }
        }
        best[i] = b;
    });

    WeylCalibration out;
    out.q_max = q_max;
    out.n_small = n_small;
    out.n_large = n_large;
    out.sums = static_cast<i64>(jobs.size()) * 3 * 2 * n_large;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        out.rho_small = std::max(out.rho_small, best[i].small);
        if (best[i].large > out.rho_large) {
            out.rho_large = best[i].large;
            out.argmax_q = jobs[i].q;
            out.argmax_a = jobs[i].a;
            out.argmax_N = best[i].N;
            out.argmax_M = best[i].M;
            out.argmax_beta = best[i].beta;
        }
    }
    return out;
}

// -----------------------------------------------------------------------------

AbelIdentity abel_sum_identity(std::span<const cplx> a, const std::function<cplx(double)>& h, i64 M)
{
    if (a.empty()) throw std::invalid_argument("abel_sum_identity: sequence is empty");
    const i64 N = static_cast<i64>(a.size()) - 1;
    AbelIdentity out;
    for (i64 k = 0; k <= N; ++k) out.lhs += a[k] * h(static_cast<double>(M + k));
    cplx A = 0.0;
    cplx integral = 0.0;
    for (i64 k = 0; k < N; ++k) {
        A += a[k];
        const double n = static_cast<double>(M + k);
        integral += A * (h(n + 1.0) - h(n));
    }
    A += a[N];
    out.rhs = A * h(static_cast<double>(M + N)) - integral;
    return out;
}

// -----------------------------------------------------------------------------

i64 totient(i64 q)
{
    if (q < 1) throw std::invalid_argument("q: must be >= 1");
    i64 result = q;
    i64 n = q;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        while (n % p == 0) n /= p;
        result -= result / p;
    }
    if (n > 1) result -= result / n;
    return result;
}

DirichletApprox dirichlet_simultaneous(std::span<const double> target, double Q)
{
    if (!(Q >= 1.0)) throw std::invalid_argument("Q: must be >= 1");
    if (target.empty()) throw std::invalid_argument("target: must have at least one component");
    const double n = static_cast<double>(target.size());
    const double root = std::pow(Q, 1.0 / n);
    const i64 q_hi = static_cast<i64>(std::floor(Q * (1.0 + 1e-15)));
    for (i64 q = 1; q <= q_hi; ++q) {
        const double qd = static_cast<double>(q);
        const double tol = two_pi / (qd * root) * (1.0 + 1e-12);
        DirichletApprox out{q, {}};
        bool ok = true;
        for (double x : target) {
            const i64 aj = static_cast<i64>(std::llround(x * qd / two_pi));
            if (std::abs(x - two_pi * static_cast<double>(aj) / qd) > tol) {
                ok = false;
                break;
            }
            out.a.push_back(aj);
        }
        if (ok) return out;
    }
    throw std::logic_error("dirichlet_simultaneous: no approximation found; Minkowski's theorem guarantees one");
}

// -----------------------------------------------------------------------------

namespace {

using Box = std::vector<std::pair<double, double>>;

double union_1d(std::vector<std::pair<double, double>> iv)
{
    std::sort(iv.begin(), iv.end());
    double total = 0.0, lo = 0.0, hi = 0.0;
    bool open = false;
    for (const auto& [a, b] : iv) {
        if (!(b > a)) continue;
        if (!open || a > hi) {
            if (open) total += hi - lo;
            lo = a;
            hi = b;
            open = true;
        } else {
            hi = std::max(hi, b);
        }
    }
    if (open) total += hi - lo;
    return total;
}

// Sweep along `axis`: between consecutive box boundaries the active set is
// fixed, and the slab contributes width * (measure of the active boxes in
// the remaining axes).
double sweep(const std::vector<const Box*>& boxes, std::size_t axis, std::size_t k)
{
    if (axis + 1 == k) {
        std::vector<std::pair<double, double>> iv;
        iv.reserve(boxes.size());
        for (const auto* b : boxes) iv.push_back((*b)[axis]);
        return union_1d(std::move(iv));
    }
    struct Event {
        double x;
        bool open;
        std::size_t id;
    };
    std::vector<Event> ev;
    ev.reserve(2 * boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto [lo, hi] = (*boxes[i])[axis];
        if (!(hi > lo)) continue;
        ev.push_back({lo, true, i});
        ev.push_back({hi, false, i});
    }
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
    std::vector<char> active(boxes.size(), 0);
    std::size_t n_active = 0;
    double total = 0.0;
    for (std::size_t e = 0; e < ev.size();) {
        const double x = ev[e].x;
        while (e < ev.size() && ev[e].x == x) {
            active[ev[e].id] = ev[e].open;
            n_active += ev[e].open ? 1 : std::size_t(-1);
            ++e;
        }
        if (e == ev.size() || n_active == 0) continue;
        std::vector<const Box*> slab;
        slab.reserve(n_active);
        for (std::size_t i = 0; i < boxes.size(); ++i)
            if (active[i]) slab.push_back(boxes[i]);
        total += (ev[e].x - x) * sweep(slab, axis + 1, k);
    }
    return total;
}

}  // namespace

double union_measure(const std::vector<std::vector<std::pair<double, double>>>& boxes)
{
    if (boxes.empty()) return 0.0;
    const std::size_t k = boxes.front().size();
    if (k == 0) throw std::invalid_argument("union_measure: boxes must have dimension >= 1");
    std::vector<const Box*> ptr;
    for (const auto& b : boxes) {
        if (b.size() != k) throw std::invalid_argument("union_measure: boxes differ in dimension");
        ptr.push_back(&b);
    }
    return sweep(ptr, 0, k);
}

VitaliCheck vitali_scaled_union(const CubeFamily& fam)
{
    if (!(fam.c > 0.0 && fam.c < 1.0)) throw std::invalid_argument("c: must lie in (0, 1)");
    if (fam.cubes.empty()) return {0.0, 0.0, 0.0, true};
    const std::size_t k = fam.cubes.front().center.size();
    if (k == 0) throw std::invalid_argument("cubes: dimension must be >= 1");
    std::vector<std::vector<std::pair<double, double>>> full, scaled;
    for (const auto& cube : fam.cubes) {
        if (!(cube.side > 0.0)) throw std::invalid_argument("cube side: must be positive");
        if (cube.center.size() != k) throw std::invalid_argument("cubes: centers differ in dimension");
        std::vector<std::pair<double, double>> f, s;
        for (double x : cube.center) {
            f.push_back({x - cube.side / 2.0, x + cube.side / 2.0});
            s.push_back({x - fam.c * cube.side / 2.0, x + fam.c * cube.side / 2.0});
        }
        full.push_back(std::move(f));
        scaled.push_back(std::move(s));
    }
    VitaliCheck out;
    out.union_measure = union_measure(full);
    out.scaled_union_measure = union_measure(scaled);
    const double kd = static_cast<double>(k);
    out.bound = std::pow(fam.c, kd) * std::pow(3.0, -kd) * out.union_measure;
    out.holds = out.scaled_union_measure >= out.bound * (1.0 - 1e-12);
    return out;
}

}  // namespace schrolab::nt
