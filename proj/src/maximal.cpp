#include "schrolab/maximal.hpp"

#include "schrolab/parallel.hpp"
#include "schrolab/propagator.hpp"
#include "schrolab/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace schrolab {

namespace {

const cplx I{0.0, 1.0};

// e^{-t^g xi^2} is below 1e-16 beyond this frequency.
double dissipation_cutoff(double tg)
{
    return tg > 0.0 ? std::sqrt(16.0 * std::log(10.0) / tg) : std::numeric_limits<double>::infinity();
}

// Largest |l_j| / R accumulated through nested modulations.
std::vector<double> modulation_shift(const SpectrumDescriptor& f)
{
    std::vector<double> shift(static_cast<std::size_t>(f.dimension()), 0.0);
    const SpectrumDescriptor* base = &f;
    while (const auto* m = std::get_if<ModulatedSpec>(&base->params())) {
        for (std::size_t j = 0; j < shift.size(); ++j) shift[j] += std::abs(m->l[j]) / m->R;
        base = m->base.get();
    }
    return shift;
}

// One axis of a separable profile at a fixed time: nodes xi_k and
// k_k = w_k factor(xi_k) e^{i t xi_k^2 - t^g xi_k^2}, clipped to the
// frequencies dissipation has not removed.
struct AxisKernel {
    std::vector<double> xi;
    std::vector<cplx> k;
    double abs_sum = 0.0;  // sum |k|, the axis majorant
};

struct AxisNodes {
    std::vector<double> xi;
    std::vector<cplx> wf;  // weight * factor
};

// Clipped at t_clip, resolved for phases up to time t.
AxisNodes axis_nodes(const SpectrumDescriptor& f, int axis, double t, double gamma, double xmax, double t_clip)
{
    const double cut = dissipation_cutoff(t_clip > 0.0 ? std::pow(t_clip, gamma) : 0.0);
    AxisNodes out;
    const auto cells = f.axis_cells();
    for (const auto& cell : cells[static_cast<std::size_t>(axis)]) {
        const double lo = std::max(cell.lo, -cut), hi = std::min(cell.hi, cut);
        if (!(hi > lo)) continue;
        const double xi_max = std::max(std::abs(lo), std::abs(hi));
        const double rate = xmax + 2.0 * t * xi_max;
        const int panels = std::max(8, static_cast<int>(std::ceil((hi - lo) * 4.0 * rate / (20.0 * pi))));
        const auto n = quad::composite_nodes({lo, hi}, panels);
        for (std::size_t k = 0; k < n.x.size(); ++k) {
            const cplx v = n.w[k] * f.axis_factor(axis, n.x[k]);
            if (v == cplx{0.0}) continue;
            out.xi.push_back(n.x[k]);
            out.wf.push_back(v);
        }
    }
    return out;
}

AxisKernel axis_kernel(const SpectrumDescriptor& f, int axis, double t, double gamma, double xmax)
{
    const double tg = t > 0.0 ? std::pow(t, gamma) : 0.0;
    auto n = axis_nodes(f, axis, t, gamma, xmax, t);
    AxisKernel out;
    out.xi = std::move(n.xi);
    out.k.resize(out.xi.size());
    for (std::size_t k = 0; k < out.xi.size(); ++k) {
        const double x2 = out.xi[k] * out.xi[k];
        out.k[k] = n.wf[k] * std::exp(cplx{-tg * x2, t * x2});
        out.abs_sum += std::abs(out.k[k]);
    }
    return out;
}

// |sum_k k_k e^{i x_i xi_k}| on the uniform points x_i = x0 + i dx.
void axis_moduli(const AxisKernel& ker, double x0, double dx, std::size_t count, std::vector<double>& out)
{
    std::vector<cplx> acc(count, cplx{0.0});
    for (std::size_t k = 0; k < ker.xi.size(); ++k) {
        cplx e = ker.k[k] * std::polar(1.0, x0 * ker.xi[k]);
        const cplx step = std::polar(1.0, dx * ker.xi[k]);
        for (std::size_t i = 0; i < count; ++i) {
            acc[i] += e;
            e *= step;
        }
    }
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::abs(acc[i]);
}

// |P_gamma f(x, t)| without the (2 pi)^{-d} factor.
double point_modulus(const SpectrumDescriptor& f, double gamma, const std::vector<double>& x, double t,
                     const std::vector<double>& shift)
{
    if (!f.separable()) return std::abs(evaluate_p_gamma(f, gamma, {x, t})) * std::pow(two_pi, f.dimension());
    double prod = 1.0;
    for (int j = 0; j < f.dimension(); ++j) {
        const auto ker = axis_kernel(f, j, t, gamma, std::abs(x[j]) + shift[j]);
        cplx acc = 0.0;
        for (std::size_t k = 0; k < ker.xi.size(); ++k) acc += ker.k[k] * std::polar(1.0, x[j] * ker.xi[k]);
        prod *= std::abs(acc);
    }
    return prod;
}

template <class F>
double golden_max(F&& phi, double a, double b, int iterations, double best)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = phi(c), fd = phi(d);
    best = std::max({best, fc, fd});
    for (int i = 0; i < iterations; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
            best = std::max(best, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
            best = std::max(best, fd);
        }
    }
    return best;
}

std::pair<double, double> bracket(const TimeGrid& tg, std::size_t k)
{
    const double a = k == 0 ? 0.0 : tg.t[k - 1];
    const double b = k + 1 < tg.t.size() ? tg.t[k + 1] : tg.t[k];
    return {a, b};
}

}  // namespace

// -----------------------------------------------------------------------------

TimeGrid TimeGrid::hybrid(double R, std::size_t geometric, double spacing_factor, std::size_t cap, std::size_t tail)
{
    if (!(R >= 1.0)) throw std::invalid_argument("R: must be >= 1");
    if (geometric == 0 || !(spacing_factor > 0.0)) throw std::invalid_argument("TimeGrid: empty geometric part or spacing");
    TimeGrid g;
    g.kind = Kind::hybrid;
    g.R = R;
    g.spacing_factor = spacing_factor;
    g.cap = cap;
    const double h = std::min(1.0, 1.0 / (R * R));
    // Geometric part: h 2^{-20} ... h.
    for (std::size_t i = 0; i < geometric; ++i) {
        const double e = geometric == 1 ? 0.0 : -20.0 * static_cast<double>(geometric - 1 - i) / (geometric - 1);
        g.t.push_back(h * std::exp2(e));
    }
    g.geometric = geometric;
    g.spacing = spacing_factor * h;
    for (std::size_t k = 1; k <= cap; ++k) {
        const double t = h + static_cast<double>(k) * g.spacing;
        if (t > 1.0) break;
        g.t.push_back(t);
        ++g.uniform;
    }
    const double last = g.t.back();
    if (last < 1.0 && tail > 0) {
        for (std::size_t i = 1; i <= tail; ++i) g.t.push_back(last * std::pow(1.0 / last, static_cast<double>(i) / tail));
        g.t.back() = 1.0;
        g.tail = tail;
    }
    g.validate();
    return g;
}

TimeGrid TimeGrid::uniform_grid(double t_min, double t_max, std::size_t count)
{
    if (count == 0) throw std::invalid_argument("TimeGrid: count must be positive");
    TimeGrid g;
    g.kind = Kind::uniform;
    g.uniform = count;
    g.spacing = count > 1 ? (t_max - t_min) / (count - 1) : 0.0;
    for (std::size_t i = 0; i < count; ++i) g.t.push_back(count > 1 ? t_min + i * g.spacing : t_min);
    g.validate();
    return g;
}

TimeGrid TimeGrid::single(double t)
{
    TimeGrid g;
    g.kind = Kind::single;
    g.t = {t};
    g.uniform = 1;
    g.validate();
    return g;
}

TimeGrid TimeGrid::refined() const
{
    switch (kind) {
    case Kind::hybrid: return hybrid(R, 2 * geometric, spacing_factor / 2.0, 2 * cap, 2 * tail);
    case Kind::uniform: return uniform_grid(t.front(), t.back(), 2 * t.size() - 1);
    case Kind::single: return *this;
    }
    return *this;
}

void TimeGrid::validate() const
{
    if (t.empty()) throw std::invalid_argument("TimeGrid: no points");
    if (!(t.front() >= 0.0) || !(t.back() <= 1.0)) throw std::invalid_argument("TimeGrid: points must lie in [0, 1]");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("TimeGrid: points must be strictly increasing");
}

std::vector<double> SpaceGrid::axis() const
{
    std::vector<double> a(static_cast<std::size_t>(count));
    const double h = spacing();
    for (int i = 0; i < count; ++i) a[static_cast<std::size_t>(i)] = -radius + (i + 0.5) * h;
    return a;
}

void SpaceGrid::validate() const
{
    if (!(radius > 0.0)) throw std::invalid_argument("SpaceGrid: radius must be positive");
    if (count < 1) throw std::invalid_argument("SpaceGrid: count must be positive");
}

// -----------------------------------------------------------------------------

double sup_over_time(const SpectrumDescriptor& f, double gamma, const std::vector<double>& x, const TimeGrid& tg,
                     const SupOptions& opt)
{
    tg.validate();
    if (static_cast<int>(x.size()) != f.dimension()) throw std::invalid_argument("x: dimension does not match f");
    const auto shift = modulation_shift(f);
    auto phi = [&](double t) { return point_modulus(f, gamma, x, t, shift); };
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < tg.t.size(); ++k) {
        const double v = phi(tg.t[k]);
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    if (tg.t.size() > 1) {
        const auto [a, b] = bracket(tg, arg);
        best = golden_max(phi, a, b, opt.golden_iterations, best);
    }
    return best * std::pow(two_pi, -f.dimension());
}

double l2_ball_norm(const std::vector<double>& values, const SpaceGrid& g, int d)
{
    g.validate();
    const std::size_t n = static_cast<std::size_t>(g.count);
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= n;
    if (values.size() != total) throw std::invalid_argument("l2_ball_norm: field is incomplete");
    const auto axis = g.axis();
    const double r2 = g.radius * g.radius;
    double acc = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t p = 0; p < total; ++p) {
        double q = 0.0;
        for (int j = 0; j < d; ++j) q += axis[idx[j]] * axis[idx[j]];
        if (q <= r2) acc += values[p] * values[p];
        for (int j = d - 1; j >= 0 && ++idx[j] == n; --j) idx[j] = 0;
    }
    return std::sqrt(acc * std::pow(g.spacing(), d));
}

MaximalResult maximal_ratio(const SpectrumDescriptor& f, double gamma, const TimeGrid& tg, const SpaceGrid& sg,
                            const MaximalOptions& opt)
{
    tg.validate();
    sg.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    MaximalResult out;
    out.f_norm = l2_norm(f);
    if (!(out.f_norm > 0.0)) throw std::invalid_argument("maximal_ratio: f has zero norm");

    const int d = f.dimension();
    const std::size_t n = static_cast<std::size_t>(sg.count);
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= n;
    const auto axis = sg.axis();
    const auto shift = modulation_shift(f);
    const double norm = std::pow(two_pi, -d);
    const double ball = std::sqrt(std::pow(pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0)) * std::pow(sg.radius, d / 2.0);

    std::vector<double> best(total, -1.0);
    std::vector<std::size_t> arg(total, 0);
    auto grid_point = [&](std::size_t p) {
        std::vector<double> x(static_cast<std::size_t>(d));
        for (int j = d - 1; j >= 0; --j) {
            x[static_cast<std::size_t>(j)] = axis[p % n];
            p /= n;
        }
        return x;
    };

    if (f.separable()) {
        std::vector<std::vector<double>> mod(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < tg.t.size(); ++k) {
            const double t = tg.t[k];
            double majorant = norm;
            for (int j = 0; j < d; ++j) {
                const auto ker = axis_kernel(f, j, t, gamma, sg.radius + shift[j]);
                axis_moduli(ker, axis.front(), sg.spacing(), n, mod[j]);
                majorant *= ker.abs_sum;
            }
            parallel_for(n, opt.workers, [&](std::size_t row) {
                const std::size_t block = total / n;
                std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
                idx[0] = row;
                for (std::size_t q = 0; q < block; ++q) {
                    double v = mod[0][row];
                    for (int j = 1; j < d; ++j) v *= mod[j][idx[j]];
                    const std::size_t p = row * block + q;
                    if (v > best[p]) {
                        best[p] = v;
                        arg[p] = k;
                    }
                    for (int j = d - 1; j >= 1 && ++idx[j] == n; --j) idx[j] = 0;
                }
            });
            out.times_used = k + 1;
            if (k % 256 == 255 && k + 1 < tg.t.size()) {
                std::vector<double> scaled(best);
                for (auto& v : scaled) v *= norm;
                const double running = l2_ball_norm(scaled, sg, d);
                // The majorant decreases in t, so later times move the norm by
                // at most majorant * |B|^{1/2}.
                if (majorant * ball <= opt.truncation_tol * running) {
                    out.truncated = true;
                    break;
                }
            }
        }
    } else {
        for (std::size_t p = 0; p < total; ++p) {
            const auto x = grid_point(p);
            for (std::size_t k = 0; k < tg.t.size(); ++k) {
                const double v = point_modulus(f, gamma, x, tg.t[k], shift);
                if (v > best[p]) {
                    best[p] = v;
                    arg[p] = k;
                }
            }
        }
        out.times_used = tg.t.size();
    }

    if (opt.golden_iterations > 0 && tg.t.size() > 1) {
        TimeGrid used = tg;
        used.t.resize(out.times_used);
        parallel_for(total, opt.workers, [&](std::size_t p) {
            const auto x = grid_point(p);
            const auto [a, b] = bracket(used, arg[p]);
            if (!f.separable()) {
                best[p] = golden_max([&](double t) { return point_modulus(f, gamma, x, t, shift); }, a, b,
                                     opt.golden_iterations, best[p]);
                return;
            }
            // Node sets fixed over the bracket; only the time factor moves.
            std::vector<AxisNodes> nodes;
            std::vector<std::vector<cplx>> base(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) {
                nodes.push_back(axis_nodes(f, j, b, gamma, std::abs(x[j]) + shift[j], a));
                for (std::size_t k = 0; k < nodes[j].xi.size(); ++k)
                    base[j].push_back(nodes[j].wf[k] * std::polar(1.0, x[j] * nodes[j].xi[k]));
            }
            auto phi = [&](double t) {
                const double tgm = t > 0.0 ? std::pow(t, gamma) : 0.0;
                double prod = 1.0;
                for (int j = 0; j < d; ++j) {
                    cplx acc = 0.0;
                    for (std::size_t k = 0; k < nodes[j].xi.size(); ++k) {
                        const double x2 = nodes[j].xi[k] * nodes[j].xi[k];
                        acc += base[j][k] * std::exp(cplx{-tgm * x2, t * x2});
                    }
                    prod *= std::abs(acc);
                }
                return prod;
            };
            best[p] = golden_max(phi, a, b, opt.golden_iterations, best[p]);
        });
    }

    for (auto& v : best) v *= norm;
    out.sup_norm = l2_ball_norm(best, sg, d);
    out.ratio = out.sup_norm / out.f_norm;
    return out;
}

// -----------------------------------------------------------------------------

double theoretical_exponent(int d, double gamma)
{
    if (d < 1) throw std::invalid_argument("d: must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    const double dd = d;
    return std::min(dd / (2.0 * (dd + 1.0)), dd / (dd + 1.0) * std::max(1.0 - 1.0 / gamma, 0.0));
}

double lemma1_bound(double R, double J_len, double eps, int d)
{
    if (!(R >= 1.0)) throw std::invalid_argument("R: must be >= 1");
    if (!(J_len > 0.0 && J_len <= 1.0)) throw std::invalid_argument("J_len: must lie in (0, 1]");
    const double dd = d;
    if (J_len <= 1.0 / R) return 1.0 + std::pow(R, dd / (dd + 1.0) + eps) * std::pow(J_len, dd / (2.0 * (dd + 1.0)));
    return std::pow(R, dd / (2.0 * (dd + 1.0)) + eps);
}

// -----------------------------------------------------------------------------

std::vector<double> ScalingReport::running_slopes() const
{
    std::vector<double> out;
    std::vector<double> r, y;
    for (const auto& e : entries) {
        r.push_back(e.R);
        y.push_back(e.ratio);
        out.push_back(r.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : fit_loglog(r, y).slope);
    }
    return out;
}

ScalingReport make_scaling_report(std::vector<ScalingEntry> entries, double target, FamilyKind kind, double tolerance)
{
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.R < b.R; });
    ScalingReport rep;
    rep.entries = std::move(entries);
    rep.target = target;
    rep.kind = kind;
    rep.tolerance = tolerance;
    if (rep.entries.size() < 4) throw std::invalid_argument("scaling report: needs at least 4 entries");
    std::vector<double> r, y;
    for (const auto& e : rep.entries) {
        r.push_back(e.R);
        y.push_back(e.ratio);
    }
    const auto fit = fit_loglog(r, y);
    rep.fitted_slope = fit.slope;
    rep.slope_stderr = fit.slope_stderr;
    rep.verdict = kind == FamilyKind::upper ? rep.fitted_slope <= target + tolerance
                                            : rep.fitted_slope >= target - tolerance;
    return rep;
}

ScalingReport case3_scaling_report(const LowerBoundResult& r, int d)
{
    (void)d;
    std::vector<ScalingEntry> entries;
    for (const auto& rec : r.records)
        if (!rec.aborted) entries.push_back({rec.R, rec.ratio_estimate, 0, 0, 0, 0.0});
    return make_scaling_report(std::move(entries), r.target_ratio_slope, FamilyKind::extremal);
}

ScalingReport exponent_sweep(const std::function<SpectrumDescriptor(double)>& family, double gamma, int d,
                             const std::vector<double>& ladder, FamilyKind kind, const SweepOptions& opt)
{
    if (ladder.size() < 4) throw std::invalid_argument("ladder: needs at least 4 R values");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i - 1])) throw std::invalid_argument("ladder: must be increasing");
    const double target = theoretical_exponent(d, gamma);
    std::vector<ScalingEntry> entries;
    for (double R : ladder) {
        try {
            const auto start = std::chrono::steady_clock::now();
            const auto f = family(R);
            if (f.dimension() != d) throw std::invalid_argument("family: dimension does not match d");
            const auto tg = TimeGrid::hybrid(R, opt.geometric, opt.spacing_factor, opt.cap, opt.tail);
            const SpaceGrid sg{1.0, opt.space_count};
            const auto m = maximal_ratio(f, gamma, tg, sg, opt.maximal);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            entries.push_back({R, m.ratio, tg.count(), m.times_used, sg.count, secs});
        } catch (const std::exception& e) {
            ScalingReport partial;
            partial.entries = entries;
            partial.target = target;
            partial.kind = kind;
            std::ostringstream os;
            os << "sweep entry R = " << R << " failed: " << e.what();
            throw SweepError(os.str(), std::move(partial));
        }
    }
    return make_scaling_report(std::move(entries), target, kind);
}

}  // namespace schrolab
