#include "schrolab/propagator.hpp"

#include "schrolab/regression.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace schrolab {

namespace {

constexpr cplx I{0.0, 1.0};

void check_point(const SpectrumDescriptor& f, const SpaceTimePoint& p)
{
    if (static_cast<int>(p.x.size()) != f.dimension())
        throw std::invalid_argument("evaluation point has dimension " + std::to_string(p.x.size()) +
                                    ", profile has " + std::to_string(f.dimension()));
    if (!(p.t >= 0.0) || !std::isfinite(p.t)) throw std::invalid_argument("t: must be a finite real >= 0");
}

struct AxisNodes {
    std::vector<double> xi;
    std::vector<cplx> kernel;  // weight * e^{i(x_j xi + t xi^2)} e^{-t^gamma xi^2}, times the axis factor if separable
};

// One tensor pass at refinement level `level` (panels doubled `level` times).
cplx direct_pass(const SpectrumDescriptor& f, const SpaceTimePoint& p, double t_gamma,
                 const std::vector<std::vector<Interval>>& cells, const std::vector<std::vector<int>>& base_panels,
                 int level, const DirectOptions& opt, double* l1_scale)
{
    const int d = f.dimension();
    const bool sep = f.separable();
    std::vector<AxisNodes> axes(d);
    std::size_t total = sep ? 0 : 1;
    for (int j = 0; j < d; ++j) {
        for (std::size_t c = 0; c < cells[j].size(); ++c) {
            const auto n = quad::composite_nodes(cells[j][c], base_panels[j][c] << level);
            for (std::size_t k = 0; k < n.x.size(); ++k) {
                const double xi = n.x[k];
                axes[j].xi.push_back(xi);
                cplx kern = n.w[k] * std::exp(I * (p.x[j] * xi + p.t * xi * xi) - t_gamma * xi * xi);
                if (sep) kern *= f.axis_factor(j, xi);
                axes[j].kernel.push_back(kern);
            }
        }
        total = sep ? total + axes[j].xi.size() : total * axes[j].xi.size();
        if (total > opt.max_nodes)
            throw quad::quadrature_error("direct propagator quadrature exceeds the node cap of " +
                                         std::to_string(opt.max_nodes));
    }

    if (sep) {
        // Fubini: the integrand is a product of one-variable factors.
        cplx prod = 1.0;
        double scale = 1.0;
        for (int j = 0; j < d; ++j) {
            cplx s = 0.0;
            double a = 0.0;
            for (const auto& k : axes[j].kernel) {
                s += k;
                a += std::abs(k);
            }
            prod *= s;
            scale *= a;
        }
        *l1_scale = scale;
        return prod;
    }

    std::vector<std::size_t> idx(d, 0);
    std::vector<double> xi(d);
    cplx acc = 0.0;
    double scale = 0.0;
    while (true) {
        cplx k = 1.0;
        for (int j = 0; j < d; ++j) {
            xi[j] = axes[j].xi[idx[j]];
            k *= axes[j].kernel[idx[j]];
        }
        const cplx v = f(std::span<const double>(xi));
        if (v != 0.0) {
            acc += k * v;
            scale += std::abs(k * v);
        }
        int j = d - 1;
        while (j >= 0 && ++idx[j] == axes[j].xi.size()) idx[j--] = 0;
        if (j < 0) break;
    }
    *l1_scale = scale;
    return acc;
}

// (2 pi)^{-d} (2 pi)^{d/2} \int r^{d-1} phi(r/R) e^{(it - t^g) r^2} (r|x|)^{1-d/2} J_{d/2-1}(r|x|) dr,
// the Fourier integral of a radial profile; a modulation shifts x by l/R.
cplx radial_evaluate(const AnnulusSpec& a, std::vector<double> x, double t, double t_gamma, const DirectOptions& opt)
{
    const int d = a.d;
    double xn = 0.0;
    for (double v : x) xn += v * v;
    xn = std::sqrt(xn);
    const RadialBump phi;
    const Interval iv{phi.inner * a.R, phi.outer * a.R};
    const double nu = d / 2.0 - 1.0;
    auto kernel = [&](double r) {
        const double z = r * xn;
        double radial;
        if (z < 1e-8) radial = std::pow(2.0, -nu) / std::tgamma(nu + 1.0);
        else radial = std::pow(z, -nu) * boost::math::cyl_bessel_j(nu, z);
        return std::pow(r, d - 1) * phi.profile(r / a.R) * radial * std::exp(cplx{-t_gamma * r * r, t * r * r});
    };
    const double gradient = xn + 2.0 * t * iv.hi;
    int panels = std::max(opt.min_panels * 8, static_cast<int>(std::ceil(iv.width() * gradient / (20.0 * pi / 4.0))));
    auto pass = [&](int n) {
        const auto nodes = quad::composite_nodes(iv, n);
        cplx acc = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < nodes.x.size(); ++k) {
            const cplx v = nodes.w[k] * kernel(nodes.x[k]);
            acc += v;
            scale += std::abs(v);
        }
        return std::pair{acc, scale};
    };
    auto [prev, unused] = pass(panels);
    (void)unused;
    while (true) {
        panels *= 2;
        if (static_cast<std::size_t>(panels) * 20 > opt.max_nodes)
            throw quad::quadrature_error("direct propagator quadrature exceeds the node cap of " +
                                         std::to_string(opt.max_nodes));
        const auto [cur, scale] = pass(panels);
        const double diff = std::abs(cur - prev);
        if (diff <= opt.rel_tol * std::abs(cur) || diff <= 1e-14 * scale)
            return cur * std::pow(two_pi, -d / 2.0);
        prev = cur;
    }
}

cplx direct_evaluate(const SpectrumDescriptor& f, const SpaceTimePoint& p, double t_gamma, const DirectOptions& opt)
{
    check_point(f, p);
    {
        const SpectrumDescriptor* base = &f;
        std::vector<double> x = p.x;
        while (const auto* m = std::get_if<ModulatedSpec>(&base->params())) {
            for (std::size_t j = 0; j < x.size(); ++j) x[j] += m->l[j] / m->R;
            base = m->base.get();
        }
        if (const auto* a = std::get_if<AnnulusSpec>(&base->params())) return radial_evaluate(*a, x, p.t, t_gamma, opt);
    }
    const int d = f.dimension();
    const auto cells = f.axis_cells();
    const double r_max = f.support().outer;
    double xnorm = 0.0;
    for (double v : p.x) xnorm += v * v;
    const double gradient = std::sqrt(xnorm) + 2.0 * p.t * r_max;
    const double h_osc = gradient > 0.0 ? pi / (4.0 * gradient) : std::numeric_limits<double>::infinity();

    std::vector<std::vector<int>> base_panels(d);
    for (int j = 0; j < d; ++j)
        for (const auto& iv : cells[j]) {
            const double need = std::isfinite(h_osc) ? std::ceil(iv.width() / (20.0 * h_osc)) : 0.0;
            base_panels[j].push_back(std::max(opt.min_panels, static_cast<int>(std::min(need, 1e9))));
        }

    double scale = 0.0;
    cplx prev = direct_pass(f, p, t_gamma, cells, base_panels, 0, opt, &scale);
    for (int level = 1;; ++level) {
        const cplx cur = direct_pass(f, p, t_gamma, cells, base_panels, level, opt, &scale);
        const double diff = std::abs(cur - prev);
        if (diff <= opt.rel_tol * std::abs(cur) || diff <= 1e-14 * scale)
            return cur * std::pow(two_pi, -d);
        prev = cur;
    }
}

}  // namespace

cplx evaluate_free(const SpectrumDescriptor& f, const SpaceTimePoint& p, const DirectOptions& opt)
{
    return direct_evaluate(f, p, 0.0, opt);
}

cplx evaluate_p_gamma(const SpectrumDescriptor& f, double gamma, const SpaceTimePoint& p, const DirectOptions& opt)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    return direct_evaluate(f, p, p.t > 0.0 ? std::pow(p.t, gamma) : 0.0, opt);
}

double p_gamma_majorant(const SpectrumDescriptor& f, double gamma, double t)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    const double tg = t > 0.0 ? std::pow(t, gamma) : 0.0;
    const int d = f.dimension();
    const auto cells = f.axis_cells();

    const SpectrumDescriptor* base = &f;
    while (const auto* m = std::get_if<ModulatedSpec>(&base->params())) base = m->base.get();
    const auto* annulus = std::get_if<AnnulusSpec>(&base->params());

    auto pass = [&](int panels) {
        if (annulus) {
            // Radial profile: |S^{d-1}| \int r^{d-1} e^{-t^g r^2} phi(r/R) dr.
            const RadialBump phi;
            const auto n = quad::composite_nodes({phi.inner * annulus->R, phi.outer * annulus->R}, panels);
            double acc = 0.0;
            for (std::size_t k = 0; k < n.x.size(); ++k)
                acc += n.w[k] * std::pow(n.x[k], d - 1) * std::exp(-tg * n.x[k] * n.x[k]) * phi.profile(n.x[k] / annulus->R);
            return acc * sphere_area(d);
        }
        std::vector<quad::Nodes> axes(d);
        for (int j = 0; j < d; ++j)
            for (const auto& iv : cells[j]) {
                auto n = quad::composite_nodes(iv, panels);
                axes[j].x.insert(axes[j].x.end(), n.x.begin(), n.x.end());
                for (std::size_t k = 0; k < n.w.size(); ++k) axes[j].w.push_back(n.w[k] * std::exp(-tg * n.x[k] * n.x[k]));
            }
        if (f.separable()) {
            double prod = 1.0;
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < axes[j].x.size(); ++k) s += axes[j].w[k] * std::abs(f.axis_factor(j, axes[j].x[k]));
                prod *= s;
            }
            return prod;
        }
        std::vector<std::size_t> idx(d, 0);
        std::vector<double> xi(d);
        double acc = 0.0;
        while (true) {
            double w = 1.0;
            for (int j = 0; j < d; ++j) {
                xi[j] = axes[j].x[idx[j]];
                w *= axes[j].w[idx[j]];
            }
            if (w != 0.0) acc += w * std::abs(f(std::span<const double>(xi)));
            int j = d - 1;
            while (j >= 0 && ++idx[j] == axes[j].x.size()) idx[j--] = 0;
            if (j < 0) break;
        }
        return acc;
    };
    int panels = 2;
    double prev = pass(panels);
    while (true) {
        panels *= 2;
        const double cur = pass(panels);
        if (std::abs(cur - prev) <= 1e-9 * std::abs(cur) || cur == 0.0) return cur * std::pow(two_pi, -d);
        if (panels > 1 << 14) throw quad::quadrature_error("p_gamma_majorant: quadrature did not converge");
        prev = cur;
    }
}

TailBoundCheck dissipative_tail_bound(const SpectrumDescriptor& f, double gamma, double eps, double R, int samples,
                                      double constant)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps: must be positive");
    if (!(R >= 1.0)) throw std::invalid_argument("R: must be >= 1");
    if (samples < 2) throw std::invalid_argument("samples: need at least 2");
    TailBoundCheck out;
    out.constant = constant;
    out.t_lo = std::pow(R, -2.0 / gamma + eps);
    out.bound = std::exp(-std::pow(R, eps)) * std::pow(R, f.dimension() / 2.0) * l2_norm(f);
    if (out.t_lo >= 1.0) {
        out.holds = true;
        return out;
    }
    const double span = std::log(1.0 / out.t_lo);
    for (int k = 0; k < samples; ++k) {
        // Open interval: stay strictly inside (t_lo, 1).
        const double frac = (k + 0.5) / samples;
        const double t = out.t_lo * std::exp(frac * span);
        out.sampled_sup = std::max(out.sampled_sup, p_gamma_majorant(f, gamma, t));
    }
    out.holds = out.sampled_sup <= constant * out.bound;
    return out;
}

// -----------------------------------------------------------------------------

TorusCoefficient torus_coefficient(const std::vector<std::int64_t>& l, double t, double R, double gamma, double eps)
{
    const int d = static_cast<int>(l.size());
    if (d < 1) throw std::invalid_argument("l: must have at least one component");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma: must be positive");
    const double t_hi = std::pow(R, -2.0 / gamma + eps);
    if (!(t > 0.0 && t <= t_hi))
        throw std::invalid_argument("t: must lie in (0, R^{-2/gamma+eps}] = (0, " + std::to_string(t_hi) + "]");
    const double a = std::pow(t, gamma) * R * R;
    double ln = 0.0;
    for (auto v : l) ln += static_cast<double>(v) * static_cast<double>(v);
    ln = std::sqrt(ln);
    // phi is radial and vanishes beyond |xi| = 3 < pi, so the cube integral is
    // a Hankel transform of the profile.
    const RadialBump phi;
    const Interval iv{phi.inner, phi.outer};
    const double nu = d / 2.0 - 1.0;
    double scale = 0.0;
    auto pass = [&](int panels) {
        const auto n = quad::composite_nodes(iv, panels);
        double acc = 0.0;
        scale = 0.0;
        for (std::size_t k = 0; k < n.x.size(); ++k) {
            const double r = n.x[k];
            const double z = r * ln;
            const double radial = z < 1e-8 ? std::pow(2.0, -nu) / std::tgamma(nu + 1.0)
                                           : std::pow(z, -nu) * boost::math::cyl_bessel_j(nu, z);
            const double v = n.w[k] * std::pow(r, d - 1) * phi.profile(r) * std::exp(-a * r * r) * radial;
            acc += v;
            scale += std::abs(v);
        }
        return acc;
    };
    int panels = std::max(16, static_cast<int>(std::ceil(iv.width() * (ln + 1.0) / (20.0 * pi / 4.0))));
    double prev = pass(panels);
    for (int level = 0; level < 12; ++level) {
        panels *= 2;
        const double cur = pass(panels);
        if (std::abs(cur - prev) <= std::max(1e-12 * std::abs(cur), 1e-15 * scale)) return {l, t, cplx{cur * std::pow(two_pi, -d / 2.0)}};
        prev = cur;
    }
    throw quad::quadrature_error("torus_coefficient: quadrature did not converge");
}

DecayFit fit_coefficient_decay(int d, double t, double R, double gamma, int n_max, double eps)
{
    std::vector<double> xs, ys;
    for (int n = 1; n <= n_max; ++n) {
        std::vector<std::int64_t> l(d, 0);
        l[0] = n;
        const auto c = torus_coefficient(l, t, R, gamma, eps);
        const double m = std::abs(c.value);
        if (m <= 0.0) continue;
        xs.push_back(std::log(1.0 + n));
        ys.push_back(std::log(m));
    }
    const auto fit = fit_line(xs, ys);
    return {fit.slope, fit.intercept};
}

// -----------------------------------------------------------------------------

bool in_counterexample_box(const CounterexampleParams& cp, const SpaceTimePoint& p)
{
    if (static_cast<int>(p.x.size()) != cp.d() || !(p.t >= 0.0)) return false;
    const double w = cp.k.c1 * std::pow(cp.R(), cp.gamma() / 2.0 - 1.0);
    const double slack = 1e-12 * w;
    if (p.x[0] < -w - slack || p.x[0] > -w / 2.0 + slack) return false;
    for (int j = 1; j < cp.d(); ++j)
        if (std::abs(p.x[j]) > cp.k.c1 * (1.0 + 1e-12)) return false;
    return true;
}

namespace {

const quad::Nodes& bump_nodes(int panels)
{
    thread_local int cached_panels = -1;
    thread_local quad::Nodes nodes;
    if (cached_panels != panels) {
        static const Bump1D phi = Bump1D::canonical();
        nodes = quad::composite_nodes({-1.0, 1.0}, panels);
        for (std::size_t k = 0; k < nodes.x.size(); ++k) nodes.w[k] *= phi(nodes.x[k]);
        cached_panels = panels;
    }
    return nodes;
}

}  // namespace

cplx lattice_weight(const CounterexampleParams& cp, double x_j, double t, double ell, int panels)
{
    const auto& n = bump_nodes(panels);
    const double tg = t > 0.0 ? std::pow(t, cp.gamma()) : 0.0;
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n.x.size(); ++k) {
        const double xi = n.x[k];
        const double shifted = xi + cp.D * ell;
        acc += n.w[k] * std::exp(I * (xi * (x_j + 2.0 * cp.D * t * ell) + xi * xi * t) - shifted * shifted * tg);
    }
    return acc;
}

std::vector<cplx> axis_partial_sums(const CounterexampleParams& cp, double x_j, double t)
{
    const double dx = cp.D * x_j;
    const double theta = cp.D * cp.D * t;
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(cp.lattice_count()));
    cplx acc = 0.0;
    for (std::int64_t l = cp.ell_begin(); l < cp.ell_end(); ++l) {
        const double lf = static_cast<double>(l);
        acc += std::polar(1.0, lf * dx + lf * lf * theta);
        out.push_back(acc);
    }
    return out;
}

FactorizedEvaluation factorized_evaluate(const CounterexampleParams& cp, const SpaceTimePoint& p,
                                         const FactorizedOptions& opt)
{
    if (static_cast<int>(p.x.size()) != cp.d())
        throw std::invalid_argument("factorized_evaluate: point dimension does not match d");
    if (opt.check_box && !in_counterexample_box(cp, p))
        throw std::invalid_argument("factorized_evaluate: point lies outside the Omega* box");
    const auto& n = bump_nodes(opt.panels);
    const double t = p.t;
    const double tg = t > 0.0 ? std::pow(t, cp.gamma()) : 0.0;
    const double sqR = std::sqrt(cp.R());

    FactorizedEvaluation out;
    {
        const double drift = sqR * (p.x[0] + 2.0 * cp.r_half * t);
        cplx acc = 0.0;
        for (std::size_t k = 0; k < n.x.size(); ++k) {
            const double xi = n.x[k];
            const double freq = cp.r_half + xi * sqR;
            acc += n.w[k] * std::exp(I * (xi * drift + cp.R() * xi * xi * t) - freq * freq * tg);
        }
        out.i1 = acc;
    }

    // I_j = sum_ell e^{i(D ell x_j + D^2 ell^2 t)} h(ell); the ell-dependence of
    // the h integrand is geometric in ell, so it is advanced by multiplication.
    const std::size_t K = n.x.size();
    std::vector<cplx> base(K), step(K), power(K);
    const cplx rate{-2.0 * cp.D * tg, 2.0 * cp.D * t};
    const double theta = cp.D * cp.D * t;
    const std::int64_t l0 = cp.ell_begin();
    for (int j = 1; j < cp.d(); ++j) {
        const double xj = p.x[j];
        for (std::size_t k = 0; k < K; ++k) {
            const double xi = n.x[k];
            base[k] = n.w[k] * std::exp(cplx{-tg * xi * xi, xi * xj + xi * xi * t});
            step[k] = std::exp(rate * xi);
            power[k] = std::exp(rate * (xi * static_cast<double>(l0)));
        }
        const double dx = cp.D * xj;
        cplx acc = 0.0;
        for (std::int64_t l = l0; l < cp.ell_end(); ++l) {
            const double lf = static_cast<double>(l);
            cplx h = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                h += base[k] * power[k];
                power[k] *= step[k];
            }
            const double damp = tg > 0.0 ? std::exp(-tg * cp.D * cp.D * lf * lf) : 1.0;
            acc += std::polar(damp, lf * dx + lf * lf * theta) * h;
        }
        out.ij.push_back(acc);
    }
    out.product_modulus = std::abs(out.i1);
    for (const auto& v : out.ij) out.product_modulus *= std::abs(v);
    return out;
}

AbelSplit abel_main_plus_error(const CounterexampleParams& cp, const SpaceTimePoint& p, int axis, int panels)
{
    if (axis < 1 || axis >= cp.d()) throw std::invalid_argument("axis: must be in 1..d-1");
    const double xj = p.x.at(axis);
    const double t = p.t;
    const double dx = cp.D * xj;
    const double theta = cp.D * cp.D * t;

    AbelSplit out;
    for (std::int64_t l = cp.ell_begin(); l < cp.ell_end(); ++l) {
        const double lf = static_cast<double>(l);
        out.direct += std::polar(1.0, lf * dx + lf * lf * theta) * lattice_weight(cp, xj, t, lf, panels);
    }
    const auto partial = axis_partial_sums(cp, xj, t);
    double sup = 0.0;
    for (const auto& s : partial) sup = std::max(sup, std::abs(s));
    const cplx full = partial.empty() ? cplx{0.0} : partial.back();
    out.main = full * lattice_weight(cp, xj, t, static_cast<double>(cp.ell_end() - 1), panels);
    const double tg = t > 0.0 ? std::pow(t * cp.R(), cp.gamma()) : 0.0;
    out.e1_bound = 4.0 * (cp.r_half * t + tg) * sup;
    out.residual = std::abs(out.direct - out.main);
    return out;
}

}  // namespace schrolab
